"""
System architecture construction: turn the launch dependency description,
instance links and derived relations into a composed model, and write it as
PlantUML at the atomic (ACD) and composed (CCD) level.

The line grammar is documented in docs/plantuml_dialect.md and shared with
app.services.plantuml_parser.
"""

import logging
import re
from typing import Dict, List, Optional, Sequence

from app.errors import AnalysisError, ModelValidationError
from app.models import (
    ArchitectureModel,
    AtomicRosNodeClassifier,
    CommunicationRelation,
    ComposedRosNodeClassifier,
    LaunchDependencyDescription,
    NodeInventory,
    PlaceholderClassifier,
    PortKind,
    RosNodePart,
)
from app.services.blueprint import (
    COMPOSED_PREFIX,
    PLACEHOLDER_PREFIX,
    STEREOTYPE_ATOMIC,
    STEREOTYPE_COMPOSED,
    STEREOTYPE_PART,
    STEREOTYPE_PLACEHOLDER,
    canonical_id,
    join_namespace,
    validate_architecture,
)
from app.services.canonical import canonical_namespace
from app.services.diagnostics import DiagnosticsCollector

logger = logging.getLogger(__name__)

SYSTEM_CLASSIFIER_NAME = "system"
CCD_FILE = "system.puml"

_LAUNCH_SUFFIX = re.compile(r"(\.(py|xml|yaml|yml))?$")

PORT_DIRECTIONS = {
    PortKind.PUBLISHER: "portout",
    PortKind.SERVICE_CLIENT: "portout",
    PortKind.SUBSCRIBER: "portin",
    PortKind.SERVICE_SERVER: "portin",
}


def composed_name(launch_file_name: str) -> str:
    """``brickbybrick.launch.py`` -> ``brickbybrick``"""
    stem = _LAUNCH_SUFFIX.sub("", launch_file_name, count=1)
    if stem.endswith(".launch"):
        stem = stem[: -len(".launch")]
    return stem or launch_file_name


def label(text: str) -> str:
    """Make free text safe inside a double-quoted PlantUML label."""
    return text.replace('"', "'").replace("\r", " ").replace("\n", " ")


def build_composed_model(
    ldd: LaunchDependencyDescription,
    links: Dict[str, Optional[str]],
    relations: Sequence[CommunicationRelation],
    inventory: Optional[NodeInventory] = None,
    diagnostics: Optional[DiagnosticsCollector] = None,
) -> ArchitectureModel:
    """
    One composed classifier per launch file, nested along the include tree.

    Node instances become parts typed by their linked atomic classifier, or by
    a placeholder when unlinked. Each relation is attached to the deepest
    composed classifier whose subtree holds all of its endpoints.
    """
    diagnostics = diagnostics or DiagnosticsCollector(stage="synthesize")
    if not ldd.list_launch_file or not ldd.roots:
        raise AnalysisError("Launch dependency description has no root launch file")

    classifiers = {c.id: c for _, c in inventory.classifiers()} if inventory else {}
    composed_ids = {entry.id: canonical_id(COMPOSED_PREFIX, i) for i, entry in enumerate(ldd.list_launch_file, 1)}

    parent_of: Dict[str, str] = {}
    owner_of: Dict[str, str] = {}
    for entry in ldd.list_launch_file:
        for child in entry.included_launch_files:
            parent_of.setdefault(child, entry.id)
        for node_id in entry.nodes:
            owner_of[node_id] = entry.id

    placeholders: Dict[tuple, PlaceholderClassifier] = {}
    node_parts: Dict[str, RosNodePart] = {}
    for instance in ldd.list_atom_node_instances:
        classifier_id = links.get(instance.id)
        classifier = classifiers.get(classifier_id or "")
        if classifier_id is None:
            key = (instance.package, instance.exec_name)
            if key not in placeholders:
                placeholders[key] = PlaceholderClassifier(
                    id=canonical_id(PLACEHOLDER_PREFIX, len(placeholders) + 1),
                    name=instance.exec_name,
                    exec_name=instance.exec_name,
                    package=instance.package,
                )
                diagnostics.warning(
                    "placeholder",
                    f"{instance.id} typed by placeholder {placeholders[key].id} "
                    f"({instance.package or '?'}/{instance.exec_name})",
                )
            classifier_id = placeholders[key].id
        node_parts[instance.id] = RosNodePart(
            instance_id=instance.id,
            classifier_ref=classifier_id,
            node_name=instance.node_name or (classifier.node_name if classifier else None),
            namespace=instance.namespace,
            remappings=list(instance.remappings),
            executable=instance.exec_name,
        )

    include_namespace: Dict[str, str] = {root: "" for root in ldd.roots}
    pending = list(ldd.roots)
    while pending:
        entry = ldd.launch_file(pending.pop(0))
        if entry is None:
            continue
        outer = include_namespace[entry.id]
        for child in entry.included_launch_files:
            key = next((k for k, ids in entry.namespace.items() if child in ids), None)
            include_namespace.setdefault(child, join_namespace(outer, key) if key else outer)
            pending.append(child)

    def ancestry(launch_id: str) -> List[str]:
        chain = [launch_id]
        while chain[-1] in parent_of:
            chain.append(parent_of[chain[-1]])
        return list(reversed(chain))

    synthetic = len(ldd.roots) > 1
    system_id = canonical_id(COMPOSED_PREFIX, len(ldd.list_launch_file) + 1)

    attached: Dict[str, List[CommunicationRelation]] = {}
    for relation in relations:
        endpoints = relation.producer_instance_ids + relation.consumer_instance_ids
        chains = [ancestry(owner_of[i]) for i in endpoints if i in owner_of]
        if not chains:
            diagnostics.warning(
                "relation-orphan", f"{relation.kind.value} {relation.resolved_name} has no placed endpoint"
            )
            continue
        common: List[str] = []
        for level in zip(*chains):
            if len(set(level)) != 1:
                break
            common.append(level[0])
        target = composed_ids[common[-1]] if common else system_id
        attached.setdefault(target, []).append(relation)

    composed: List[ComposedRosNodeClassifier] = []
    for entry in ldd.list_launch_file:
        parts = [node_parts[n] for n in entry.nodes if n in node_parts]
        for child in entry.included_launch_files:
            parts.append(
                RosNodePart(
                    instance_id=child,
                    classifier_ref=composed_ids[child],
                    namespace=include_namespace.get(child, ""),
                )
            )
        composed.append(
            ComposedRosNodeClassifier(
                id=composed_ids[entry.id],
                name=composed_name(entry.type),
                parts=parts,
                relations=attached.get(composed_ids[entry.id], []),
            )
        )

    root_id = composed_ids[ldd.roots[0]]
    if synthetic:
        composed.append(
            ComposedRosNodeClassifier(
                id=system_id,
                name=SYSTEM_CLASSIFIER_NAME,
                parts=[RosNodePart(instance_id=r, classifier_ref=composed_ids[r]) for r in ldd.roots],
                relations=attached.get(system_id, []),
            )
        )
        root_id = system_id
        diagnostics.info("synthetic-root", f"{len(ldd.roots)} root launch files wrapped in '{SYSTEM_CLASSIFIER_NAME}'")

    model = ArchitectureModel(
        atomic_classifiers=list(classifiers.values()),
        composed_classifiers=composed,
        placeholder_classifiers=list(placeholders.values()),
        root_composed_id=root_id,
    )
    violations = validate_architecture(model)
    if violations:
        raise ModelValidationError("Composed model", violations)
    logger.info(
        f"Built composed model: {len(composed)} composed classifiers, "
        f"{len(node_parts)} node parts, {len(placeholders)} placeholders"
    )
    return model


def emit_acd(classifier: AtomicRosNodeClassifier) -> str:
    lines = [
        "@startuml",
        f'component "{label(classifier.class_name)}" as {classifier.id} <<{STEREOTYPE_ATOMIC}>> {{',
    ]
    for index, port in enumerate(classifier.ports, 1):
        text = f"{port.declared_name} : {port.interface_type}"
        if port.callback_name and port.kind.has_callback:
            text += f" ({port.callback_name})"
        lines.append(
            f'  {PORT_DIRECTIONS[port.kind]} "{label(text)}" as {classifier.id}_p{index} <<{port.kind.value}>>'
        )
    lines.append("}")
    if classifier.description:
        lines.append(f"note bottom of {classifier.id} : {label(classifier.description)}")
    lines.append("@enduml")
    return "\n".join(lines) + "\n"


def _part_label(part: RosNodePart, classifier_name: str) -> str:
    fields = [
        part.node_name or "",
        f"namespace: {canonical_namespace(part.namespace)}",
    ]
    if part.executable:
        fields.append(f"executable: {part.executable}")
    fields.append(f"classifier: {classifier_name}")
    fields.extend(f"remap: {source} -> {target}" for source, target in part.remappings)
    return "\\n".join(label(f) for f in fields)


def emit_ccd(model: ArchitectureModel) -> str:
    """
    Nested component blocks following the include tree. Relations are drawn
    as interfaces inside the block they are attached to.
    """
    violations = validate_architecture(model)
    if violations:
        raise ModelValidationError("Composed model", violations)

    names = model.classifier_names()
    lines = ["@startuml"]

    def block(composed: ComposedRosNodeClassifier, indent: str):
        lines.append(f'{indent}component "{label(composed.name)}" as {composed.id} <<{STEREOTYPE_COMPOSED}>> {{')
        inner = indent + "  "
        for part in composed.parts:
            header = (
                f'{inner}component "{_part_label(part, names[part.classifier_ref])}" '
                f"as {part.instance_id} <<{STEREOTYPE_PART}>>"
            )
            child = model.composed(part.classifier_ref)
            if child is None:
                lines.append(header)
                continue
            lines.append(header + " {")
            block(child, inner + "  ")
            lines.append(f"{inner}}}")
        for index, relation in enumerate(composed.relations, 1):
            alias = f"{composed.id}_r{index}"
            lines.append(
                f'{inner}interface "{relation.resolved_name} : {relation.interface_type}" '
                f"as {alias} <<{relation.kind.value}>>"
            )
            lines.extend(f"{inner}{producer} --> {alias}" for producer in relation.producer_instance_ids)
            lines.extend(f"{inner}{alias} --> {consumer}" for consumer in relation.consumer_instance_ids)
        lines.append(f"{indent}}}")

    block(model.composed(model.root_composed_id), "")
    for placeholder in model.placeholder_classifiers:
        lines.append(f'component "{label(placeholder.name)}" as {placeholder.id} <<{STEREOTYPE_PLACEHOLDER}>>')
    lines.append("@enduml")
    return "\n".join(lines) + "\n"
