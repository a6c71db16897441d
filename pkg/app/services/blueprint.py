"""
Blueprint vocabulary helpers: canonical identifiers, interface type and
namespace normalization, and structural validation of composed models.
"""

import re
from typing import Dict, Iterable, List, Optional, Sequence, Set

import networkx as nx

from app.models import (
    ArchitectureModel,
    AtomicRosNodeClassifier,
    CommunicationPort,
    ComposedRosNodeClassifier,
    CompileType,
    PlaceholderClassifier,
    Violation,
)

ATOMIC_PREFIX = "arc"
COMPOSED_PREFIX = "ccc"
PLACEHOLDER_PREFIX = "phc"
LAUNCH_PREFIX = "lf"
NODE_PREFIX = "n"

# Launch file and node instance ids are compact (lf1, n3); classifier ids are not (arc_1).
INSTANCE_PREFIXES = frozenset({LAUNCH_PREFIX, NODE_PREFIX})

STEREOTYPE_ATOMIC = "AtomicRosNodeClassifier"
STEREOTYPE_COMPOSED = "ComposedRosNodeClassifier"
STEREOTYPE_PART = "RosNodePart"
STEREOTYPE_PLACEHOLDER = "PlaceholderClassifier"

UNRESOLVED_NAME_PREFIX = "<unresolved:"

INTERFACE_TYPE_PATTERN = re.compile(r"^[A-Za-z][A-Za-z0-9_]*/(msg|srv)/[A-Za-z][A-Za-z0-9_]*$")
_ID_PATTERN = re.compile(r"^([a-z]+)_?(\d+)$")


def canonical_id(prefix: str, ordinal: int) -> str:
    """Build a stable identifier such as ``arc_1`` or ``lf2``."""
    if not prefix or not prefix.isalpha():
        raise ValueError(f"Identifier prefix must be non-empty and alphabetic, got {prefix!r}")
    if ordinal < 1:
        raise ValueError(f"Identifier ordinal must be positive, got {ordinal}")
    if prefix in INSTANCE_PREFIXES:
        return f"{prefix}{ordinal}"
    return f"{prefix}_{ordinal}"


def id_sort_key(identifier: str):
    """Sort ids by prefix then numeric ordinal (arc_2 before arc_10)."""
    match = _ID_PATTERN.match(identifier)
    if not match:
        return (identifier, 0)
    return (match.group(1), int(match.group(2)))


def unresolved_name(expression: str) -> str:
    return f"{UNRESOLVED_NAME_PREFIX}{expression}>"


def is_unresolved_name(name: str) -> bool:
    return name.startswith(UNRESOLVED_NAME_PREFIX)


def normalize_interface_type(qualified: str) -> Optional[str]:
    """
    Normalize ``pkg.msg.Type``, ``pkg::msg::Type`` or ``pkg/msg/Type`` to
    ``pkg/msg/Type``. Returns None when the input has no msg/srv segment.
    """
    parts = [p for p in re.split(r"::|\.|/", qualified.strip()) if p]
    if len(parts) < 3:
        return None
    pkg, kind, type_name = parts[-3], parts[-2], parts[-1]
    candidate = f"{pkg}/{kind}/{type_name}"
    if INTERFACE_TYPE_PATTERN.match(candidate):
        return candidate
    return None


def join_namespace(*segments: Optional[str]) -> str:
    """
    Join namespace segments outer-to-inner into an absolute namespace.

    An absolute segment (leading ``/``) discards everything outside it. The
    global scope is the empty string.
    """
    parts: List[str] = []
    for segment in segments:
        if not segment:
            continue
        if segment.startswith("/"):
            parts = []
        parts.extend(p for p in segment.split("/") if p)
    return "/" + "/".join(parts) if parts else ""


def scope_key(*segments: Optional[str]) -> str:
    """Joined scope string as used for namespace map keys (``main/sub``)."""
    return join_namespace(*segments).lstrip("/")


def fully_qualified_node_name(namespace: str, node_name: Optional[str]) -> str:
    base = join_namespace(namespace)
    return f"{base}/{node_name or ''}"


def validate_port(port: CommunicationPort, owner: str) -> List[Violation]:
    violations = []
    if not INTERFACE_TYPE_PATTERN.match(port.interface_type or ""):
        violations.append(
            Violation(
                element=owner,
                invariant="port-interface-type",
                message=f"Port '{port.declared_name}' has malformed interface type '{port.interface_type}'",
            )
        )
    if port.kind.has_callback != (port.callback_name is not None):
        violations.append(
            Violation(
                element=owner,
                invariant="port-callback",
                message=f"{port.kind.value} port '{port.declared_name}' callback presence is wrong",
            )
        )
    return violations


def validate_atomic_classifier(classifier: AtomicRosNodeClassifier) -> List[Violation]:
    violations = []
    if not classifier.source_file_paths:
        violations.append(
            Violation(
                element=classifier.id,
                invariant="source-paths-non-empty",
                message=f"{classifier.class_name} has no source files",
            )
        )
    if classifier.compile_type == CompileType.PYTHON and classifier.header_file_paths:
        violations.append(
            Violation(
                element=classifier.id,
                invariant="python-no-headers",
                message=f"Python classifier {classifier.class_name} lists header files",
            )
        )
    for port in classifier.ports:
        violations.extend(validate_port(port, classifier.id))
    return violations


def _composition_graph(composed_by_id: Dict[str, ComposedRosNodeClassifier]) -> nx.DiGraph:
    """Edges run from a composed classifier to every composed classifier one of its parts references."""
    graph = nx.DiGraph()
    for composed in composed_by_id.values():
        graph.add_node(composed.id)
        for part in composed.parts:
            if part.classifier_ref in composed_by_id:
                graph.add_edge(composed.id, part.classifier_ref)
    return graph


def _subtree_instance_ids(
    composed_id: str,
    graph: nx.DiGraph,
    composed_by_id: Dict[str, ComposedRosNodeClassifier],
) -> Set[str]:
    ids: Set[str] = set()
    for member in nx.descendants(graph, composed_id) | {composed_id}:
        ids.update(part.instance_id for part in composed_by_id[member].parts)
    return ids


def _find_cycles(root_id: str, graph: nx.DiGraph) -> List[List[str]]:
    """Containment cycles reachable from ``root_id``, each starting at its lowest id and closed."""
    reachable = graph.subgraph(nx.descendants(graph, root_id) | {root_id})
    cycles = []
    for cycle in nx.simple_cycles(reachable):
        start = cycle.index(min(cycle, key=id_sort_key))
        ordered = cycle[start:] + cycle[:start]
        cycles.append(ordered + ordered[:1])
    return sorted(cycles, key=lambda c: [id_sort_key(i) for i in c])


def validate_model(
    model: ComposedRosNodeClassifier,
    atomic_classifiers: Sequence[AtomicRosNodeClassifier] = (),
    composed_classifiers: Sequence[ComposedRosNodeClassifier] = (),
    placeholder_classifiers: Sequence[PlaceholderClassifier] = (),
) -> List[Violation]:
    """
    Check the composed classifier ``model`` and everything it reaches against
    the blueprint invariants. Violations are returned, never raised.
    """
    violations: List[Violation] = []

    composed_by_id: Dict[str, ComposedRosNodeClassifier] = {}
    for composed in [model, *composed_classifiers]:
        composed_by_id.setdefault(composed.id, composed)

    known: Dict[str, int] = {}
    for classifier_id in (
        [c.id for c in atomic_classifiers]
        + list(composed_by_id)
        + [c.id for c in placeholder_classifiers]
    ):
        known[classifier_id] = known.get(classifier_id, 0) + 1

    for classifier in atomic_classifiers:
        violations.extend(validate_atomic_classifier(classifier))

    graph = _composition_graph(composed_by_id)
    for cycle in _find_cycles(model.id, graph):
        violations.append(
            Violation(
                element=cycle[0],
                invariant="acyclic-nesting",
                message=f"Composed classifier contains itself: {' -> '.join(cycle)}",
            )
        )

    reachable = [composed_by_id[i] for i in nx.bfs_tree(graph, model.id)]

    for composed in reachable:
        seen_parts: Set[str] = set()
        for part in composed.parts:
            element = f"{composed.id}/{part.instance_id}"
            if part.instance_id in seen_parts:
                violations.append(
                    Violation(
                        element=element,
                        invariant="unique-part-ids",
                        message=f"Duplicate part id {part.instance_id} in {composed.id}",
                    )
                )
            seen_parts.add(part.instance_id)

            count = known.get(part.classifier_ref, 0)
            if count == 0:
                violations.append(
                    Violation(
                        element=element,
                        invariant="classifier-ref-resolves",
                        message=f"Part {part.instance_id} references unknown classifier '{part.classifier_ref}'",
                    )
                )
            elif count > 1:
                violations.append(
                    Violation(
                        element=element,
                        invariant="classifier-ref-resolves",
                        message=f"Part {part.instance_id} reference '{part.classifier_ref}' is ambiguous",
                    )
                )

            if part.namespace and not part.namespace.startswith("/"):
                violations.append(
                    Violation(
                        element=element,
                        invariant="namespace-absolute",
                        message=f"Part namespace '{part.namespace}' must be empty or start with '/'",
                    )
                )

        scope_ids = _subtree_instance_ids(composed.id, graph, composed_by_id)
        for relation in composed.relations:
            element = f"{composed.id}/{relation.kind.value}:{relation.resolved_name}"
            if not relation.resolved_name.startswith("/") or "~" in relation.resolved_name:
                violations.append(
                    Violation(
                        element=element,
                        invariant="relation-name-absolute",
                        message=f"Relation name '{relation.resolved_name}' is not absolute",
                    )
                )
            dangling = [
                i
                for i in relation.producer_instance_ids + relation.consumer_instance_ids
                if i not in scope_ids
            ]
            for instance_id in dangling:
                violations.append(
                    Violation(
                        element=element,
                        invariant="relation-endpoints-exist",
                        message=f"Relation endpoint {instance_id} is not a part of {composed.id}",
                    )
                )

    return violations


def validate_architecture(model: ArchitectureModel) -> List[Violation]:
    root = model.composed(model.root_composed_id)
    if root is None:
        return [
            Violation(
                element=model.root_composed_id,
                invariant="root-exists",
                message=f"Root composed classifier {model.root_composed_id} is missing",
            )
        ]
    return validate_model(
        root,
        model.atomic_classifiers,
        model.composed_classifiers,
        model.placeholder_classifiers,
    )


def unique(items: Iterable[str]) -> List[str]:
    """Order-preserving de-duplication."""
    seen: Set[str] = set()
    result = []
    for item in items:
        if item not in seen:
            seen.add(item)
            result.append(item)
    return result
