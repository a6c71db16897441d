"""
Canonical metric elements.

The PlantUML parser and the in-memory model both go through these builders,
so an emitted diagram and the model it came from produce identical keys.
"""

from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from app.models import (
    ArchitectureModel,
    AtomicRosNodeClassifier,
    CanonicalElement,
    MetricElementKind,
    PortKind,
)
from app.services.blueprint import STEREOTYPE_ATOMIC, fully_qualified_node_name, join_namespace

ElementSets = Dict[MetricElementKind, Set[CanonicalElement]]


def canonical_namespace(namespace: Optional[str]) -> str:
    return join_namespace(namespace) or "/"


def arc_elements(
    class_name: str,
    stereotype: str,
    ports: Iterable[Tuple[PortKind, str, Optional[str]]],
) -> List[CanonicalElement]:
    """Elements of one atomic classifier; ports are ``(kind, interface_type, callback)``."""
    elements = [
        CanonicalElement(kind=MetricElementKind.ARC_NAME, key=(class_name,)),
        CanonicalElement(kind=MetricElementKind.ARC_STEREOTYPE, key=(class_name, stereotype.lower())),
    ]
    for kind, interface_type, callback in ports:
        if kind in (PortKind.PUBLISHER, PortKind.SUBSCRIBER):
            elements.append(CanonicalElement(kind=MetricElementKind.MESSAGE_TYPE, key=(class_name, interface_type)))
            if kind == PortKind.SUBSCRIBER and callback:
                elements.append(
                    CanonicalElement(kind=MetricElementKind.CALLBACK_FUNCTION_NAME, key=(class_name, callback))
                )
        else:
            elements.append(CanonicalElement(kind=MetricElementKind.SERVICE_TYPE, key=(class_name, interface_type)))
            if kind == PortKind.SERVICE_SERVER and callback:
                elements.append(
                    CanonicalElement(kind=MetricElementKind.SERVICE_FUNCTION_NAME, key=(class_name, callback))
                )
    return elements


def composed_elements(name: str) -> List[CanonicalElement]:
    return [CanonicalElement(kind=MetricElementKind.COMPOSED_CLASSIFIER_NAME, key=(name,))]


def part_elements(
    composed_name: str,
    node_name: Optional[str],
    namespace: Optional[str],
    classifier_name: str,
    remappings: Sequence[Tuple[str, str]],
) -> List[CanonicalElement]:
    fq_name = fully_qualified_node_name(namespace or "", node_name)
    elements = [
        CanonicalElement(kind=MetricElementKind.NODE_PART_NAME, key=(composed_name, node_name or "")),
        CanonicalElement(kind=MetricElementKind.NODE_PART_CLASSIFIER_REF, key=(fq_name, classifier_name)),
        CanonicalElement(
            kind=MetricElementKind.NODE_PART_NAMESPACE,
            key=(composed_name, node_name or "", canonical_namespace(namespace)),
        ),
    ]
    for source, target in remappings:
        elements.append(CanonicalElement(kind=MetricElementKind.REMAPPING, key=(fq_name, source, target)))
    return elements


def relation_element(
    kind: str,
    resolved_name: str,
    interface_type: str,
    producers: Iterable[str],
    consumers: Iterable[str],
) -> CanonicalElement:
    return CanonicalElement(
        kind=MetricElementKind.COMMUNICATION_RELATION,
        key=(kind, resolved_name, interface_type, tuple(sorted(producers)), tuple(sorted(consumers))),
    )


def to_sets(elements: Iterable[CanonicalElement]) -> ElementSets:
    sets: ElementSets = defaultdict(set)
    for element in elements:
        sets[element.kind].add(element)
    return dict(sets)


def merge_sets(*collections: ElementSets) -> ElementSets:
    merged: ElementSets = defaultdict(set)
    for sets in collections:
        for kind, elements in sets.items():
            merged[kind] |= elements
    return dict(merged)


def classifier_elements(classifier: AtomicRosNodeClassifier) -> List[CanonicalElement]:
    return arc_elements(
        classifier.class_name,
        STEREOTYPE_ATOMIC,
        ((p.kind, p.interface_type, p.callback_name) for p in classifier.ports),
    )


def model_elements(model: ArchitectureModel) -> List[CanonicalElement]:
    """CCD elements of every composed classifier reachable from the root."""
    names = model.classifier_names()
    composed_ids = {c.id for c in model.composed_classifiers}
    parts = {}
    for composed in model.composed_classifiers:
        for part in composed.parts:
            parts[part.instance_id] = part

    elements: List[CanonicalElement] = []
    pending = [model.root_composed_id]
    visited = set()
    while pending:
        current = model.composed(pending.pop(0))
        if current is None or current.id in visited:
            continue
        visited.add(current.id)
        elements.extend(composed_elements(current.name))
        for part in current.parts:
            if part.classifier_ref in composed_ids:
                pending.append(part.classifier_ref)
                continue
            elements.extend(
                part_elements(
                    current.name,
                    part.node_name,
                    part.namespace,
                    names.get(part.classifier_ref, part.classifier_ref),
                    part.remappings,
                )
            )
        for relation in current.relations:
            elements.append(
                relation_element(
                    relation.kind.value,
                    relation.resolved_name,
                    relation.interface_type,
                    (fully_qualified_node_name(parts[i].namespace, parts[i].node_name) for i in relation.producer_instance_ids),
                    (fully_qualified_node_name(parts[i].namespace, parts[i].node_name) for i in relation.consumer_instance_ids),
                )
            )
    return elements
