"""
ROS 2 name resolution: expand relative and private topic/service names in an
instance's namespace, apply remapping rules, and group the resulting names
into system-level communication relations.
"""

import json
import logging
import re
from collections import Counter
from typing import Dict, List, Optional, Sequence, Tuple

from app.errors import NameResolutionError
from app.models import CommunicationRelation, LinkedInstance, RelationKind, ResolvedName
from app.services.blueprint import id_sort_key, is_unresolved_name, join_namespace
from app.services.diagnostics import DiagnosticsCollector

logger = logging.getLogger(__name__)

_LEGAL = re.compile(r"^[~/]?[A-Za-z0-9_/{}]*$")


def _check(raw: str, instance_id: Optional[str]):
    who = f" (instance {instance_id})" if instance_id else ""
    if not raw:
        raise NameResolutionError(f"Empty name{who}")
    if "//" in raw or not _LEGAL.match(raw) or "~" in raw[1:]:
        raise NameResolutionError(f"Illegal name '{raw}'{who}")


def resolve_name(
    raw: str, namespace: str, node_name: Optional[str], instance_id: Optional[str] = None
) -> ResolvedName:
    """
    Expand ``raw`` to an absolute name.

    ``/x`` stays as is, ``~x`` lands under the node (``/<ns>/<node>/x``) and
    anything else is placed in the namespace. ``{node}`` and ``{ns}`` are
    substituted first.

    Raises NameResolutionError for empty or illegal names.
    """
    _check(raw, instance_id)
    base = join_namespace(namespace)
    expanded = raw
    if "{" in expanded:
        if node_name is not None:
            expanded = expanded.replace("{node}", node_name)
        expanded = expanded.replace("{ns}", base or "/").replace("{namespace}", base or "/")
        if "{" in expanded or "}" in expanded:
            raise NameResolutionError(f"Unknown substitution in '{raw}'")

    if expanded.startswith("/"):
        absolute = join_namespace(expanded)
    elif expanded.startswith("~"):
        if not node_name:
            who = f" (instance {instance_id})" if instance_id else ""
            raise NameResolutionError(f"Private name '{raw}' needs a node name{who}")
        absolute = join_namespace(base, node_name, expanded[1:].lstrip("/"))
    else:
        absolute = join_namespace(base, expanded)

    if not absolute:
        raise NameResolutionError(f"Name '{raw}' resolves to the root namespace")
    return ResolvedName(raw=raw, base_namespace=base, node_name=node_name, absolute=absolute)


def apply_remappings(
    resolved: ResolvedName,
    remappings: Sequence[Tuple[str, str]],
    namespace: str,
    node_name: Optional[str],
    diagnostics: Optional[DiagnosticsCollector] = None,
) -> ResolvedName:
    """
    Rewrite ``resolved`` with the first rule whose source resolves to the same
    absolute name. Outputs are not matched again.
    """
    for source, target in remappings:
        if source.startswith("__"):
            # node-name and namespace overrides (__node, __ns) are not name rules
            continue
        try:
            rule_from = resolve_name(source, namespace, node_name).absolute
            rule_to = resolve_name(target, namespace, node_name).absolute
        except NameResolutionError as e:
            if diagnostics is not None:
                diagnostics.warning("remap-malformed", f"rule {source} -> {target} skipped: {e}")
            continue
        if rule_from == resolved.absolute:
            return resolved.model_copy(update={"absolute": rule_to})
    return resolved


def derive_communication_relations(
    instances: Sequence[LinkedInstance], diagnostics: Optional[DiagnosticsCollector] = None
) -> List[CommunicationRelation]:
    """
    Group every port of every linked instance by ``(kind, absolute name)``.

    Unmatched instances and ports with unresolved names contribute nothing.
    """
    diagnostics = diagnostics or DiagnosticsCollector(stage="resolve")
    groups: Dict[Tuple[RelationKind, str], dict] = {}

    for instance in instances:
        classifier = instance.classifier
        if classifier is None:
            continue
        node_name = instance.node_name or classifier.node_name
        for port in classifier.ports:
            if is_unresolved_name(port.declared_name):
                diagnostics.warning(
                    "relation-name-unresolved",
                    f"{instance.instance_id} {port.kind.value} '{port.declared_name}' excluded from relations",
                )
                continue
            try:
                resolved = resolve_name(port.declared_name, instance.namespace, node_name, instance.instance_id)
            except NameResolutionError as e:
                diagnostics.warning("name-unresolvable", str(e))
                continue
            resolved = apply_remappings(resolved, instance.remappings, instance.namespace, node_name, diagnostics)

            group = groups.setdefault(
                (port.kind.relation_kind, resolved.absolute),
                {"types": Counter(), "producers": [], "consumers": []},
            )
            group["types"][port.interface_type] += 1
            side = group["producers"] if port.kind.is_producer else group["consumers"]
            if instance.instance_id not in side:
                side.append(instance.instance_id)

    relations = []
    for (kind, name), group in sorted(groups.items(), key=lambda item: (item[0][0].value, item[0][1])):
        types: Counter = group["types"]
        interface_type = min(types, key=lambda t: (-types[t], t))
        if len(types) > 1:
            listed = ", ".join(f"{t} x{c}" for t, c in sorted(types.items()))
            diagnostics.warning(
                "relation-type-conflict",
                f"{kind.value} {name} is used with several types ({listed}); recorded as {interface_type}",
            )
        relations.append(
            CommunicationRelation(
                kind=kind,
                resolved_name=name,
                interface_type=interface_type,
                producer_instance_ids=sorted(group["producers"], key=id_sort_key),
                consumer_instance_ids=sorted(group["consumers"], key=id_sort_key),
            )
        )
    logger.info(f"Derived {len(relations)} communication relations")
    return relations


def dump_relations(relations: Sequence[CommunicationRelation]) -> str:
    document = {"relations": [r.model_dump(mode="json") for r in relations]}
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"
