"""
Reader for the component-diagram dialect written by the synthesizer.

Extraction is keyed on architectural facts (names, stereotypes, typed ports,
parts and relations), never on ordering or layout. Lines that match no rule
are reported as diagnostics.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from app.errors import PlantUMLParseError
from app.models import CanonicalElement, Diagnostic, PortKind, RelationKind, Severity
from app.services.blueprint import (
    STEREOTYPE_ATOMIC,
    STEREOTYPE_COMPOSED,
    STEREOTYPE_PART,
    STEREOTYPE_PLACEHOLDER,
    fully_qualified_node_name,
)
from app.services.canonical import (
    ElementSets,
    arc_elements,
    composed_elements,
    part_elements,
    relation_element,
    to_sets,
)

logger = logging.getLogger(__name__)

COMPONENT_STEREOTYPES = frozenset({STEREOTYPE_ATOMIC, STEREOTYPE_COMPOSED, STEREOTYPE_PART, STEREOTYPE_PLACEHOLDER})
PORT_STEREOTYPES = frozenset(kind.value for kind in PortKind)
RELATION_STEREOTYPES = frozenset(kind.value for kind in RelationKind)

_STEREO = r"(?:\s+<<\s*(?P<stereo>[^>]+?)\s*>>)?"
_COMPONENT = re.compile(r'^component\s+"(?P<label>[^"]*)"\s+as\s+(?P<alias>[\w.]+)' + _STEREO + r"\s*(?P<open>\{)?$")
_PORT = re.compile(r'^(?P<keyword>portin|portout|port)\s+"(?P<label>[^"]*)"\s+as\s+(?P<alias>[\w.]+)' + _STEREO + r"$")
_INTERFACE = re.compile(r'^interface\s+"(?P<label>[^"]*)"\s+as\s+(?P<alias>[\w.]+)' + _STEREO + r"$")
_EDGE = re.compile(r"^(?P<source>[\w.]+)\s+-+>\s+(?P<target>[\w.]+)(?:\s*:.*)?$")
_NOTE = re.compile(r"^note\s+(?:top|bottom|left|right)\s+of\s+(?P<alias>[\w.]+)\s*:(?P<text>.*)$")
_IGNORED = re.compile(r"^(?:@startuml.*|@enduml|'.*|skinparam\b.*|hide\b.*|left to right direction|top to bottom direction|title\b.*)$")

_PORT_LABEL = re.compile(r"^(?P<name>.+?)\s+:\s+(?P<type>\S+)(?:\s+\((?P<callback>[^)]*)\))?$")
_RELATION_LABEL = re.compile(r"^(?P<name>\S+)\s+:\s+(?P<type>\S+)$")


@dataclass
class _Declaration:
    alias: str
    label: str
    stereotype: Optional[str]
    parent: Optional[str]
    line: int
    keyword: str = "component"


@dataclass
class _Document:
    components: Dict[str, _Declaration] = field(default_factory=dict)
    ports: Dict[str, _Declaration] = field(default_factory=dict)
    interfaces: Dict[str, _Declaration] = field(default_factory=dict)
    edges: List[Tuple[str, str, int]] = field(default_factory=list)
    notes: Dict[str, str] = field(default_factory=dict)
    diagnostics: List[Diagnostic] = field(default_factory=list)

    def children(self, alias: str) -> List[_Declaration]:
        return [c for c in self.components.values() if c.parent == alias]


@dataclass
class ParsedModel:
    """Canonical element sets of one PlantUML text plus what could not be read"""

    elements: ElementSets
    diagnostics: List[Diagnostic]

    def count(self) -> int:
        return sum(len(s) for s in self.elements.values())


def _diagnostic(severity: Severity, code: str, message: str, source: Optional[str], line: int) -> Diagnostic:
    location = f"line {line}: " if line else ""
    return Diagnostic(severity=severity, code=code, file=source, message=f"{location}{message}")


def _read(text: str, source: Optional[str]) -> _Document:
    document = _Document()
    stack: List[Tuple[str, int]] = []

    def declare(table: Dict[str, _Declaration], declaration: _Declaration):
        if declaration.alias in document.components or declaration.alias in document.ports or declaration.alias in document.interfaces:
            document.diagnostics.append(
                _diagnostic(Severity.WARNING, "alias-duplicate", f"alias '{declaration.alias}' declared twice", source, declaration.line)
            )
        table[declaration.alias] = declaration

    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or _IGNORED.match(line):
            continue
        parent = stack[-1][0] if stack else None

        if line == "}":
            if not stack:
                raise PlantUMLParseError("closing brace without an open block", number, source)
            stack.pop()
            continue
        match = _COMPONENT.match(line)
        if match:
            declare(
                document.components,
                _Declaration(match["alias"], match["label"], match["stereo"], parent, number),
            )
            if match["open"]:
                stack.append((match["alias"], number))
            continue
        match = _PORT.match(line)
        if match:
            declare(
                document.ports,
                _Declaration(match["alias"], match["label"], match["stereo"], parent, number, match["keyword"]),
            )
            continue
        match = _INTERFACE.match(line)
        if match:
            declare(
                document.interfaces,
                _Declaration(match["alias"], match["label"], match["stereo"], parent, number, "interface"),
            )
            continue
        match = _EDGE.match(line)
        if match:
            document.edges.append((match["source"], match["target"], number))
            continue
        match = _NOTE.match(line)
        if match:
            document.notes[match["alias"]] = match["text"].strip()
            continue
        if line.endswith("{"):
            # an unknown block still has to balance
            stack.append((f"<line {number}>", number))
        document.diagnostics.append(
            _diagnostic(Severity.WARNING, "unrecognized-line", f"unrecognized line: {line}", source, number)
        )

    if stack:
        alias, number = stack[-1]
        raise PlantUMLParseError(f"block '{alias}' is never closed", number, source)
    return document


def _part_fields(label: str) -> Tuple[Optional[str], Dict[str, str], List[Tuple[str, str]]]:
    segments = label.split("\\n")
    node_name = segments[0].strip() or None
    fields: Dict[str, str] = {}
    remappings: List[Tuple[str, str]] = []
    for segment in segments[1:]:
        key, _, value = segment.partition(":")
        key, value = key.strip(), value.strip()
        if key == "remap":
            source, _, target = value.partition("->")
            remappings.append((source.strip(), target.strip()))
        elif key:
            fields[key] = value
    return node_name, fields, remappings


def _elements(document: _Document, source: Optional[str]) -> List[CanonicalElement]:
    elements: List[CanonicalElement] = []

    def warn(code: str, message: str, line: int):
        document.diagnostics.append(_diagnostic(Severity.WARNING, code, message, source, line))

    for component in document.components.values():
        if component.stereotype != STEREOTYPE_ATOMIC:
            continue
        ports = []
        for port in document.ports.values():
            if port.parent != component.alias:
                continue
            match = _PORT_LABEL.match(port.label)
            if not match or port.stereotype not in PORT_STEREOTYPES:
                warn("port-unreadable", f"port '{port.alias}' label or stereotype not understood", port.line)
                continue
            ports.append((PortKind(port.stereotype), match["type"], match["callback"]))
        elements.extend(arc_elements(component.label, component.stereotype, ports))

    fq_names: Dict[str, str] = {}
    for composed in document.components.values():
        if composed.stereotype != STEREOTYPE_COMPOSED:
            continue
        elements.extend(composed_elements(composed.label))
        for part in document.children(composed.alias):
            if part.stereotype != STEREOTYPE_PART:
                continue
            node_name, fields, remappings = _part_fields(part.label)
            fq_names[part.alias] = fully_qualified_node_name(fields.get("namespace", ""), node_name)
            if any(c.stereotype == STEREOTYPE_COMPOSED for c in document.children(part.alias)):
                continue
            classifier = fields.get("classifier")
            if classifier is None:
                warn("part-unreadable", f"part '{part.alias}' has no classifier line", part.line)
                continue
            elements.extend(
                part_elements(composed.label, node_name, fields.get("namespace"), classifier, remappings)
            )

    for interface in document.interfaces.values():
        match = _RELATION_LABEL.match(interface.label)
        if not match or interface.stereotype not in RELATION_STEREOTYPES:
            warn("relation-unreadable", f"interface '{interface.alias}' label or stereotype not understood", interface.line)
            continue
        producers, consumers = [], []
        for edge_source, edge_target, line in document.edges:
            if edge_target == interface.alias:
                producers.append(fq_names.get(edge_source, edge_source))
            elif edge_source == interface.alias:
                consumers.append(fq_names.get(edge_target, edge_target))
        elements.append(relation_element(interface.stereotype, match["name"], match["type"], producers, consumers))
    return elements


def parse_plantuml_model(text: str, source: Optional[str] = None) -> ParsedModel:
    """
    Parse one PlantUML text into canonical element sets per metric kind.

    Raises PlantUMLParseError on unbalanced blocks.
    """
    document = _read(text, source)
    elements = _elements(document, source)
    logger.debug(f"Parsed {len(elements)} elements from {source or 'text'}")
    return ParsedModel(elements=to_sets(elements), diagnostics=document.diagnostics)


def check_blueprint_conformance(text: str, source: Optional[str] = None) -> List[Diagnostic]:
    """Structural constraints of the profile that go beyond readability."""
    document = _read(text, source)
    findings: List[Diagnostic] = []

    def flag(code: str, message: str, line: int):
        findings.append(_diagnostic(Severity.ERROR, code, message, source, line))

    for component in document.components.values():
        if component.stereotype not in COMPONENT_STEREOTYPES:
            flag("stereotype-unknown", f"component '{component.alias}' has stereotype <<{component.stereotype}>>", component.line)
        if component.stereotype == STEREOTYPE_PART:
            parent = document.components.get(component.parent or "")
            if parent is None or parent.stereotype != STEREOTYPE_COMPOSED:
                flag("part-outside-composed", f"part '{component.alias}' is not inside a composed classifier", component.line)
    for port in document.ports.values():
        if port.stereotype not in PORT_STEREOTYPES:
            flag("port-kind-unknown", f"port '{port.alias}' has stereotype <<{port.stereotype}>>", port.line)
        owner = document.components.get(port.parent or "")
        if owner is None or owner.stereotype != STEREOTYPE_ATOMIC:
            flag("port-outside-atomic", f"port '{port.alias}' is not inside an atomic classifier", port.line)
    for interface in document.interfaces.values():
        if interface.stereotype not in RELATION_STEREOTYPES:
            flag("stereotype-unknown", f"interface '{interface.alias}' has stereotype <<{interface.stereotype}>>", interface.line)
    declared = set(document.components) | set(document.interfaces) | set(document.ports)
    for edge_source, edge_target, line in document.edges:
        for alias in (edge_source, edge_target):
            if alias not in declared:
                flag("connector-undeclared", f"connector references undeclared alias '{alias}'", line)
    for alias in document.notes:
        if alias not in declared:
            flag("connector-undeclared", f"note attached to undeclared alias '{alias}'", 0)
    return findings
