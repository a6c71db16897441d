"""
Static node detection for rclcpp sources using tree-sitter syntax trees.

Structure (classes, methods, constructors, calls) comes from the tree; the
leaves of a call (template argument, string literals, bound member pointers)
are read from node text.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import tree_sitter_cpp
from tree_sitter import Language, Node, Parser

from app.models import CommunicationPort, Diagnostic, PortKind, Severity
from app.services.blueprint import normalize_interface_type, unresolved_name

logger = logging.getLogger(__name__)

CPP_LANGUAGE = Language(tree_sitter_cpp.language())

HEADER_SUFFIXES = (".h", ".hh", ".hpp", ".hxx")
SOURCE_SUFFIXES = (".cc", ".cpp", ".cxx")

_NODE_BASE = re.compile(r"\b(?:rclcpp::)?Node\b|\b(?:rclcpp_lifecycle::)?LifecycleNode\b")
_NODE_INIT = re.compile(r"\b(?:\w+::)*(?:Node|LifecycleNode)\s*\(\s*([^,)]+)")
_PORT_CALL = re.compile(r"create_(publisher|subscription|service|client)\s*<\s*(.+?)\s*>\s*$", re.S)
_MEMBER_POINTER = re.compile(r"&\s*(?:[A-Za-z_]\w*::)*([A-Za-z_]\w*)")
_MAKE_SHARED = re.compile(r"make_(?:shared|unique)\s*<\s*((?:\w+::)*\w+)\s*>")
_STRING = re.compile(r'^"((?:[^"\\]|\\.)*)"$')

_PORT_KINDS = {
    "publisher": PortKind.PUBLISHER,
    "subscription": PortKind.SUBSCRIBER,
    "service": PortKind.SERVICE_SERVER,
    "client": PortKind.SERVICE_CLIENT,
}
# kind -> (name argument index, callback argument index)
_PORT_ARGS = {
    PortKind.PUBLISHER: (0, None),
    PortKind.SUBSCRIBER: (0, 2),
    PortKind.SERVICE_SERVER: (0, 1),
    PortKind.SERVICE_CLIENT: (0, None),
}


@dataclass
class CppFileScan:
    path: str
    node_classes: Set[str] = field(default_factory=set)
    # every class that has a declaration or a method definition in this file
    classes_present: Set[str] = field(default_factory=set)
    node_names: Dict[str, str] = field(default_factory=dict)
    ports: Dict[str, List[Tuple[int, CommunicationPort]]] = field(default_factory=dict)
    main_constructs: List[str] = field(default_factory=list)
    diagnostics: List[Diagnostic] = field(default_factory=list)
    parsed: bool = True

    @property
    def is_header(self) -> bool:
        return self.path.endswith(HEADER_SUFFIXES)


def _text(node: Optional[Node]) -> str:
    return node.text.decode("utf-8", errors="replace") if node is not None else ""


def _arguments(call: Node) -> List[Node]:
    args = call.child_by_field_name("arguments")
    if args is None:
        return []
    return [c for c in args.named_children if c.type != "comment"]


def _function_name(function: Node) -> str:
    declarator = function.child_by_field_name("declarator")
    while declarator is not None and declarator.type != "function_declarator":
        declarator = declarator.child_by_field_name("declarator")
    if declarator is None:
        return ""
    return _text(declarator.child_by_field_name("declarator")).replace(" ", "")


class CppSourceScanner:
    """Finds rclcpp node classes, their node names, ports and main() instantiations"""

    def scan(self, path: str, source: str) -> CppFileScan:
        result = CppFileScan(path=path)
        parser = Parser(CPP_LANGUAGE)
        try:
            tree = parser.parse(source.encode("utf-8"))
        except Exception as e:
            result.parsed = False
            result.diagnostics.append(
                Diagnostic(
                    severity=Severity.WARNING,
                    code="source-unparseable",
                    file=path,
                    message=f"Skipped unparseable C++ source: {e}",
                )
            )
            return result
        if tree.root_node.has_error:
            result.diagnostics.append(
                Diagnostic(
                    severity=Severity.INFO,
                    code="source-partial-parse",
                    file=path,
                    message="Syntax tree contains errors; extraction is best effort",
                )
            )
        self._visit(tree.root_node, None, source, result)
        return result

    def ports_in_source(self, path: str, source: str) -> Tuple[List[CommunicationPort], List[Diagnostic]]:
        scan = self.scan(path, source)
        collected = sorted(
            ((position, port) for ports in scan.ports.values() for position, port in ports),
            key=lambda item: item[0],
        )
        return [port for _, port in collected], scan.diagnostics

    def _visit(self, node: Node, current_class: Optional[str], source: str, result: CppFileScan):
        if node.type in ("class_specifier", "struct_specifier"):
            name = _text(node.child_by_field_name("name"))
            body = node.child_by_field_name("body")
            if name and body is not None:
                result.classes_present.add(name)
                bases = next((c for c in node.children if c.type == "base_class_clause"), None)
                if bases is not None and _NODE_BASE.search(_text(bases)):
                    result.node_classes.add(name)
                for child in body.children:
                    self._visit(child, name, source, result)
                return

        if node.type == "function_definition":
            self._visit_function(node, current_class, source, result)
            return

        for child in node.children:
            self._visit(child, current_class, source, result)

    def _visit_function(self, function: Node, current_class: Optional[str], source: str, result: CppFileScan):
        qualified = _function_name(function)
        components = qualified.split("::")
        short = components[-1]
        owner = components[-2] if len(components) > 1 else current_class
        if owner:
            result.classes_present.add(owner)

        if owner and short == owner:
            initializers = next((c for c in function.children if c.type == "field_initializer_list"), None)
            if initializers is not None:
                match = _NODE_INIT.search(_text(initializers))
                if match:
                    name = self._string_value(match.group(1).strip(), source)
                    if name is not None:
                        result.node_names[owner] = name
                    else:
                        result.diagnostics.append(
                            Diagnostic(
                                severity=Severity.INFO,
                                code="node-name-unresolved",
                                file=result.path,
                                message=f"{owner} node name '{match.group(1).strip()}' is not statically known",
                            )
                        )

        if short == "main" and owner is None:
            body = _text(function.child_by_field_name("body"))
            for match in _MAKE_SHARED.finditer(body):
                result.main_constructs.append(match.group(1).split("::")[-1])

        body = function.child_by_field_name("body")
        if body is None:
            return
        for call in self._calls(body):
            port = self._port(call, source, result)
            if port is not None:
                result.ports.setdefault(owner or "", []).append((call.start_byte, port))

    def _calls(self, node: Node) -> List[Node]:
        found = []
        stack = [node]
        while stack:
            current = stack.pop()
            if current.type == "call_expression":
                found.append(current)
            stack.extend(reversed(current.children))
        return found

    def _port(self, call: Node, source: str, result: CppFileScan) -> Optional[CommunicationPort]:
        function_text = _text(call.child_by_field_name("function"))
        match = _PORT_CALL.search(function_text)
        if not match:
            return None
        kind = _PORT_KINDS[match.group(1)]
        line = call.start_point[0] + 1
        type_text = re.sub(r"\bconst\b|\s+", "", match.group(2))
        interface_type = normalize_interface_type(type_text)
        if interface_type is None:
            result.diagnostics.append(
                Diagnostic(
                    severity=Severity.ERROR,
                    code="port-type-unresolved",
                    file=result.path,
                    message=f"line {line}: interface type '{type_text}' cannot be resolved; port dropped",
                )
            )
            return None

        args = _arguments(call)
        name_index, callback_index = _PORT_ARGS[kind]
        name_node = args[name_index] if name_index < len(args) else None
        declared = self._string_value(_text(name_node), source) if name_node is not None else None
        if declared is None:
            shown = _text(name_node) or "<missing>"
            declared = unresolved_name(shown)
            result.diagnostics.append(
                Diagnostic(
                    severity=Severity.WARNING,
                    code="port-name-unresolved",
                    file=result.path,
                    message=f"line {line}: name '{shown}' is not a string literal or same-file constant",
                )
            )

        callback = None
        if callback_index is not None:
            callback_node = args[callback_index] if callback_index < len(args) else None
            callback = self._callback_name(callback_node)

        return CommunicationPort(
            kind=kind,
            interface_type=interface_type,
            declared_name=declared,
            callback_name=callback,
        )

    def _callback_name(self, node: Optional[Node]) -> str:
        if node is None:
            return "<unresolved>"
        if node.type == "lambda_expression":
            return "<lambda>"
        text = _text(node)
        if node.type == "identifier":
            return text
        match = _MEMBER_POINTER.search(text)
        if match:
            return match.group(1)
        return text

    def _string_value(self, text: str, source: str) -> Optional[str]:
        """Resolve a literal or a same-file ``name = "literal"`` constant."""
        match = _STRING.match(text)
        if match:
            return match.group(1)
        if re.fullmatch(r"[A-Za-z_]\w*", text):
            constant = re.search(
                rf"\b{re.escape(text)}\s*(?:\[\s*\])?\s*(?:=|\{{)\s*\"((?:[^\"\\]|\\.)*)\"",
                source,
            )
            if constant:
                return constant.group(1)
        return None


cpp_scanner = CppSourceScanner()
