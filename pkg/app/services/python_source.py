"""
Static node detection for rclpy sources.

Nothing here imports or executes repository code; every fact comes from the
module's syntax tree.
"""

import ast
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from app.models import CommunicationPort, Diagnostic, PortKind, Severity
from app.services.blueprint import normalize_interface_type, unique, unresolved_name

logger = logging.getLogger(__name__)

NODE_BASES = frozenset(
    {
        "rclpy.node.Node",
        "rclpy.lifecycle.Node",
        "rclpy.lifecycle.LifecycleNode",
        "rclpy.lifecycle.node.LifecycleNode",
    }
)
NODE_FACTORIES = frozenset({"rclpy.create_node", "rclpy.node.Node"})

# method name -> (kind, type arg, name arg, callback arg); positions and keywords
PORT_FACTORIES: Dict[str, Tuple[PortKind, Tuple[int, str], Tuple[int, str], Optional[Tuple[int, str]]]] = {
    "create_publisher": (PortKind.PUBLISHER, (0, "msg_type"), (1, "topic"), None),
    "create_subscription": (PortKind.SUBSCRIBER, (0, "msg_type"), (1, "topic"), (2, "callback")),
    "create_service": (PortKind.SERVICE_SERVER, (0, "srv_type"), (1, "srv_name"), (2, "callback")),
    "create_client": (PortKind.SERVICE_CLIENT, (0, "srv_type"), (1, "srv_name"), None),
}


@dataclass
class PythonNodeDefinition:
    class_name: str
    node_name: Optional[str]
    ports: List[CommunicationPort]
    lineno: int
    function_style: bool = False


@dataclass
class PythonModuleScan:
    path: str
    module: str
    nodes: List[PythonNodeDefinition] = field(default_factory=list)
    # top-level function name -> names of callables constructed in it
    constructed: Dict[str, List[str]] = field(default_factory=dict)
    diagnostics: List[Diagnostic] = field(default_factory=list)
    parsed: bool = True


def _dotted(expr: ast.AST) -> Optional[str]:
    if isinstance(expr, ast.Name):
        return expr.id
    if isinstance(expr, ast.Attribute):
        head = _dotted(expr.value)
        return f"{head}.{expr.attr}" if head else None
    return None


def _import_table(tree: ast.Module) -> Dict[str, str]:
    table: Dict[str, str] = {}
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            for alias in node.names:
                if alias.asname:
                    table[alias.asname] = alias.name
                else:
                    head = alias.name.split(".")[0]
                    table[head] = head
        elif isinstance(node, ast.ImportFrom):
            prefix = "." * node.level + (node.module or "")
            for alias in node.names:
                if alias.name == "*":
                    continue
                table[alias.asname or alias.name] = f"{prefix}.{alias.name}" if prefix else alias.name
    return table


def _module_constants(body: List[ast.stmt]) -> Dict[str, str]:
    constants: Dict[str, str] = {}
    for stmt in body:
        target, value = None, None
        if isinstance(stmt, ast.Assign) and len(stmt.targets) == 1:
            target, value = stmt.targets[0], stmt.value
        elif isinstance(stmt, ast.AnnAssign) and stmt.value is not None:
            target, value = stmt.target, stmt.value
        if (
            isinstance(target, ast.Name)
            and isinstance(value, ast.Constant)
            and isinstance(value.value, str)
        ):
            constants[target.id] = value.value
    return constants


def _argument(call: ast.Call, position: int, keyword: str) -> Optional[ast.expr]:
    for kw in call.keywords:
        if kw.arg == keyword:
            return kw.value
    positional = [a for a in call.args if not isinstance(a, ast.Starred)]
    if position < len(positional):
        return positional[position]
    return None


def _callback_name(expr: Optional[ast.expr]) -> str:
    if expr is None:
        return "<unresolved>"
    if isinstance(expr, ast.Attribute):
        return expr.attr
    if isinstance(expr, ast.Name):
        return expr.id
    if isinstance(expr, ast.Lambda):
        return "<lambda>"
    if isinstance(expr, ast.Call) and expr.args:
        # functools.partial(self.handler, ...)
        return _callback_name(expr.args[0])
    return ast.unparse(expr)


class _ModuleContext:
    def __init__(self, path: str, tree: ast.Module):
        self.path = path
        self.imports = _import_table(tree)
        self.constants = _module_constants(tree.body)
        self.diagnostics: List[Diagnostic] = []

    def qualify(self, expr: ast.AST) -> Optional[str]:
        dotted = _dotted(expr)
        if dotted is None:
            return None
        head, _, rest = dotted.partition(".")
        origin = self.imports.get(head)
        if origin is None:
            return dotted
        return f"{origin}.{rest}" if rest else origin

    def literal(self, expr: Optional[ast.expr], class_constants: Dict[str, str]) -> Optional[str]:
        if isinstance(expr, ast.Constant) and isinstance(expr.value, str):
            return expr.value
        if isinstance(expr, ast.Name):
            return self.constants.get(expr.id)
        if isinstance(expr, ast.Attribute) and isinstance(expr.value, ast.Name):
            return class_constants.get(expr.attr)
        return None

    def diagnose(self, severity: Severity, code: str, message: str, lineno: int):
        self.diagnostics.append(
            Diagnostic(severity=severity, code=code, file=self.path, message=f"line {lineno}: {message}")
        )

    def port_from_call(
        self, call: ast.Call, class_constants: Dict[str, str]
    ) -> Optional[CommunicationPort]:
        method = call.func.attr if isinstance(call.func, ast.Attribute) else None
        spec = PORT_FACTORIES.get(method or "")
        if spec is None:
            return None
        kind, type_arg, name_arg, callback_arg = spec

        type_expr = _argument(call, *type_arg)
        qualified = self.qualify(type_expr) if type_expr is not None else None
        interface_type = normalize_interface_type(qualified) if qualified else None
        if interface_type is None:
            shown = ast.unparse(type_expr) if type_expr is not None else "<missing>"
            self.diagnose(
                Severity.ERROR,
                "port-type-unresolved",
                f"{method} interface type '{shown}' cannot be resolved to <pkg>/(msg|srv)/<Type>; port dropped",
                call.lineno,
            )
            return None

        name_expr = _argument(call, *name_arg)
        declared = self.literal(name_expr, class_constants)
        if declared is None:
            shown = ast.unparse(name_expr) if name_expr is not None else "<missing>"
            declared = unresolved_name(shown)
            self.diagnose(
                Severity.WARNING,
                "port-name-unresolved",
                f"{method} name '{shown}' is not a string literal or same-file constant",
                call.lineno,
            )

        callback = None
        if callback_arg is not None:
            callback = _callback_name(_argument(call, *callback_arg))

        return CommunicationPort(
            kind=kind,
            interface_type=interface_type,
            declared_name=declared,
            callback_name=callback,
        )


def _port_calls(scope: ast.AST, receiver: Optional[str] = None) -> List[ast.Call]:
    calls = []
    for node in ast.walk(scope):
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Attribute)
            and node.func.attr in PORT_FACTORIES
        ):
            if receiver is not None and _dotted(node.func.value) != receiver:
                continue
            calls.append(node)
    return sorted(calls, key=lambda c: (c.lineno, c.col_offset))


class PythonSourceScanner:
    """Finds rclpy node classes, function-style nodes and their ports in one module"""

    def scan(self, path: str, source: str, module: str = "") -> PythonModuleScan:
        result = PythonModuleScan(path=path, module=module)
        try:
            tree = ast.parse(source, filename=path)
        except (SyntaxError, ValueError) as e:
            result.parsed = False
            result.diagnostics.append(
                Diagnostic(
                    severity=Severity.WARNING,
                    code="source-unparseable",
                    file=path,
                    message=f"Skipped unparseable Python source: {e}",
                )
            )
            return result

        context = _ModuleContext(path, tree)
        classes = [n for n in tree.body if isinstance(n, ast.ClassDef)]
        node_classes = self._node_class_names(classes, context)

        for cls in classes:
            if cls.name not in node_classes:
                continue
            class_constants = _module_constants(cls.body)
            ports = [
                port
                for call in _port_calls(cls)
                if (port := context.port_from_call(call, class_constants)) is not None
            ]
            result.nodes.append(
                PythonNodeDefinition(
                    class_name=cls.name,
                    node_name=self._node_name(cls, node_classes, context, class_constants),
                    ports=unique_ports(ports),
                    lineno=cls.lineno,
                )
            )

        for func in (n for n in tree.body if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef))):
            result.constructed[func.name] = self._constructed_names(func)
            function_node = self._function_node(func, context, module)
            if function_node is not None:
                result.nodes.append(function_node)
                result.constructed[func.name].append(function_node.class_name)

        result.diagnostics.extend(context.diagnostics)
        return result

    def ports_in_source(self, path: str, source: str) -> Tuple[List[CommunicationPort], List[Diagnostic]]:
        """Every statically detectable port creation in a module, in source order."""
        try:
            tree = ast.parse(source, filename=path)
        except (SyntaxError, ValueError) as e:
            return [], [
                Diagnostic(
                    severity=Severity.WARNING,
                    code="source-unparseable",
                    file=path,
                    message=f"Skipped unparseable Python source: {e}",
                )
            ]
        context = _ModuleContext(path, tree)
        class_constants: Dict[str, str] = {}
        for cls in (n for n in tree.body if isinstance(n, ast.ClassDef)):
            class_constants.update(_module_constants(cls.body))
        ports = [
            port
            for call in _port_calls(tree)
            if (port := context.port_from_call(call, class_constants)) is not None
        ]
        return unique_ports(ports), context.diagnostics

    def _node_class_names(self, classes: List[ast.ClassDef], context: _ModuleContext) -> set:
        node_classes: set = set()
        changed = True
        while changed:
            changed = False
            for cls in classes:
                if cls.name in node_classes:
                    continue
                for base in cls.bases:
                    qualified = context.qualify(base)
                    local = _dotted(base)
                    if qualified in NODE_BASES or local in node_classes:
                        node_classes.add(cls.name)
                        changed = True
                        break
        return node_classes

    def _node_name(
        self,
        cls: ast.ClassDef,
        node_classes: set,
        context: _ModuleContext,
        class_constants: Dict[str, str],
    ) -> Optional[str]:
        for node in ast.walk(cls):
            if not (isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute)):
                continue
            if node.func.attr != "__init__":
                continue
            owner = node.func.value
            explicit = False
            if isinstance(owner, ast.Call) and _dotted(owner.func) == "super":
                pass
            elif context.qualify(owner) in NODE_BASES or _dotted(owner) in node_classes:
                explicit = True
            else:
                continue
            name_expr = _argument(node, 1 if explicit else 0, "node_name")
            name = context.literal(name_expr, class_constants)
            if name is None and name_expr is not None:
                context.diagnose(
                    Severity.INFO,
                    "node-name-unresolved",
                    f"{cls.name} node name '{ast.unparse(name_expr)}' is not statically known",
                    node.lineno,
                )
            return name
        return None

    def _constructed_names(self, func: ast.AST) -> List[str]:
        names = []
        for node in ast.walk(func):
            if isinstance(node, ast.Call):
                dotted = _dotted(node.func)
                if dotted:
                    names.append(dotted.split(".")[-1])
        return unique(names)

    def _function_node(
        self, func: ast.AST, context: _ModuleContext, module: str
    ) -> Optional[PythonNodeDefinition]:
        for node in ast.walk(func):
            if not (isinstance(node, ast.Assign) and len(node.targets) == 1):
                continue
            target, value = node.targets[0], node.value
            if not (isinstance(target, ast.Name) and isinstance(value, ast.Call)):
                continue
            if context.qualify(value.func) not in NODE_FACTORIES:
                continue
            name_expr = _argument(value, 0, "node_name")
            ports = [
                port
                for call in _port_calls(func, receiver=target.id)
                if (port := context.port_from_call(call, {})) is not None
            ]
            prefix = f"{module}." if module else ""
            return PythonNodeDefinition(
                class_name=f"{prefix}{func.name}",
                node_name=context.literal(name_expr, {}),
                ports=unique_ports(ports),
                lineno=func.lineno,
                function_style=True,
            )
        return None


def unique_ports(ports: List[CommunicationPort]) -> List[CommunicationPort]:
    seen = []
    for port in ports:
        if port not in seen:
            seen.append(port)
    return seen


python_scanner = PythonSourceScanner()
