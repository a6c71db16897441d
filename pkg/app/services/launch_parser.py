"""
Static readers for ROS 2 launch files (Python, XML and YAML frontends).

Launch files are never executed. Each frontend produces the same small action
tree; substitutions (launch arguments, package share paths, the launch file
directory) are kept symbolic and resolved later by the analyzer, once the
include chain has supplied argument values.
"""

import ast
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml

from app.models import Diagnostic, LaunchFormat, Severity

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Symbolic text
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ArgumentRef:
    name: str
    default: Optional["Text"] = None


@dataclass(frozen=True)
class PackageShareRef:
    package: str


@dataclass(frozen=True)
class ThisDirRef:
    pass


@dataclass(frozen=True)
class UnknownRef:
    expression: str


Part = Union[str, ArgumentRef, PackageShareRef, ThisDirRef, UnknownRef]


@dataclass(frozen=True)
class Text:
    """Concatenation of literal strings and substitutions"""

    parts: Tuple[Part, ...] = ()

    def __add__(self, other: "Text") -> "Text":
        return Text(self.parts + other.parts)

    @property
    def is_literal(self) -> bool:
        return all(isinstance(p, str) for p in self.parts)

    def render(self) -> str:
        """Human-readable form with substitutions spelled in frontend syntax."""
        rendered = []
        for part in self.parts:
            if isinstance(part, str):
                rendered.append(part)
            elif isinstance(part, ArgumentRef):
                rendered.append(f"$(var {part.name})")
            elif isinstance(part, PackageShareRef):
                rendered.append(f"$(find-pkg-share {part.package})")
            elif isinstance(part, ThisDirRef):
                rendered.append("$(dirname)")
            else:
                rendered.append(f"<unresolved:{part.expression}>")
        return "".join(rendered)


def literal(value: str) -> Text:
    return Text((value,))


def join_path(texts: List[Text]) -> Text:
    parts: Tuple[Part, ...] = ()
    for index, text in enumerate(texts):
        if index:
            parts += ("/",)
        parts += text.parts
    return Text(parts)


@dataclass
class ResolutionContext:
    """Values needed to turn symbolic text into a concrete string"""

    arguments: Dict[str, Optional[str]]
    this_dir: str
    package_roots: Dict[str, str]


def resolve_text(text: Optional[Text], context: ResolutionContext) -> Optional[str]:
    """Concrete value of ``text`` or None when any substitution is unknown."""
    if text is None:
        return None
    resolved = []
    for part in text.parts:
        if isinstance(part, str):
            resolved.append(part)
        elif isinstance(part, ArgumentRef):
            value = context.arguments.get(part.name)
            if value is None and part.default is not None:
                value = resolve_text(part.default, context)
            if value is None:
                return None
            resolved.append(value)
        elif isinstance(part, PackageShareRef):
            root = context.package_roots.get(part.package)
            if root is None:
                return None
            resolved.append(root)
        elif isinstance(part, ThisDirRef):
            resolved.append(context.this_dir)
        else:
            return None
    return "".join(resolved)


# ---------------------------------------------------------------------------
# Actions
# ---------------------------------------------------------------------------


@dataclass
class NodeAction:
    package: Optional[Text]
    executable: Optional[Text]
    name: Optional[Text] = None
    namespace: Optional[Text] = None
    remappings: List[Tuple[Text, Text]] = field(default_factory=list)
    parameters: List[Text] = field(default_factory=list)
    plugin: Optional[Text] = None
    condition: Optional[str] = None
    line: int = 0


@dataclass
class IncludeAction:
    path: Optional[Text]
    arguments: List[Tuple[str, Text]] = field(default_factory=list)
    condition: Optional[str] = None
    line: int = 0


@dataclass
class GroupAction:
    actions: List[Any] = field(default_factory=list)
    scoped: bool = True
    condition: Optional[str] = None
    line: int = 0


@dataclass
class PushNamespaceAction:
    namespace: Text
    line: int = 0


@dataclass
class SetRemapAction:
    source: Text
    target: Text
    line: int = 0


@dataclass
class DeclareArgumentAction:
    name: str
    default: Optional[Text] = None
    line: int = 0


@dataclass
class UnresolvedAction:
    description: str
    line: int = 0


@dataclass
class ParsedLaunchFile:
    path: str
    format: LaunchFormat
    actions: List[Any] = field(default_factory=list)
    diagnostics: List[Diagnostic] = field(default_factory=list)

    def declared_arguments(self) -> List[DeclareArgumentAction]:
        found = []

        def walk(actions):
            for action in actions:
                if isinstance(action, DeclareArgumentAction):
                    found.append(action)
                elif isinstance(action, GroupAction):
                    walk(action.actions)

        walk(self.actions)
        return found


def infer_format(path: Path) -> LaunchFormat:
    suffix = path.suffix.lower()
    if suffix == ".py":
        return LaunchFormat.SCRIPT
    if suffix == ".xml":
        return LaunchFormat.XML
    if suffix in (".yaml", ".yml"):
        return LaunchFormat.YAML
    raise ValueError(f"Cannot infer launch format of '{path.name}'")


# ---------------------------------------------------------------------------
# Python launch descriptions
# ---------------------------------------------------------------------------


@dataclass
class _LaunchDescriptionValue:
    actions: List[Any]


@dataclass
class _Condition:
    text: str


_PUSH_NAMESPACE = frozenset({"PushRosNamespace", "PushROSNamespace"})
_SOURCES = frozenset(
    {
        "PythonLaunchDescriptionSource",
        "AnyLaunchDescriptionSource",
        "XMLLaunchDescriptionSource",
        "YAMLLaunchDescriptionSource",
        "FrontendLaunchDescriptionSource",
    }
)
_CONTAINERS = frozenset({"ComposableNodeContainer", "LoadComposableNodes"})
_IGNORED = frozenset(
    {
        "SetParameter",
        "SetParametersFromFile",
        "SetEnvironmentVariable",
        "UnsetEnvironmentVariable",
        "LogInfo",
        "ExecuteProcess",
        "RegisterEventHandler",
        "SetLaunchConfiguration",
        "SetUseSimTime",
    }
)


def _callee(call: ast.Call) -> str:
    func = call.func
    if isinstance(func, ast.Name):
        return func.id
    if isinstance(func, ast.Attribute):
        return func.attr
    return ""


class _PythonLaunchEvaluator:
    """Evaluates the declarative subset of a generate_launch_description()"""

    def __init__(self, path: str, tree: ast.Module):
        self.path = path
        self.tree = tree
        self.env: Dict[str, Any] = {}
        self.diagnostics: List[Diagnostic] = []

    def diagnose(self, severity: Severity, code: str, message: str, line: int):
        self.diagnostics.append(
            Diagnostic(severity=severity, code=code, file=self.path, message=f"line {line}: {message}")
        )

    def run(self) -> List[Any]:
        self._execute(self.tree.body, top_level=True)
        function = next(
            (
                n
                for n in self.tree.body
                if isinstance(n, ast.FunctionDef) and n.name == "generate_launch_description"
            ),
            None,
        )
        if function is None:
            self.diagnose(
                Severity.WARNING,
                "launch-entry-missing",
                "no generate_launch_description() function",
                1,
            )
            return []
        result = self._execute(function.body, top_level=False)
        return self._actions_of(result, function.lineno)

    def _actions_of(self, value: Any, line: int) -> List[Any]:
        if isinstance(value, _LaunchDescriptionValue):
            return value.actions
        if isinstance(value, list):
            return value
        if value is not None:
            self.diagnose(
                Severity.WARNING,
                "launch-unresolved",
                "launch description is not built from a literal LaunchDescription",
                line,
            )
        return []

    def _execute(self, body: List[ast.stmt], top_level: bool) -> Any:
        for stmt in body:
            if isinstance(stmt, ast.Return):
                return self._eval(stmt.value) if stmt.value is not None else None
            if isinstance(stmt, ast.Assign):
                value = self._eval(stmt.value)
                for target in stmt.targets:
                    if isinstance(target, ast.Name):
                        self.env[target.id] = value
            elif isinstance(stmt, ast.AnnAssign) and stmt.value is not None:
                if isinstance(stmt.target, ast.Name):
                    self.env[stmt.target.id] = self._eval(stmt.value)
            elif isinstance(stmt, ast.AugAssign) and isinstance(stmt.target, ast.Name):
                current = self.env.get(stmt.target.id)
                value = self._eval(stmt.value)
                if isinstance(current, list) and isinstance(value, list):
                    current.extend(value)
            elif isinstance(stmt, ast.Expr) and isinstance(stmt.value, ast.Call):
                self._method_call(stmt.value)
            elif isinstance(stmt, (ast.Import, ast.ImportFrom, ast.FunctionDef, ast.ClassDef, ast.Pass)):
                continue
            elif isinstance(stmt, ast.Expr):
                continue
            elif not top_level:
                self.diagnose(
                    Severity.WARNING,
                    "launch-unresolved",
                    f"dynamic construct '{type(stmt).__name__.lower()}' is not interpreted",
                    stmt.lineno,
                )
        return None

    def _method_call(self, call: ast.Call):
        func = call.func
        if not (isinstance(func, ast.Attribute) and isinstance(func.value, ast.Name)):
            return
        target = self.env.get(func.value.id)
        args = [self._eval(a) for a in call.args]
        if isinstance(target, _LaunchDescriptionValue) and func.attr in ("add_action", "add_entity"):
            target.actions.extend(args)
        elif isinstance(target, list) and func.attr == "append":
            target.extend(args)
        elif isinstance(target, list) and func.attr == "extend" and args and isinstance(args[0], list):
            target.extend(args[0])

    def _text(self, value: Any) -> Optional[Text]:
        if value is None:
            return None
        if isinstance(value, Text):
            return value
        if isinstance(value, str):
            return literal(value)
        if isinstance(value, (ArgumentRef, PackageShareRef, ThisDirRef, UnknownRef)):
            return Text((value,))
        if isinstance(value, list):
            texts = [self._text(v) for v in value]
            return Text(tuple(p for t in texts if t is not None for p in t.parts))
        if isinstance(value, (bool, int, float)):
            return literal(str(value).lower() if isinstance(value, bool) else str(value))
        return Text((UnknownRef(type(value).__name__),))

    def _kw(self, call: ast.Call, *names: str, position: Optional[int] = None) -> Any:
        for kw in call.keywords:
            if kw.arg in names:
                return self._eval(kw.value)
        if position is not None and position < len(call.args):
            return self._eval(call.args[position])
        return None

    def _condition(self, call: ast.Call) -> Optional[str]:
        for kw in call.keywords:
            if kw.arg == "condition":
                return ast.unparse(kw.value)
        return None

    def _eval(self, expr: ast.expr) -> Any:
        if isinstance(expr, ast.Constant):
            return expr.value
        if isinstance(expr, ast.JoinedStr):
            parts: Tuple[Part, ...] = ()
            for value in expr.values:
                inner = value.value if isinstance(value, ast.FormattedValue) else value
                text = self._text(self._eval(inner))
                parts += text.parts if text is not None else ()
            return Text(parts)
        if isinstance(expr, ast.Name):
            if expr.id in self.env:
                return self.env[expr.id]
            return UnknownRef(expr.id)
        if isinstance(expr, (ast.List, ast.Tuple)):
            items: List[Any] = []
            for element in expr.elts:
                if isinstance(element, ast.Starred):
                    value = self._eval(element.value)
                    if isinstance(value, list):
                        items.extend(value)
                    continue
                items.append(self._eval(element))
            return items
        if isinstance(expr, ast.Dict):
            return {
                self._key(k): self._eval(v) for k, v in zip(expr.keys, expr.values) if k is not None
            }
        if isinstance(expr, ast.BinOp) and isinstance(expr.op, ast.Add):
            left, right = self._eval(expr.left), self._eval(expr.right)
            if isinstance(left, list) and isinstance(right, list):
                return left + right
            left_text, right_text = self._text(left), self._text(right)
            if left_text is None or right_text is None:
                self.diagnose(
                    Severity.WARNING,
                    "launch-unresolved",
                    f"expression '{ast.unparse(expr)}' has an operand with no static value",
                    expr.lineno,
                )
                return UnknownRef(ast.unparse(expr))
            return left_text + right_text
        if isinstance(expr, ast.Call):
            return self._call(expr)
        return UnknownRef(ast.unparse(expr))

    def _key(self, expr: ast.expr) -> str:
        value = self._eval(expr)
        text = self._text(value)
        return text.render() if text is not None else ast.unparse(expr)

    def _call(self, call: ast.Call) -> Any:
        name = _callee(call)
        line = call.lineno

        if isinstance(call.func, ast.Attribute) and call.func.attr == "items":
            mapping = self._eval(call.func.value)
            if isinstance(mapping, dict):
                return [[k, v] for k, v in mapping.items()]
            return UnknownRef(ast.unparse(call))

        if name == "LaunchDescription":
            actions = self._kw(call, "initial_entities", position=0)
            return _LaunchDescriptionValue(list(actions) if isinstance(actions, list) else [])

        if name == "Node":
            return NodeAction(
                package=self._text(self._kw(call, "package")),
                executable=self._text(self._kw(call, "executable", "node_executable")),
                name=self._text(self._kw(call, "name", "node_name")),
                namespace=self._text(self._kw(call, "namespace", "node_namespace")),
                remappings=self._remappings(self._kw(call, "remappings")),
                parameters=self._parameter_files(self._kw(call, "parameters")),
                condition=self._condition(call),
                line=line,
            )

        if name == "ComposableNode":
            plugin = self._text(self._kw(call, "plugin"))
            return NodeAction(
                package=self._text(self._kw(call, "package")),
                executable=plugin,
                plugin=plugin,
                name=self._text(self._kw(call, "name")),
                namespace=self._text(self._kw(call, "namespace")),
                remappings=self._remappings(self._kw(call, "remappings")),
                parameters=self._parameter_files(self._kw(call, "parameters")),
                condition=self._condition(call),
                line=line,
            )

        if name in _CONTAINERS:
            nodes = self._kw(call, "composable_node_descriptions")
            return GroupAction(
                actions=[n for n in nodes if isinstance(n, NodeAction)] if isinstance(nodes, list) else [],
                scoped=False,
                condition=self._condition(call),
                line=line,
            )

        if name == "IncludeLaunchDescription":
            source = self._kw(call, "launch_description_source", position=0)
            arguments = self._kw(call, "launch_arguments") or []
            pairs = []
            if isinstance(arguments, dict):
                arguments = list(arguments.items())
            if isinstance(arguments, list):
                for item in arguments:
                    if isinstance(item, (list, tuple)) and len(item) == 2:
                        key = self._text(item[0])
                        pairs.append((key.render() if key else "", self._text(item[1]) or literal("")))
            return IncludeAction(
                path=self._text(source),
                arguments=pairs,
                condition=self._condition(call),
                line=line,
            )

        if name in _SOURCES:
            return self._text(self._kw(call, "launch_file_path", position=0))

        if name in ("GroupAction", "TimerAction"):
            actions = self._kw(call, "actions", position=0 if name == "GroupAction" else 1)
            scoped = self._kw(call, "scoped")
            return GroupAction(
                actions=actions if isinstance(actions, list) else [],
                scoped=(scoped is not False) if name == "GroupAction" else False,
                condition=self._condition(call),
                line=line,
            )

        if name in _PUSH_NAMESPACE:
            return PushNamespaceAction(
                namespace=self._text(self._kw(call, "namespace", position=0)) or literal(""), line=line
            )

        if name == "SetRemap":
            return SetRemapAction(
                source=self._text(self._kw(call, "src", position=0)) or literal(""),
                target=self._text(self._kw(call, "dst", position=1)) or literal(""),
                line=line,
            )

        if name == "DeclareLaunchArgument":
            arg_name = self._kw(call, "name", position=0)
            return DeclareArgumentAction(
                name=arg_name if isinstance(arg_name, str) else ast.unparse(call.args[0]) if call.args else "",
                default=self._text(self._kw(call, "default_value")),
                line=line,
            )

        if name == "LaunchConfiguration":
            arg_name = self._kw(call, "variable_name", position=0)
            default = self._kw(call, "default")
            if not isinstance(arg_name, str):
                return UnknownRef(ast.unparse(call))
            return ArgumentRef(arg_name, self._text(default))

        if name == "TextSubstitution":
            return self._text(self._kw(call, "text", position=0))

        if name == "join" and isinstance(call.func, ast.Attribute) and isinstance(call.func.value, ast.Constant):
            return UnknownRef(ast.unparse(call))

        if name in ("PathJoinSubstitution", "join"):
            values = self._eval(call.args[0]) if name == "PathJoinSubstitution" and call.args else None
            if name == "join":
                values = [self._eval(a) for a in call.args]
            if not isinstance(values, list):
                return UnknownRef(ast.unparse(call))
            return join_path([self._text(v) or literal("") for v in values])

        if name in ("FindPackageShare", "get_package_share_directory"):
            package = self._kw(call, "package", "package_name", position=0)
            if isinstance(package, str):
                return PackageShareRef(package)
            return UnknownRef(ast.unparse(call))

        if name == "ThisLaunchFileDir":
            return ThisDirRef()

        if name in ("IfCondition", "UnlessCondition", "LaunchConfigurationEquals", "LaunchConfigurationNotEquals"):
            return _Condition(ast.unparse(call))

        if name == "OpaqueFunction":
            return UnresolvedAction("OpaqueFunction", line)

        if name in _IGNORED:
            return None

        return UnknownRef(ast.unparse(call))

    def _remappings(self, value: Any) -> List[Tuple[Text, Text]]:
        rules = []
        if isinstance(value, list):
            for item in value:
                if isinstance(item, (list, tuple)) and len(item) == 2:
                    rules.append((self._text(item[0]) or literal(""), self._text(item[1]) or literal("")))
        return rules

    def _parameter_files(self, value: Any) -> List[Text]:
        files = []
        if isinstance(value, list):
            for item in value:
                if isinstance(item, dict):
                    continue
                text = self._text(item)
                if text is not None:
                    files.append(text)
        return files


def parse_python_launch(path: str, source: str) -> ParsedLaunchFile:
    result = ParsedLaunchFile(path=path, format=LaunchFormat.SCRIPT)
    try:
        tree = ast.parse(source, filename=path)
    except (SyntaxError, ValueError) as e:
        result.diagnostics.append(
            Diagnostic(
                severity=Severity.WARNING,
                code="launch-unparseable",
                file=path,
                message=f"Skipped unparseable launch file: {e}",
            )
        )
        return result
    evaluator = _PythonLaunchEvaluator(path, tree)
    result.actions = evaluator.run()
    result.diagnostics.extend(evaluator.diagnostics)
    return result


# ---------------------------------------------------------------------------
# XML and YAML frontends
# ---------------------------------------------------------------------------

_SUBSTITUTION = re.compile(r"\$\(\s*([\w-]+)\s*([^)]*)\)")


def frontend_text(value: Optional[str]) -> Optional[Text]:
    """Parse ``$(var x)``, ``$(find-pkg-share p)`` and ``$(dirname)`` substitutions."""
    if value is None:
        return None
    parts: List[Part] = []
    position = 0
    for match in _SUBSTITUTION.finditer(value):
        if match.start() > position:
            parts.append(value[position : match.start()])
        kind, argument = match.group(1), match.group(2).strip()
        if kind == "var":
            parts.append(ArgumentRef(argument))
        elif kind == "find-pkg-share":
            parts.append(PackageShareRef(argument))
        elif kind == "dirname":
            parts.append(ThisDirRef())
        else:
            parts.append(UnknownRef(match.group(0)))
        position = match.end()
    if position < len(value):
        parts.append(value[position:])
    return Text(tuple(parts))


@dataclass
class _Element:
    tag: str
    attributes: Dict[str, str]
    children: List["_Element"]
    line: int = 0


def _from_xml(element: ET.Element) -> _Element:
    return _Element(
        tag=element.tag.replace("-", "_"),
        attributes={k: v for k, v in element.attrib.items()},
        children=[_from_xml(child) for child in element],
    )


_YAML_CHILD_LISTS = ("remap", "param", "arg", "composable_node")


def _from_yaml(entry: Any) -> Optional[_Element]:
    if not isinstance(entry, dict) or len(entry) != 1:
        return None
    tag, body = next(iter(entry.items()))
    tag = str(tag).replace("-", "_")
    if not isinstance(body, dict):
        body = {"namespace": body} if tag == "push_ros_namespace" else {}
    attributes = {
        str(k): str(v).lower() if isinstance(v, bool) else str(v)
        for k, v in body.items()
        if not isinstance(v, (list, dict))
    }
    children = []
    for child in body.get("children", []) or []:
        converted = _from_yaml(child)
        if converted is not None:
            children.append(converted)
    for key in _YAML_CHILD_LISTS:
        for item in body.get(key, []) or []:
            if isinstance(item, dict):
                children.append(
                    _Element(
                        tag=key,
                        attributes={str(k): str(v) for k, v in item.items() if not isinstance(v, (list, dict))},
                        children=[],
                    )
                )
    return _Element(tag=tag, attributes=attributes, children=children)


def _condition_of(element: _Element) -> Optional[str]:
    if "if" in element.attributes:
        return f"if={element.attributes['if']}"
    if "unless" in element.attributes:
        return f"unless={element.attributes['unless']}"
    return None


def _frontend_node(element: _Element, plugin: bool) -> NodeAction:
    attrs = element.attributes
    remappings = [
        (frontend_text(c.attributes.get("from")) or literal(""), frontend_text(c.attributes.get("to")) or literal(""))
        for c in element.children
        if c.tag == "remap"
    ]
    parameters = [frontend_text(c.attributes["from"]) for c in element.children if c.tag == "param" and "from" in c.attributes]
    executable = frontend_text(attrs.get("plugin") if plugin else attrs.get("exec", attrs.get("executable")))
    return NodeAction(
        package=frontend_text(attrs.get("pkg", attrs.get("package"))),
        executable=executable,
        plugin=executable if plugin else None,
        name=frontend_text(attrs.get("name")),
        namespace=frontend_text(attrs.get("namespace", attrs.get("ns"))),
        remappings=remappings,
        parameters=[p for p in parameters if p is not None],
        condition=_condition_of(element),
        line=element.line,
    )


def _frontend_actions(elements: List[_Element], path: str, diagnostics: List[Diagnostic]) -> List[Any]:
    actions: List[Any] = []
    for element in elements:
        tag, attrs = element.tag, element.attributes
        if tag == "node":
            actions.append(_frontend_node(element, plugin=False))
        elif tag in ("node_container", "load_composable_node"):
            actions.append(
                GroupAction(
                    actions=[_frontend_node(c, plugin=True) for c in element.children if c.tag == "composable_node"],
                    scoped=False,
                    condition=_condition_of(element),
                )
            )
        elif tag == "include":
            actions.append(
                IncludeAction(
                    path=frontend_text(attrs.get("file")),
                    arguments=[
                        (c.attributes.get("name", ""), frontend_text(c.attributes.get("value", "")) or literal(""))
                        for c in element.children
                        if c.tag == "arg"
                    ],
                    condition=_condition_of(element),
                )
            )
        elif tag == "group":
            children = _frontend_actions(element.children, path, diagnostics)
            namespace = attrs.get("ns", attrs.get("namespace"))
            if namespace:
                children.insert(0, PushNamespaceAction(namespace=frontend_text(namespace)))
            actions.append(
                GroupAction(
                    actions=children,
                    scoped=attrs.get("scoped", "true").lower() != "false",
                    condition=_condition_of(element),
                )
            )
        elif tag == "push_ros_namespace":
            actions.append(PushNamespaceAction(namespace=frontend_text(attrs.get("namespace", "")) or literal("")))
        elif tag == "set_remap":
            actions.append(
                SetRemapAction(
                    source=frontend_text(attrs.get("from", "")) or literal(""),
                    target=frontend_text(attrs.get("to", "")) or literal(""),
                )
            )
        elif tag == "arg":
            actions.append(DeclareArgumentAction(name=attrs.get("name", ""), default=frontend_text(attrs.get("default"))))
        elif tag == "timer":
            actions.append(GroupAction(actions=_frontend_actions(element.children, path, diagnostics), scoped=False))
        elif tag in ("let", "set_parameter", "set_env", "unset_env", "log", "executable", "set_parameters_from_file"):
            continue
        else:
            diagnostics.append(
                Diagnostic(
                    severity=Severity.INFO,
                    code="launch-unrecognized",
                    file=path,
                    message=f"launch element <{tag}> is not interpreted",
                )
            )
    return actions


def parse_xml_launch(path: str, source: str) -> ParsedLaunchFile:
    result = ParsedLaunchFile(path=path, format=LaunchFormat.XML)
    try:
        root = ET.fromstring(source)
    except ET.ParseError as e:
        result.diagnostics.append(
            Diagnostic(severity=Severity.WARNING, code="launch-unparseable", file=path, message=str(e))
        )
        return result
    result.actions = _frontend_actions(_from_xml(root).children, path, result.diagnostics)
    return result


def parse_yaml_launch(path: str, source: str) -> ParsedLaunchFile:
    result = ParsedLaunchFile(path=path, format=LaunchFormat.YAML)
    try:
        document = yaml.safe_load(source) or {}
    except yaml.YAMLError as e:
        result.diagnostics.append(
            Diagnostic(severity=Severity.WARNING, code="launch-unparseable", file=path, message=str(e))
        )
        return result
    entries = document.get("launch", []) if isinstance(document, dict) else []
    elements = [e for e in (_from_yaml(entry) for entry in entries or []) if e is not None]
    result.actions = _frontend_actions(elements, path, result.diagnostics)
    return result


def parse_launch_source(path: str, source: str, launch_format: Optional[LaunchFormat] = None) -> ParsedLaunchFile:
    launch_format = launch_format or infer_format(Path(path))
    if launch_format == LaunchFormat.SCRIPT:
        return parse_python_launch(path, source)
    if launch_format == LaunchFormat.XML:
        return parse_xml_launch(path, source)
    return parse_yaml_launch(path, source)
