"""
Readers for ROS 2 package metadata: package.xml manifests, setuptools entry
points (setup.py / setup.cfg) and CMake build targets.
"""

import ast
import configparser
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

logger = logging.getLogger(__name__)

PYTHON_BUILD_TYPES = frozenset({"ament_python"})
CMAKE_BUILD_TYPES = frozenset({"ament_cmake", "ament_cmake_auto", "ament_cmake_python", "cmake"})


@dataclass
class PackageManifest:
    name: str
    build_type: Optional[str]


@dataclass
class CMakeTarget:
    name: str
    sources: List[str] = field(default_factory=list)
    # set for rclcpp_components registrations: fully-qualified plugin class
    plugin: Optional[str] = None
    library: Optional[str] = None


def read_package_manifest(path: Path) -> PackageManifest:
    """
    Read the package name and declared build type from a package.xml.

    Raises ValueError if the manifest is not well-formed XML or lacks a name.
    """
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as e:
        raise ValueError(f"malformed package manifest: {e}") from e
    if root.tag != "package":
        raise ValueError(f"root element is <{root.tag}>, expected <package>")
    name = (root.findtext("name") or "").strip()
    if not name:
        raise ValueError("package manifest declares no <name>")
    build_type = root.findtext("export/build_type")
    return PackageManifest(name=name, build_type=build_type.strip() if build_type else None)


def _console_scripts(entries) -> Dict[str, str]:
    scripts: Dict[str, str] = {}
    if isinstance(entries, str):
        entries = [line for line in entries.splitlines() if line.strip()]
    for entry in entries or []:
        name, sep, target = str(entry).partition("=")
        if sep and name.strip() and target.strip():
            scripts[name.strip()] = target.strip()
    return scripts


def setup_py_entry_points(source: str) -> Dict[str, str]:
    """
    console_scripts declared in a setup.py, as ``{executable: "module:function"}``.

    Only literal ``entry_points`` arguments (or same-file constants bound to
    literals) are understood. Raises ValueError when the file cannot be parsed.
    """
    try:
        tree = ast.parse(source)
    except SyntaxError as e:
        raise ValueError(f"setup.py is not valid Python: {e}") from e

    constants = {}
    for stmt in tree.body:
        if isinstance(stmt, ast.Assign) and len(stmt.targets) == 1 and isinstance(stmt.targets[0], ast.Name):
            constants[stmt.targets[0].id] = stmt.value

    for node in ast.walk(tree):
        if not isinstance(node, ast.Call):
            continue
        func = node.func
        called = func.id if isinstance(func, ast.Name) else getattr(func, "attr", None)
        if called != "setup":
            continue
        for kw in node.keywords:
            if kw.arg != "entry_points":
                continue
            value = kw.value
            if isinstance(value, ast.Name) and value.id in constants:
                value = constants[value.id]
            try:
                entry_points = ast.literal_eval(value)
            except ValueError as e:
                raise ValueError(f"entry_points is not a literal: {ast.unparse(value)}") from e
            if not isinstance(entry_points, dict):
                raise ValueError("entry_points is not a mapping")
            return _console_scripts(entry_points.get("console_scripts"))
    return {}


def setup_cfg_entry_points(source: str) -> Dict[str, str]:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(source)
    except configparser.Error as e:
        raise ValueError(f"setup.cfg is malformed: {e}") from e
    if not parser.has_option("options.entry_points", "console_scripts"):
        return {}
    return _console_scripts(parser.get("options.entry_points", "console_scripts"))


_CMAKE_QUOTED = r'"(?:\\.|[^"\\])*"'


def _strip_cmake_comments(text: str) -> str:
    return re.sub(_CMAKE_QUOTED + r"|#[^\n]*", lambda m: m.group(0) if m.group(0)[0] == '"' else "", text)


def _skip_quoted(text: str, index: int) -> int:
    """Index just past the quoted argument starting at ``index``; an open quote runs to the end."""
    match = re.compile(_CMAKE_QUOTED).match(text, index)
    return match.end() if match else len(text)


def cmake_commands(text: str) -> List[Tuple[str, List[str]]]:
    """
    Split CMake text into ``(command, arguments)`` pairs. Parentheses and ``#``
    inside quoted arguments are literal text.

    Raises ValueError on unbalanced parentheses.
    """
    text = _strip_cmake_comments(text)
    commands = []
    position = 0
    opener = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*\(")
    while True:
        match = opener.search(text, position)
        if not match:
            break
        depth = 1
        index = match.end()
        while index < len(text) and depth:
            if text[index] == '"':
                index = _skip_quoted(text, index)
                continue
            if text[index] == "(":
                depth += 1
            elif text[index] == ")":
                depth -= 1
            index += 1
        if depth:
            line = text.count("\n", 0, match.start()) + 1
            raise ValueError(f"unbalanced parentheses in {match.group(1)}() starting on line {line}")
        body = text[match.end() : index - 1]
        arguments = [a.strip('"') for a in re.findall(_CMAKE_QUOTED + r'|[^\s()"]+', body)]
        commands.append((match.group(1).lower(), arguments))
        position = index
    if ")" in re.sub(_CMAKE_QUOTED, "", text[position:]):
        line = text.count("\n", 0, position) + 1
        raise ValueError(f"unbalanced ')' after line {line}")
    return commands



def cmake_targets(text: str) -> List[CMakeTarget]:
    """Executables, libraries and component registrations declared in a CMakeLists.txt."""
    variables: Dict[str, str] = {}
    libraries: Dict[str, List[str]] = {}
    targets: List[CMakeTarget] = []

    def expand(value: str) -> str:
        for _ in range(5):
            expanded = re.sub(r"\$\{(\w+)\}", lambda m: variables.get(m.group(1), ""), value)
            if expanded == value:
                break
            value = expanded
        return value

    for command, raw_args in cmake_commands(text):
        args = [expand(a) for a in raw_args]
        if command == "project" and args:
            variables["PROJECT_NAME"] = args[0]
        elif command == "set" and args:
            variables[args[0]] = " ".join(args[1:])
        elif command in ("add_executable", "ament_auto_add_executable") and args:
            sources = [s for a in args[1:] for s in a.split() if not s.isupper()]
            targets.append(CMakeTarget(name=args[0], sources=sources))
        elif command in ("add_library", "ament_auto_add_library") and args:
            libraries[args[0]] = [s for a in args[1:] for s in a.split() if not s.isupper()]
        elif command == "rclcpp_components_register_node" and args:
            options = _keyword_arguments(args[1:], ("PLUGIN", "EXECUTABLE"))
            plugin = options.get("PLUGIN")
            if plugin:
                targets.append(
                    CMakeTarget(
                        name=options.get("EXECUTABLE") or plugin,
                        sources=list(libraries.get(args[0], [])),
                        plugin=plugin,
                        library=args[0],
                    )
                )
        elif command == "rclcpp_components_register_nodes" and args:
            for plugin in args[1:]:
                if plugin.isupper():
                    continue
                targets.append(
                    CMakeTarget(
                        name=plugin,
                        sources=list(libraries.get(args[0], [])),
                        plugin=plugin,
                        library=args[0],
                    )
                )
    return targets


def _keyword_arguments(args: List[str], keywords: Tuple[str, ...]) -> Dict[str, str]:
    options: Dict[str, str] = {}
    current = None
    for arg in args:
        if arg in keywords:
            current = arg
        elif current is not None:
            options.setdefault(current, arg)
            current = None
    return options
