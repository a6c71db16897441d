"""
Launch-graph stage: expand launch include chains into the launch dependency
description (``launch_dependencies.json``) and link node instances
to the atomic classifiers of the node inventory.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx

from app.errors import IncludeCycleError, InputError, ModelValidationError
from app.models import (
    AtomicRosNodeClassifier,
    BuildType,
    CompileType,
    LaunchDependencyDescription,
    LaunchFileEntry,
    LinkedInstance,
    NodeInstanceEntry,
    NodeInventory,
    UnresolvedInclude,
    Violation,
)
from app.services.blueprint import (
    LAUNCH_PREFIX,
    NODE_PREFIX,
    canonical_id,
    id_sort_key,
    join_namespace,
    scope_key,
)
from app.services.diagnostics import DiagnosticsCollector
from app.services.launch_parser import (
    DeclareArgumentAction,
    GroupAction,
    IncludeAction,
    NodeAction,
    ParsedLaunchFile,
    PushNamespaceAction,
    ResolutionContext,
    SetRemapAction,
    Text,
    UnresolvedAction,
    infer_format,
    parse_launch_source,
    resolve_text,
)

logger = logging.getLogger(__name__)

LAUNCH_FILE = "launch_dependencies.json"
LAUNCH_SUFFIXES = (".launch.py", ".launch.xml", ".launch.yaml", ".launch.yml")


@dataclass
class LaunchParseResult:
    """One launch file read on its own, ids local to the file"""

    entry: LaunchFileEntry
    nodes: List[NodeInstanceEntry]
    includes: List[IncludeAction]
    diagnostics: list


@dataclass
class _Scope:
    """Namespace and remapping state while walking one launch file"""

    inherited_namespace: str
    local: List[str] = field(default_factory=list)
    remaps: List[Tuple[str, str]] = field(default_factory=list)

    def copy(self) -> "_Scope":
        return _Scope(self.inherited_namespace, list(self.local), list(self.remaps))

    @property
    def namespace(self) -> str:
        return join_namespace(self.inherited_namespace, *self.local)


@dataclass
class _EntryBuilder:
    id: str
    type: str
    nodes: List[str] = field(default_factory=list)
    included_launch_files: List[str] = field(default_factory=list)
    namespace: Dict[str, List[str]] = field(default_factory=dict)

    def in_scope(self, key: str, instance_id: str):
        if key:
            self.namespace.setdefault(key, []).append(instance_id)

    def build(self) -> LaunchFileEntry:
        return LaunchFileEntry(
            id=self.id,
            type=self.type,
            nodes=self.nodes,
            included_launch_files=self.included_launch_files,
            namespace=self.namespace,
        )


def is_launch_file(path: Path) -> bool:
    name = path.name.lower()
    if name.endswith(LAUNCH_SUFFIXES):
        return True
    if name.startswith("__"):
        return False
    return path.parent.name == "launch" and path.suffix.lower() in (".py", ".xml", ".yaml", ".yml")


class LaunchAnalyzer:
    """Builds the dependency description for a set of root launch files"""

    def __init__(
        self,
        repo_root: str,
        package_roots: Optional[Dict[str, str]] = None,
        diagnostics: Optional[DiagnosticsCollector] = None,
        build_types: Optional[Dict[str, BuildType]] = None,
    ):
        self.repo_root = Path(repo_root)
        # package name -> repo-relative package directory
        self.package_roots = dict(package_roots or {})
        self.build_types = dict(build_types or {})
        self.diagnostics = diagnostics or DiagnosticsCollector(stage="launch-graph")
        self._parsed: Dict[str, ParsedLaunchFile] = {}
        self._launch_ordinal = 0
        self._node_ordinal = 0

    # ------------------------------------------------------------------
    # Parsing
    # ------------------------------------------------------------------

    def _relative(self, path: Path) -> str:
        try:
            return path.resolve().relative_to(self.repo_root.resolve()).as_posix()
        except ValueError:
            return path.as_posix()

    def _parse(self, relative: str) -> ParsedLaunchFile:
        if relative not in self._parsed:
            path = self.repo_root / relative
            source = path.read_text(encoding="utf-8")
            parsed = parse_launch_source(relative, source, infer_format(path))
            self.diagnostics.extend(parsed.diagnostics)
            self._parsed[relative] = parsed
        return self._parsed[relative]

    def _try_parse(self, relative: str) -> Optional[ParsedLaunchFile]:
        """Parse ``relative``; an unreadable file becomes a ``launch-unreadable`` warning."""
        try:
            return self._parse(relative)
        except (OSError, UnicodeDecodeError) as e:
            self.diagnostics.warning("launch-unreadable", f"cannot read launch file: {e}", relative)
            return None

    def parse_launch_file(self, path: str) -> LaunchParseResult:
        """
        Read a single launch file without following its includes.

        Node ids are local (n1, n2, ...) and each include gets its own lf id in
        declaration order after the file's own id.
        """
        relative = self._relative(self.repo_root / path)
        parsed = self._parse(relative)
        self._launch_ordinal = 0
        self._node_ordinal = 0
        builder = self._new_entry(relative)
        nodes: List[NodeInstanceEntry] = []
        includes: List[IncludeAction] = []
        context = self._context(parsed, relative, {})

        def on_include(action: IncludeAction, scope: _Scope) -> Optional[str]:
            includes.append(action)
            return self._next_launch_id()

        self._walk(parsed.actions, context, _Scope(""), builder, nodes, on_include, relative)
        return LaunchParseResult(
            entry=builder.build(), nodes=nodes, includes=includes, diagnostics=list(parsed.diagnostics)
        )

    # ------------------------------------------------------------------
    # Dependency description
    # ------------------------------------------------------------------

    def _next_launch_id(self) -> str:
        self._launch_ordinal += 1
        return canonical_id(LAUNCH_PREFIX, self._launch_ordinal)

    def _next_node_id(self) -> str:
        self._node_ordinal += 1
        return canonical_id(NODE_PREFIX, self._node_ordinal)

    def _new_entry(self, relative: str) -> _EntryBuilder:
        return _EntryBuilder(id=self._next_launch_id(), type=Path(relative).name)

    def _context(self, parsed: ParsedLaunchFile, relative: str, arguments: Dict[str, Optional[str]]) -> ResolutionContext:
        this_dir = Path(relative).parent.as_posix()
        context = ResolutionContext(arguments=dict(arguments), this_dir=this_dir, package_roots=self.package_roots)
        # include arguments win over declared defaults
        for declared in parsed.declared_arguments():
            if declared.name not in context.arguments:
                context.arguments[declared.name] = resolve_text(declared.default, context)
        return context

    def _text(self, text: Optional[Text], context: ResolutionContext, what: str, relative: str) -> Optional[str]:
        if text is None:
            return None
        value = resolve_text(text, context)
        if value is None:
            self.diagnostics.warning(
                "launch-unresolved",
                f"{what} '{text.render()}' depends on a value that is not statically known",
                relative,
            )
        return value

    def _walk(self, actions, context, scope: _Scope, builder: _EntryBuilder, nodes, on_include, relative: str):
        for action in actions:
            if isinstance(action, PushNamespaceAction):
                namespace = self._text(action.namespace, context, "namespace", relative)
                if namespace:
                    scope.local.append(namespace)
            elif isinstance(action, SetRemapAction):
                source = self._text(action.source, context, "remap source", relative)
                target = self._text(action.target, context, "remap target", relative)
                if source and target:
                    scope.remaps.append((source, target))
            elif isinstance(action, GroupAction):
                self._conditional(action.condition, "group", relative)
                inner = scope.copy() if action.scoped else scope
                self._walk(action.actions, context, inner, builder, nodes, on_include, relative)
            elif isinstance(action, NodeAction):
                self._conditional(action.condition, "node", relative)
                own = self._text(action.namespace, context, "node namespace", relative)
                instance = self._node_instance(action, context, scope, own, relative)
                nodes.append(instance)
                builder.nodes.append(instance.id)
                builder.in_scope(scope_key(*scope.local, own), instance.id)
            elif isinstance(action, IncludeAction):
                self._conditional(action.condition, "include", relative)
                child_id = on_include(action, scope)
                if child_id is not None:
                    builder.included_launch_files.append(child_id)
                    builder.in_scope(scope_key(*scope.local), child_id)
            elif isinstance(action, UnresolvedAction):
                self.diagnostics.warning(
                    "launch-unresolved", f"line {action.line}: {action.description} is not interpreted", relative
                )
            elif isinstance(action, DeclareArgumentAction) or action is None:
                continue
            else:
                self.diagnostics.warning(
                    "launch-unresolved", f"launch entity '{type(action).__name__}' is not interpreted", relative
                )

    def _conditional(self, condition: Optional[str], what: str, relative: str):
        if condition:
            self.diagnostics.info("conditional", f"{what} guarded by {condition} is included unconditionally", relative)

    def _node_instance(
        self, action: NodeAction, context, scope: _Scope, own_namespace: Optional[str], relative: str
    ) -> NodeInstanceEntry:
        exec_name = self._text(action.executable, context, "executable", relative)
        remappings = []
        for source, target in action.remappings:
            resolved = (
                self._text(source, context, "remap source", relative),
                self._text(target, context, "remap target", relative),
            )
            if resolved[0] and resolved[1]:
                remappings.append(resolved)
        remappings.extend(scope.remaps)
        parameters = [
            value for value in (self._text(p, context, "parameter file", relative) for p in action.parameters) if value
        ]
        package = self._text(action.package, context, "package", relative)
        return NodeInstanceEntry(
            id=self._next_node_id(),
            node_kind=self._node_kind(action, package),
            exec_name=exec_name or (action.executable.render() if action.executable else "<unresolved>"),
            class_name=None,
            node_name=self._text(action.name, context, "node name", relative),
            namespace=join_namespace(scope.namespace, own_namespace),
            package=package,
            remappings=remappings,
            parameters=parameters,
        )

    def _node_kind(self, action: NodeAction, package: Optional[str]) -> Optional[CompileType]:
        if action.plugin is not None:
            return CompileType.CPP
        # mixed or unknown packages stay open until linking
        return {
            BuildType.PYTHON_PACKAGE: CompileType.PYTHON,
            BuildType.CPP_PACKAGE: CompileType.CPP,
        }.get(self.build_types.get(package))

    def _include_path(self, action: IncludeAction, context: ResolutionContext, relative: str) -> Optional[str]:
        value = resolve_text(action.path, context) if action.path is not None else None
        if value is None:
            return None
        candidates = [Path(value)] if Path(value).is_absolute() else [
            self.repo_root / value,
            self.repo_root / Path(relative).parent / value,
        ]
        for candidate in candidates:
            if candidate.is_file():
                return self._relative(candidate)
        return None

    def build_launch_dependency_description(self, root_launch_paths: Sequence[str]) -> LaunchDependencyDescription:
        """
        Expand every root depth-first, includes in declaration order.

        Raises InputError for a missing root and IncludeCycleError when a file
        includes itself transitively.
        """
        if not root_launch_paths:
            raise InputError("At least one root launch file is required")
        self._launch_ordinal = 0
        self._node_ordinal = 0
        entries: List[_EntryBuilder] = []
        instances: List[NodeInstanceEntry] = []
        unresolved: List[UnresolvedInclude] = []
        graph = nx.DiGraph()
        roots: List[str] = []

        def expand(relative: str, arguments: Dict[str, Optional[str]], scope: _Scope, stack: List[str]) -> str:
            parsed = self._parse(relative)
            builder = self._new_entry(relative)
            entries.append(builder)
            graph.add_node(builder.id)
            context = self._context(parsed, relative, arguments)

            def on_include(action: IncludeAction, include_scope: _Scope) -> Optional[str]:
                child = self._include_path(action, context, relative)
                if child is None:
                    reference = action.path.render() if action.path is not None else "<missing>"
                    self.diagnostics.warning("include-unresolved", f"included file '{reference}' not found", relative)
                    unresolved.append(UnresolvedInclude(launch_file_id=builder.id, reference=reference))
                    return None
                if child in stack:
                    cycle = stack[stack.index(child):] + [child]
                    raise IncludeCycleError([Path(p).name for p in cycle])
                if self._try_parse(child) is None:
                    unresolved.append(UnresolvedInclude(launch_file_id=builder.id, reference=child))
                    return None
                child_arguments = {}
                for name, value in action.arguments:
                    child_arguments[name] = self._text(value, context, f"launch argument {name}", relative)
                child_scope = _Scope(include_scope.namespace, [], list(include_scope.remaps))
                child_id = expand(child, child_arguments, child_scope, stack + [child])
                graph.add_edge(builder.id, child_id)
                return child_id

            self._walk(parsed.actions, context, scope, builder, instances, on_include, relative)
            return builder.id

        for root in root_launch_paths:
            path = self.repo_root / root
            if not path.is_file():
                raise InputError(f"Root launch file '{root}' does not exist")
            relative = self._relative(path)
            if self._try_parse(relative) is None:
                raise InputError(f"Root launch file '{root}' cannot be read")
            roots.append(expand(relative, {}, _Scope(""), [relative]))

        if not nx.is_directed_acyclic_graph(graph):
            cycle = [edge[0] for edge in nx.find_cycle(graph)]
            raise IncludeCycleError(cycle + cycle[:1])
        in_degree_zero = sorted((n for n, d in graph.in_degree() if d == 0), key=id_sort_key)

        ldd = LaunchDependencyDescription(
            list_launch_file=[b.build() for b in entries],
            list_atom_node_instances=instances,
            roots=in_degree_zero,
            unresolved_includes=unresolved,
        )
        logger.info(
            f"Launch graph: {len(ldd.list_launch_file)} launch file instances, "
            f"{len(ldd.list_atom_node_instances)} node instances, roots {', '.join(roots)}"
        )
        return ldd

    # ------------------------------------------------------------------
    # Root discovery
    # ------------------------------------------------------------------

    def discover_launch_files(self) -> List[str]:
        found = []
        for package_root in sorted(set(self.package_roots.values())):
            base = self.repo_root / package_root
            for path in sorted(base.rglob("*")):
                if not path.is_file() or any(part.startswith(".") for part in path.relative_to(base).parts):
                    continue
                if is_launch_file(path):
                    found.append(self._relative(path))
        return sorted(set(found))

    def discover_roots(self) -> List[str]:
        """
        Launch files that no other launch file includes.

        Raises IncludeCycleError when the file-level include graph has a cycle.
        """
        graph = nx.DiGraph()
        unreadable = set()
        for relative in self.discover_launch_files():
            graph.add_node(relative)
            parsed = self._try_parse(relative)
            if parsed is None:
                unreadable.add(relative)
                continue
            context = self._context(parsed, relative, {})
            for action in _includes_of(parsed.actions):
                child = self._include_path(action, context, relative)
                if child is not None:
                    graph.add_edge(relative, child)
        try:
            cycle = nx.find_cycle(graph)
        except nx.NetworkXNoCycle:
            cycle = None
        if cycle:
            names = [Path(edge[0]).name for edge in cycle]
            raise IncludeCycleError(names + names[:1])
        roots = sorted(n for n, d in graph.in_degree() if d == 0 and n not in unreadable)
        logger.info(f"Discovered {len(roots)} root launch files")
        return roots


def _includes_of(actions) -> List[IncludeAction]:
    found = []
    for action in actions:
        if isinstance(action, IncludeAction):
            found.append(action)
        elif isinstance(action, GroupAction):
            found.extend(_includes_of(action.actions))
    return found


# ---------------------------------------------------------------------------
# Validation and emission
# ---------------------------------------------------------------------------


def validate_ldd(ldd: LaunchDependencyDescription) -> List[Violation]:
    violations: List[Violation] = []
    launch_ids = [e.id for e in ldd.list_launch_file]
    instance_ids = [n.id for n in ldd.list_atom_node_instances]
    known = set(launch_ids) | set(instance_ids)

    owners: Dict[str, int] = {}
    graph = nx.DiGraph()
    graph.add_nodes_from(launch_ids)
    for entry in ldd.list_launch_file:
        for ref in entry.nodes + entry.included_launch_files:
            if ref not in known:
                violations.append(
                    Violation(element=entry.id, invariant="references-exist", message=f"{entry.id} references unknown id {ref}")
                )
        for node_id in entry.nodes:
            owners[node_id] = owners.get(node_id, 0) + 1
        for child in entry.included_launch_files:
            graph.add_edge(entry.id, child)
        members = set(entry.nodes) | set(entry.included_launch_files)
        for key, ids in entry.namespace.items():
            for ref in ids:
                if ref not in members:
                    violations.append(
                        Violation(
                            element=entry.id,
                            invariant="scope-soundness",
                            message=f"{ref} listed under scope '{key}' is not declared by {entry.id}",
                        )
                    )

    for instance_id in instance_ids:
        if owners.get(instance_id, 0) != 1:
            violations.append(
                Violation(
                    element=instance_id,
                    invariant="single-owner",
                    message=f"{instance_id} is referenced by {owners.get(instance_id, 0)} launch file entries",
                )
            )

    if not nx.is_directed_acyclic_graph(graph):
        violations.append(Violation(element="list_launch_file", invariant="acyclic-includes", message="include graph has a cycle"))
    else:
        expected_roots = sorted((n for n, d in graph.in_degree() if d == 0), key=id_sort_key)
        if sorted(ldd.roots, key=id_sort_key) != expected_roots:
            violations.append(
                Violation(
                    element="roots",
                    invariant="roots-in-degree-zero",
                    message=f"roots {ldd.roots} differ from in-degree-zero entries {expected_roots}",
                )
            )

    seen: Dict[Tuple[str, str], str] = {}
    for instance in ldd.list_atom_node_instances:
        if not instance.node_name:
            continue
        key = (instance.node_name, instance.namespace)
        if key in seen:
            violations.append(
                Violation(
                    element=instance.id,
                    invariant="instance-distinctness",
                    message=f"{instance.id} and {seen[key]} share node name '{key[0]}' in namespace '{key[1] or '/'}'",
                )
            )
        else:
            seen[key] = instance.id
        if instance.namespace and not instance.namespace.startswith("/"):
            violations.append(
                Violation(element=instance.id, invariant="namespace-absolute", message=f"namespace '{instance.namespace}' is not absolute")
            )
    return violations


def dump_ldd(ldd: LaunchDependencyDescription) -> str:
    return json.dumps(ldd.model_dump(mode="json"), indent=2, ensure_ascii=False) + "\n"


def emit_launch_dependency_json(ldd: LaunchDependencyDescription) -> str:
    """
    Serialize the description in model field order.

    Raises ModelValidationError when the description breaks an invariant.
    """
    violations = validate_ldd(ldd)
    if violations:
        raise ModelValidationError("launch dependency description", violations)
    return dump_ldd(ldd)


def load_ldd(path: Path) -> LaunchDependencyDescription:
    return LaunchDependencyDescription.model_validate_json(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Linking
# ---------------------------------------------------------------------------


def _short_class(name: str) -> str:
    return name.split("::")[-1].split(".")[-1]


def link_instances_to_classifiers(
    ldd: LaunchDependencyDescription,
    inventory: NodeInventory,
    diagnostics: Optional[DiagnosticsCollector] = None,
) -> Dict[str, Optional[str]]:
    """
    Map each node instance id to a classifier id, or None when unmatched.

    Execution identity is tried first (within the instance's package, then
    anywhere), then class name; ties go to the lowest classifier id.
    """
    diagnostics = diagnostics or DiagnosticsCollector(stage="link")
    classifiers: List[Tuple[str, AtomicRosNodeClassifier]] = list(inventory.classifiers())
    links: Dict[str, Optional[str]] = {}

    for instance in ldd.list_atom_node_instances:
        candidates = [
            c for package, c in classifiers if c.execution == instance.exec_name and package == instance.package
        ]
        if not candidates:
            candidates = [c for _, c in classifiers if c.execution and c.execution == instance.exec_name]
        if not candidates:
            wanted = {_short_class(n) for n in (instance.class_name, instance.exec_name) if n}
            candidates = [
                c
                for package, c in classifiers
                if _short_class(c.class_name) in wanted and (instance.package in (None, package))
            ]
        candidates.sort(key=lambda c: id_sort_key(c.id))

        if not candidates:
            diagnostics.warning(
                "link-unmatched",
                f"{instance.id} ({instance.package or '?'}/{instance.exec_name}) matches no classifier",
            )
            links[instance.id] = None
            continue
        if len(candidates) > 1:
            diagnostics.warning(
                "link-ambiguous",
                f"{instance.id} matches {', '.join(c.id for c in candidates)}; using {candidates[0].id}",
            )
        links[instance.id] = candidates[0].id
    return links


def annotate_class_names(
    ldd: LaunchDependencyDescription, links: Dict[str, Optional[str]], inventory: NodeInventory
) -> LaunchDependencyDescription:
    """Fill class_name and node_kind of linked node entries from their classifiers."""
    by_id = {c.id: c for _, c in inventory.classifiers()}
    instances = []
    for instance in ldd.list_atom_node_instances:
        classifier = by_id.get(links.get(instance.id) or "")
        if classifier is not None:
            instance = instance.model_copy(
                update={"class_name": classifier.class_name, "node_kind": classifier.compile_type}
            )
        instances.append(instance)
    return ldd.model_copy(update={"list_atom_node_instances": instances})


def linked_instances(
    ldd: LaunchDependencyDescription, links: Dict[str, Optional[str]], inventory: NodeInventory
) -> List[LinkedInstance]:
    by_id = {c.id: c for _, c in inventory.classifiers()}
    return [
        LinkedInstance(
            instance_id=instance.id,
            node_name=instance.node_name,
            namespace=instance.namespace,
            remappings=instance.remappings,
            classifier=by_id.get(links.get(instance.id) or ""),
        )
        for instance in ldd.list_atom_node_instances
    ]
