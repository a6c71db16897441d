"""
Extract stage: scan a ROS 2 checkout and write the node inventory
(``atomic_ros_nodes.json``).
"""

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.config import settings
from app.errors import InputError, ModelValidationError
from app.models import (
    AtomicRosNodeClassifier,
    BuildType,
    CommunicationPort,
    CompileType,
    NodeInventory,
    PackageDescriptor,
    PackageEntry,
    PortKind,
    Violation,
)
from app.services.blueprint import ATOMIC_PREFIX, canonical_id, unique, validate_atomic_classifier
from app.services.build_files import (
    CMAKE_BUILD_TYPES,
    PYTHON_BUILD_TYPES,
    cmake_targets,
    read_package_manifest,
    setup_cfg_entry_points,
    setup_py_entry_points,
)
from app.services.cpp_source import HEADER_SUFFIXES, SOURCE_SUFFIXES, CppFileScan, cpp_scanner
from app.services.diagnostics import DiagnosticsCollector
from app.services.python_source import PythonModuleScan, python_scanner, unique_ports

logger = logging.getLogger(__name__)

MANIFEST_NAME = "package.xml"
IGNORE_MARKERS = ("COLCON_IGNORE", "AMENT_IGNORE")
SKIPPED_DIRECTORIES = frozenset({"build", "install", "log", "__pycache__"})

INVENTORY_FILE = "atomic_ros_nodes.json"


def default_description(class_name: str, ports: Sequence[CommunicationPort]) -> str:
    """Deterministic one-sentence summary of a classifier's interface."""
    counts = {kind: sum(1 for p in ports if p.kind == kind) for kind in PortKind}
    phrases = []
    if counts[PortKind.PUBLISHER]:
        phrases.append(_plural(counts[PortKind.PUBLISHER], "publishes {} topic"))
    if counts[PortKind.SUBSCRIBER]:
        phrases.append(_plural(counts[PortKind.SUBSCRIBER], "subscribes to {} topic"))
    if counts[PortKind.SERVICE_SERVER]:
        phrases.append(_plural(counts[PortKind.SERVICE_SERVER], "serves {} service"))
    if counts[PortKind.SERVICE_CLIENT]:
        phrases.append(_plural(counts[PortKind.SERVICE_CLIENT], "calls {} service"))
    if not phrases:
        return f"{class_name} has no communication ports."
    if len(phrases) == 1:
        return f"{class_name} {phrases[0]}."
    return f"{class_name} {', '.join(phrases[:-1])} and {phrases[-1]}."


def _plural(count: int, template: str) -> str:
    text = template.format(count)
    return text if count == 1 else f"{text}s"


@dataclass
class _ClassEvidence:
    """Everything collected about one node class before it gets an id"""

    class_name: str
    compile_type: CompileType
    node_name: Optional[str] = None
    header_file_paths: List[str] = field(default_factory=list)
    source_file_paths: List[str] = field(default_factory=list)
    ports: List[CommunicationPort] = field(default_factory=list)


class NodeExtractor:
    """Static extraction of atomic node classifiers from a repository snapshot"""

    def __init__(self, repo_root: str, diagnostics: Optional[DiagnosticsCollector] = None):
        self.repo_root = Path(repo_root)
        self.diagnostics = diagnostics or DiagnosticsCollector(stage="extract")
        self._python_scans: Dict[str, PythonModuleScan] = {}
        self._cpp_scans: Dict[str, CppFileScan] = {}
        self._scanned_package: Optional[str] = None

    # ------------------------------------------------------------------
    # Package discovery
    # ------------------------------------------------------------------

    def _relative(self, path: Path) -> str:
        return path.relative_to(self.repo_root).as_posix()

    def scan_packages(self) -> List[PackageDescriptor]:
        """
        Find every directory holding a package.xml, nested packages included.

        Returns descriptors sorted by package name.
        """
        if not self.repo_root.is_dir() or not os.access(self.repo_root, os.R_OK | os.X_OK):
            raise InputError(f"Repository root '{self.repo_root}' is not a readable directory")

        packages: Dict[str, PackageDescriptor] = {}
        for directory, subdirs, files in os.walk(self.repo_root):
            subdirs[:] = sorted(
                d for d in subdirs if not d.startswith(".") and d not in SKIPPED_DIRECTORIES
            )
            if any(marker in files for marker in IGNORE_MARKERS):
                subdirs[:] = []
                continue
            if MANIFEST_NAME not in files:
                continue

            root = Path(directory)
            manifest_path = root / MANIFEST_NAME
            try:
                manifest = read_package_manifest(manifest_path)
            except (ValueError, OSError) as e:
                self.diagnostics.warning("manifest-malformed", f"{e}; package skipped", self._relative(manifest_path))
                continue

            if manifest.name in packages:
                self.diagnostics.warning(
                    "package-duplicate",
                    f"package '{manifest.name}' already found at {packages[manifest.name].root_path}; skipped",
                    self._relative(manifest_path),
                )
                continue

            packages[manifest.name] = PackageDescriptor(
                package_name=manifest.name,
                root_path=self._relative(root) if root != self.repo_root else ".",
                manifest_path=self._relative(manifest_path),
                build_type=self._build_type(root, manifest.build_type),
            )

        result = [packages[name] for name in sorted(packages)]
        logger.info(f"Found {len(result)} packages under {self.repo_root}")
        return result

    def _build_type(self, root: Path, declared: Optional[str]) -> BuildType:
        has_cmake = (root / "CMakeLists.txt").is_file()
        has_python = (root / "setup.py").is_file() or (root / "setup.cfg").is_file()
        if has_cmake:
            cmake_text = (root / "CMakeLists.txt").read_text(encoding="utf-8", errors="replace")
            if "ament_python_install_package" in cmake_text:
                has_python = True
        if declared in PYTHON_BUILD_TYPES and not has_cmake:
            return BuildType.PYTHON_PACKAGE
        if has_cmake and has_python:
            return BuildType.MIXED
        if declared in CMAKE_BUILD_TYPES or has_cmake:
            return BuildType.CPP_PACKAGE
        return BuildType.PYTHON_PACKAGE

    def _package_root(self, package: PackageDescriptor) -> Path:
        return self.repo_root / package.root_path

    def _package_files(self, package: PackageDescriptor, suffixes: Tuple[str, ...]) -> List[Path]:
        """Files of one package, excluding nested packages and ignored directories."""
        root = self._package_root(package)
        found = []
        for directory, subdirs, files in os.walk(root):
            current = Path(directory)
            kept = []
            for d in sorted(subdirs):
                if d.startswith(".") or d in SKIPPED_DIRECTORIES:
                    continue
                if (current / d / MANIFEST_NAME).is_file():
                    continue
                if any((current / d / marker).exists() for marker in IGNORE_MARKERS):
                    continue
                kept.append(d)
            subdirs[:] = kept
            found.extend(current / f for f in sorted(files) if f.endswith(suffixes))
        return sorted(found)

    # ------------------------------------------------------------------
    # Source scanning
    # ------------------------------------------------------------------

    def _read(self, path: Path) -> Optional[str]:
        try:
            return path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            self.diagnostics.warning("source-unreadable", f"Skipped unreadable file: {e}", self._relative(path))
            return None

    def _python_module(self, package: PackageDescriptor, path: Path) -> str:
        relative = path.relative_to(self._package_root(package)).with_suffix("")
        parts = list(relative.parts)
        if parts and parts[-1] == "__init__":
            parts = parts[:-1]
        return ".".join(parts)

    def _ensure_scanned(self, package: PackageDescriptor):
        if self._scanned_package == package.package_name:
            return
        self._python_scans.clear()
        self._cpp_scans.clear()
        self._scan_python(package)
        self._scan_cpp(package)
        self._scanned_package = package.package_name

    def _scan_python(self, package: PackageDescriptor) -> List[PythonModuleScan]:
        if package.build_type == BuildType.CPP_PACKAGE:
            return []
        root = self._package_root(package)
        files = [
            f
            for f in self._package_files(package, (".py",))
            if f.name != "setup.py"
            and "launch" not in f.relative_to(root).parts
            and "test" not in f.relative_to(root).parts
        ]

        def scan(path: Path) -> Optional[PythonModuleScan]:
            source = self._read(path)
            if source is None:
                return None
            return python_scanner.scan(self._relative(path), source, self._python_module(package, path))

        with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
            scans = [s for s in pool.map(scan, files) if s is not None]
        for result in scans:
            self.diagnostics.extend(result.diagnostics)
            self._python_scans[result.path] = result
        return scans

    def _scan_cpp(self, package: PackageDescriptor) -> List[CppFileScan]:
        if package.build_type == BuildType.PYTHON_PACKAGE:
            return []
        files = self._package_files(package, HEADER_SUFFIXES + SOURCE_SUFFIXES)

        def scan(path: Path) -> Optional[CppFileScan]:
            source = self._read(path)
            if source is None:
                return None
            return cpp_scanner.scan(self._relative(path), source)

        with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
            scans = [s for s in pool.map(scan, files) if s is not None]
        for result in scans:
            self.diagnostics.extend(result.diagnostics)
            self._cpp_scans[result.path] = result
        return scans

    def _python_evidence(self, scans: Iterable[PythonModuleScan]) -> List[_ClassEvidence]:
        evidence = []
        seen: Dict[str, str] = {}
        for scan in scans:
            for node in scan.nodes:
                if node.class_name in seen:
                    self.diagnostics.warning(
                        "class-duplicate",
                        f"{node.class_name} also defined in {seen[node.class_name]}; keeping the first",
                        scan.path,
                    )
                    continue
                seen[node.class_name] = scan.path
                evidence.append(
                    _ClassEvidence(
                        class_name=node.class_name,
                        compile_type=CompileType.PYTHON,
                        node_name=node.node_name,
                        source_file_paths=[scan.path],
                        ports=list(node.ports),
                    )
                )
        return evidence

    def _cpp_evidence(self, scans: List[CppFileScan]) -> List[_ClassEvidence]:
        node_classes = sorted({name for scan in scans for name in scan.node_classes})
        evidence = []
        for class_name in node_classes:
            found = _ClassEvidence(class_name=class_name, compile_type=CompileType.CPP)
            ports = []
            for scan in scans:
                if class_name not in scan.classes_present:
                    continue
                if scan.is_header:
                    found.header_file_paths.append(scan.path)
                else:
                    found.source_file_paths.append(scan.path)
                if found.node_name is None and class_name in scan.node_names:
                    found.node_name = scan.node_names[class_name]
                ports.extend(port for _, port in sorted(scan.ports.get(class_name, []), key=lambda p: p[0]))
            if not found.source_file_paths:
                # header-only node classes
                found.source_file_paths = list(found.header_file_paths)
            found.ports = unique_ports(ports)
            evidence.append(found)
        return evidence

    # ------------------------------------------------------------------
    # Public operations
    # ------------------------------------------------------------------

    def extract_ports(
        self, classifier_sources: Sequence[Tuple[str, str]], compile_type: CompileType
    ) -> List[CommunicationPort]:
        """
        Ports created in the given ``(path, content)`` sources of one node class,
        in source order.
        """
        ports: List[CommunicationPort] = []
        scanner = python_scanner if compile_type == CompileType.PYTHON else cpp_scanner
        for path, content in classifier_sources:
            found, diagnostics = scanner.ports_in_source(path, content)
            self.diagnostics.extend(diagnostics)
            ports.extend(found)
        return unique_ports(ports)

    def extract_atomic_nodes(
        self, package: PackageDescriptor, start_ordinal: int = 1
    ) -> List[AtomicRosNodeClassifier]:
        """
        One classifier per node class of the package, ids assigned from
        ``start_ordinal`` in canonical order (source path, then class name).
        """
        self._ensure_scanned(package)
        python_scans = [self._python_scans[k] for k in sorted(self._python_scans)]
        cpp_scans = [self._cpp_scans[k] for k in sorted(self._cpp_scans)]
        evidence = self._python_evidence(python_scans) + self._cpp_evidence(cpp_scans)
        evidence.sort(key=lambda e: (e.source_file_paths[0], e.class_name))
        executables = self.resolve_executables(package)

        classifiers = []
        for offset, found in enumerate(evidence):
            candidates = executables.get(found.class_name, [])
            execution = candidates[0] if candidates else None
            if execution is None:
                self.diagnostics.info(
                    "execution-absent",
                    f"{found.class_name} is not reachable from any entry point or build target",
                    found.source_file_paths[0],
                )
            classifiers.append(
                AtomicRosNodeClassifier(
                    id=canonical_id(ATOMIC_PREFIX, start_ordinal + offset),
                    class_name=found.class_name,
                    node_name=found.node_name,
                    header_file_paths=found.header_file_paths,
                    source_file_paths=found.source_file_paths,
                    description=default_description(found.class_name, found.ports),
                    compile_type=found.compile_type,
                    execution=execution,
                    ports=found.ports,
                )
            )
        logger.info(f"Extracted {len(classifiers)} node classes from {package.package_name}")
        return classifiers

    def resolve_executables(self, package: PackageDescriptor) -> Dict[str, List[str]]:
        """
        Map class names to the executables that run them, sorted; the first
        entry is the classifier's execution.
        """
        self._ensure_scanned(package)
        mapping: Dict[str, List[str]] = {}
        if package.build_type != BuildType.CPP_PACKAGE:
            self._python_executables(package, mapping)
        if package.build_type != BuildType.PYTHON_PACKAGE:
            self._cpp_executables(package, mapping)

        for class_name, executions in sorted(mapping.items()):
            executions[:] = sorted(unique(executions))
            if len(executions) > 1:
                self.diagnostics.warning(
                    "execution-multiple",
                    f"{class_name} is run by {', '.join(executions)}; using '{executions[0]}'",
                    package.manifest_path,
                )
        return mapping

    def _python_executables(self, package: PackageDescriptor, mapping: Dict[str, List[str]]):
        root = self._package_root(package)
        entry_points: Dict[str, str] = {}
        for name, reader in (("setup.py", setup_py_entry_points), ("setup.cfg", setup_cfg_entry_points)):
            path = root / name
            if not path.is_file():
                continue
            try:
                entry_points.update(reader(path.read_text(encoding="utf-8")))
            except (ValueError, OSError) as e:
                self.diagnostics.warning("build-file-unparseable", str(e), self._relative(path))
                return

        node_classes = {node.class_name for scan in self._python_scans.values() for node in scan.nodes}

        for executable, target in sorted(entry_points.items()):
            module, _, function = target.partition(":")
            function = function.strip() or "main"
            scan = self._module_scan(package, module.strip())
            if scan is None:
                self.diagnostics.warning(
                    "entry-point-unresolved",
                    f"entry point '{executable} = {target}' names a module that was not found",
                    package.manifest_path,
                )
                continue
            constructed = scan.constructed.get(function, [])
            for class_name in constructed:
                if class_name in node_classes:
                    mapping.setdefault(class_name, []).append(executable)

    def _module_scan(self, package: PackageDescriptor, module: str) -> Optional[PythonModuleScan]:
        root = self._package_root(package)
        relative = Path(*module.split("."))
        for candidate in (root / relative.with_suffix(".py"), root / relative / "__init__.py"):
            key = self._relative(candidate) if candidate.exists() else None
            if key and key in self._python_scans:
                return self._python_scans[key]
        return None

    def _cpp_executables(self, package: PackageDescriptor, mapping: Dict[str, List[str]]):
        root = self._package_root(package)
        cmake_path = root / "CMakeLists.txt"
        if not cmake_path.is_file():
            return
        try:
            targets = cmake_targets(cmake_path.read_text(encoding="utf-8"))
        except (ValueError, OSError) as e:
            self.diagnostics.warning("build-file-unparseable", str(e), self._relative(cmake_path))
            return

        known = {name for scan in self._cpp_scans.values() for name in scan.node_classes}
        for target in targets:
            if target.plugin:
                class_name = target.plugin.split("::")[-1]
                mapping.setdefault(class_name, []).append(target.name)
                continue
            scans = []
            for source in target.sources:
                key = self._relative(root / source) if (root / source).exists() else None
                if key and key in self._cpp_scans:
                    scans.append(self._cpp_scans[key])
            constructed = [name for scan in scans for name in scan.main_constructs]
            if not constructed:
                # no make_shared in main: the target runs the node classes it compiles
                constructed = sorted({name for scan in scans for name in scan.node_classes})
            for class_name in unique(constructed):
                if class_name in known:
                    mapping.setdefault(class_name, []).append(target.name)

    def build_inventory(self, packages: Optional[List[PackageDescriptor]] = None) -> NodeInventory:
        packages = self.scan_packages() if packages is None else packages
        entries = []
        ordinal = 1
        for package in packages:
            classifiers = self.extract_atomic_nodes(package, start_ordinal=ordinal)
            ordinal += len(classifiers)
            entries.append(
                PackageEntry(package_name=package.package_name, list_atomic_ros_node_classifiers=classifiers)
            )
        return NodeInventory(list_packages=entries)

    def validate_inventory(self, inventory: NodeInventory) -> List[Violation]:
        return validate_inventory(inventory, self.repo_root)


def validate_inventory(inventory: NodeInventory, repo_root: Optional[Path] = None) -> List[Violation]:
    violations: List[Violation] = []
    names = [p.package_name for p in inventory.list_packages]
    for name in sorted({n for n in names if names.count(n) > 1}):
        violations.append(
            Violation(element=name, invariant="package-names-unique", message=f"Package '{name}' listed twice")
        )
    seen_ids = set()
    for _, classifier in inventory.classifiers():
        if classifier.id in seen_ids:
            violations.append(
                Violation(
                    element=classifier.id,
                    invariant="classifier-ids-unique",
                    message=f"Classifier id {classifier.id} is not unique",
                )
            )
        seen_ids.add(classifier.id)
        violations.extend(validate_atomic_classifier(classifier))
        if repo_root is not None:
            for path in classifier.source_file_paths + classifier.header_file_paths:
                if not (Path(repo_root) / path).is_file():
                    violations.append(
                        Violation(
                            element=classifier.id,
                            invariant="source-paths-exist",
                            message=f"{path} does not exist in the repository",
                        )
                    )
    return violations


def dump_inventory(inventory: NodeInventory) -> str:
    return json.dumps(inventory.model_dump(mode="json"), indent=2, ensure_ascii=False) + "\n"


def emit_node_inventory(inventory: NodeInventory, repo_root: Optional[Path] = None) -> str:
    """
    Serialize the inventory to JSON text in model field order.

    Raises ModelValidationError when the inventory breaks an invariant.
    """
    violations = validate_inventory(inventory, repo_root)
    if violations:
        raise ModelValidationError("node inventory", violations)
    return dump_inventory(inventory)


def load_inventory(path: Path) -> NodeInventory:
    return NodeInventory.model_validate_json(Path(path).read_text(encoding="utf-8"))
