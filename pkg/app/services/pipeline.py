"""
Staged recovery pipeline: extract -> launch-graph -> link -> resolve ->
synthesize. Each stage can also run alone; it then reads its inputs from the
artifacts earlier stages wrote to the output directory.
"""

import hashlib
import logging
from pathlib import Path
from typing import Dict, List, Optional

from app.errors import AnalysisError, InputError, MissingArtifactError
from app.models import (
    ArchitectureModel,
    ArtifactRecord,
    CommunicationRelation,
    LaunchDependencyDescription,
    LlmUsage,
    NodeInventory,
    PackageDescriptor,
    RecoveryJobConfig,
    RunManifest,
    Severity,
)
from app.prompts import SYSTEM_ARCHITECTURE_CONSTRUCTOR, render_prompt
from app.services.diagnostics import DiagnosticsCollector
from app.services.launch_analyzer import (
    LAUNCH_FILE,
    LaunchAnalyzer,
    annotate_class_names,
    emit_launch_dependency_json,
    link_instances_to_classifiers,
    linked_instances,
    load_ldd,
)
from app.services.llm_client import LlmClient, llm_client
from app.services.name_resolution import derive_communication_relations, dump_relations
from app.services.node_extractor import INVENTORY_FILE, NodeExtractor, emit_node_inventory, load_inventory
from app.services.plantuml_parser import check_blueprint_conformance
from app.services.synthesizer import CCD_FILE, build_composed_model, emit_acd, emit_ccd

logger = logging.getLogger(__name__)

MANIFEST_FILE = "run_manifest.json"
ACD_DIR = "acd"
CCD_DIR = "ccd"
PROMPTS_DIR = "prompts"

STAGE_EXTRACT = "extract"
STAGE_LAUNCH_GRAPH = "launch-graph"
STAGE_LINK = "link"
STAGE_RESOLVE = "resolve"
STAGE_SYNTHESIZE = "synthesize"
STAGES = (STAGE_EXTRACT, STAGE_LAUNCH_GRAPH, STAGE_LINK, STAGE_RESOLVE, STAGE_SYNTHESIZE)


def sha256_of(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class RecoveryPipeline:
    """Runs recovery stages for one repository into one output directory"""

    def __init__(
        self,
        config: RecoveryJobConfig,
        diagnostics: Optional[DiagnosticsCollector] = None,
        client: Optional[LlmClient] = None,
    ):
        self.config = config
        self.repo_root = Path(config.repo_root)
        self.out_dir = Path(config.out_dir)
        self.diagnostics = diagnostics or DiagnosticsCollector()
        self.client = client or llm_client
        self.stages_completed: List[str] = []
        self.artifacts: Dict[str, str] = {}
        self.fallback_used = not config.llm_enabled

        self._packages: Optional[List[PackageDescriptor]] = None
        self._inventory: Optional[NodeInventory] = None
        self._ldd: Optional[LaunchDependencyDescription] = None
        self._links: Optional[Dict[str, Optional[str]]] = None
        self._relations: Optional[List[CommunicationRelation]] = None
        self.model: Optional[ArchitectureModel] = None

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def check_repo(self):
        if not self.repo_root.is_dir():
            raise InputError(f"Repository root '{self.repo_root}' does not exist or is not a directory")

    def _write(self, relative: str, text: str, stage: str) -> Path:
        path = self.out_dir / relative
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        self.artifacts[Path(relative).as_posix()] = stage
        logger.debug(f"Wrote {path}")
        return path

    def _done(self, stage: str):
        if stage not in self.stages_completed:
            self.stages_completed.append(stage)

    def packages(self) -> List[PackageDescriptor]:
        if self._packages is None:
            self._packages = NodeExtractor(str(self.repo_root), self.diagnostics).scan_packages()
        return self._packages

    def inventory(self) -> NodeInventory:
        if self._inventory is None:
            path = self.out_dir / INVENTORY_FILE
            if not path.is_file():
                raise MissingArtifactError(str(path), STAGE_EXTRACT)
            self._inventory = load_inventory(path)
        return self._inventory

    def ldd(self) -> LaunchDependencyDescription:
        if self._ldd is None:
            path = self.out_dir / LAUNCH_FILE
            if not path.is_file():
                raise MissingArtifactError(str(path), STAGE_LAUNCH_GRAPH)
            self._ldd = load_ldd(path)
        return self._ldd

    # ------------------------------------------------------------------
    # Stages
    # ------------------------------------------------------------------

    def extract(self) -> NodeInventory:
        self.check_repo()
        extractor = NodeExtractor(str(self.repo_root), self.diagnostics)
        inventory = extractor.build_inventory(self.packages())
        inventory, self.fallback_used = self.client.describe_classifiers(
            inventory, self.config.llm_enabled, self.diagnostics
        )
        self._write(INVENTORY_FILE, emit_node_inventory(inventory, self.repo_root), STAGE_EXTRACT)
        self._inventory = inventory
        self._done(STAGE_EXTRACT)
        return inventory

    def launch_graph(self) -> LaunchDependencyDescription:
        """
        Build the launch dependency description. When a node inventory is
        available its class names are filled into the node entries.
        """
        self.check_repo()
        analyzer = LaunchAnalyzer(
            str(self.repo_root),
            {p.package_name: p.root_path for p in self.packages()},
            self.diagnostics,
            {p.package_name: p.build_type for p in self.packages()},
        )
        roots = list(self.config.roots) or analyzer.discover_roots()
        if not roots:
            raise AnalysisError(f"No root launch file found under {self.repo_root}")
        self._ldd = analyzer.build_launch_dependency_description(roots)
        self._links = None

        if self._inventory is not None or (self.out_dir / INVENTORY_FILE).is_file():
            self._ldd = annotate_class_names(self._ldd, self._link_map(), self.inventory())
        else:
            self.diagnostics.info("link-skipped", f"{INVENTORY_FILE} not found; class names left empty")

        self._write(LAUNCH_FILE, emit_launch_dependency_json(self._ldd), STAGE_LAUNCH_GRAPH)
        self._done(STAGE_LAUNCH_GRAPH)
        return self._ldd

    def _link_map(self) -> Dict[str, Optional[str]]:
        if self._links is None:
            self._links = link_instances_to_classifiers(self.ldd(), self.inventory(), self.diagnostics)
        return self._links

    def link(self) -> Dict[str, Optional[str]]:
        links = self._link_map()
        self._done(STAGE_LINK)
        return links

    def resolve(self) -> List[CommunicationRelation]:
        if self._relations is None:
            instances = linked_instances(self.ldd(), self.link(), self.inventory())
            self._relations = derive_communication_relations(instances, self.diagnostics)
            if self.config.dump_relations:
                target = Path(self.config.dump_relations)
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_text(dump_relations(self._relations), encoding="utf-8")
                logger.info(f"Wrote {len(self._relations)} relations to {target}")
        self._done(STAGE_RESOLVE)
        return self._relations

    def synthesize(self) -> ArchitectureModel:
        inventory, ldd = self.inventory(), self.ldd()
        relations = self.resolve()
        model = build_composed_model(ldd, self.link(), relations, inventory, self.diagnostics)

        written = []
        for _, classifier in inventory.classifiers():
            written.append(self._write(f"{ACD_DIR}/{classifier.id}.puml", emit_acd(classifier), STAGE_SYNTHESIZE))
        written.append(self._write(f"{CCD_DIR}/{CCD_FILE}", emit_ccd(model), STAGE_SYNTHESIZE))
        self._write(
            f"{PROMPTS_DIR}/{SYSTEM_ARCHITECTURE_CONSTRUCTOR}.txt",
            render_prompt(SYSTEM_ARCHITECTURE_CONSTRUCTOR, inventory, ldd),
            STAGE_SYNTHESIZE,
        )

        for path in written:
            for finding in check_blueprint_conformance(path.read_text(encoding="utf-8"), source=str(path)):
                self.diagnostics.add(finding.severity, f"conformance-{finding.code}", finding.message, finding.file)

        self.model = model
        self._done(STAGE_SYNTHESIZE)
        return model

    # ------------------------------------------------------------------
    # Whole run
    # ------------------------------------------------------------------

    def write_manifest(self, failed_stage: Optional[str] = None, error: Optional[str] = None) -> RunManifest:
        records = [
            ArtifactRecord(path=relative, sha256=sha256_of(self.out_dir / relative), stage=stage)
            for relative, stage in sorted(self.artifacts.items())
            if (self.out_dir / relative).is_file()
        ]
        manifest = RunManifest(
            status="failed" if failed_stage else "succeeded",
            failed_stage=failed_stage,
            error=error,
            stages_completed=list(self.stages_completed),
            llm=LlmUsage(enabled=self.config.llm_enabled, fallback_used=self.fallback_used),
            artifacts=records,
        )
        self.out_dir.mkdir(parents=True, exist_ok=True)
        with (self.out_dir / MANIFEST_FILE).open("w", encoding="utf-8", newline="\n") as handle:
            handle.write(manifest.model_dump_json(indent=2) + "\n")
        return manifest

    def run(self) -> RunManifest:
        """
        Run every stage in order and write the run manifest.

        A fatal stage error is re-raised after the manifest records the failed
        stage; artifacts written before it are kept.
        """
        self.check_repo()
        steps = (
            (STAGE_EXTRACT, self.extract),
            (STAGE_LAUNCH_GRAPH, self.launch_graph),
            (STAGE_LINK, self.link),
            (STAGE_RESOLVE, self.resolve),
            (STAGE_SYNTHESIZE, self.synthesize),
        )
        for stage, step in steps:
            try:
                step()
            except Exception as e:
                self.diagnostics.error("stage-failed", f"{stage}: {e}")
                self.write_manifest(failed_stage=stage, error=str(e))
                raise
        manifest = self.write_manifest()
        warnings = sum(1 for d in self.diagnostics.records if d.severity == Severity.WARNING)
        logger.info(
            f"Recovery finished: {len(manifest.artifacts)} artifacts, {warnings} warnings, "
            f"output in {self.out_dir}"
        )
        return manifest


def run_pipeline(
    config: RecoveryJobConfig,
    diagnostics: Optional[DiagnosticsCollector] = None,
    client: Optional[LlmClient] = None,
) -> RunManifest:
    return RecoveryPipeline(config, diagnostics, client).run()
