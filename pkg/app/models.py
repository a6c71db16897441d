from enum import Enum
from typing import Dict, Iterator, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

# ---------------------------------------------------------------------------
# Shared vocabulary
# ---------------------------------------------------------------------------


class PortKind(str, Enum):
    PUBLISHER = "publisher"
    SUBSCRIBER = "subscriber"
    SERVICE_SERVER = "service_server"
    SERVICE_CLIENT = "service_client"

    @property
    def relation_kind(self) -> "RelationKind":
        if self in (PortKind.PUBLISHER, PortKind.SUBSCRIBER):
            return RelationKind.TOPIC
        return RelationKind.SERVICE

    @property
    def is_producer(self) -> bool:
        return self in (PortKind.PUBLISHER, PortKind.SERVICE_SERVER)

    @property
    def has_callback(self) -> bool:
        return self in (PortKind.SUBSCRIBER, PortKind.SERVICE_SERVER)


class CompileType(str, Enum):
    PYTHON = "python"
    CPP = "cpp"


class BuildType(str, Enum):
    PYTHON_PACKAGE = "python_package"
    CPP_PACKAGE = "cpp_package"
    MIXED = "mixed"


class RelationKind(str, Enum):
    TOPIC = "topic"
    SERVICE = "service"


class LaunchFormat(str, Enum):
    SCRIPT = "script"
    XML = "xml"
    YAML = "yaml"


class Severity(str, Enum):
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"


class Diagnostic(BaseModel):
    """Structured analysis finding; never raised, always recorded"""

    model_config = ConfigDict(frozen=True)

    severity: Severity = Field(..., description="info, warning or error")
    code: str = Field(..., description="Stable machine-readable diagnostic code")
    file: Optional[str] = Field(None, description="Repo-relative file the finding refers to")
    message: str = Field(..., description="Human-readable message")


class Violation(BaseModel):
    """A broken model invariant, named by element and invariant"""

    model_config = ConfigDict(frozen=True)

    element: str
    invariant: str
    message: str


# ---------------------------------------------------------------------------
# Blueprint model (design and integration phase)
# ---------------------------------------------------------------------------


class CommunicationPort(BaseModel):
    """Typed publisher, subscriber, service server or service client of a node class"""

    model_config = ConfigDict(frozen=True)

    kind: PortKind
    interface_type: str = Field(..., description="<pkg>/(msg|srv)/<Type>")
    declared_name: str = Field(..., description="Topic or service name as written in source")
    callback_name: Optional[str] = Field(None, description="Registered handler identifier")


class AtomicRosNodeClassifier(BaseModel):
    """Source-level node definition; field order is the emitted JSON key order"""

    model_config = ConfigDict(frozen=True)

    id: str
    class_name: str
    node_name: Optional[str] = None
    header_file_paths: List[str] = Field(default_factory=list)
    source_file_paths: List[str] = Field(default_factory=list)
    description: str = ""
    compile_type: CompileType
    execution: Optional[str] = None
    ports: List[CommunicationPort] = Field(default_factory=list)


class RosNodePart(BaseModel):
    """Launch-time instance typed by an atomic, composed or placeholder classifier"""

    model_config = ConfigDict(frozen=True)

    instance_id: str
    classifier_ref: str
    node_name: Optional[str] = None
    namespace: str = ""
    remappings: List[Tuple[str, str]] = Field(default_factory=list)
    executable: Optional[str] = None


class CommunicationRelation(BaseModel):
    """System-level topic or service link between node instances"""

    model_config = ConfigDict(frozen=True)

    kind: RelationKind
    resolved_name: str
    interface_type: str
    producer_instance_ids: List[str] = Field(default_factory=list)
    consumer_instance_ids: List[str] = Field(default_factory=list)


class ComposedRosNodeClassifier(BaseModel):
    """Subsystem induced by one launch file instance"""

    model_config = ConfigDict(frozen=True)

    id: str
    name: str
    parts: List[RosNodePart] = Field(default_factory=list)
    relations: List[CommunicationRelation] = Field(default_factory=list)


class PlaceholderClassifier(BaseModel):
    """Stands in for an executable no atomic classifier could be linked to"""

    model_config = ConfigDict(frozen=True)

    id: str
    name: str
    exec_name: str
    package: Optional[str] = None


class ArchitectureModel(BaseModel):
    atomic_classifiers: List[AtomicRosNodeClassifier] = Field(default_factory=list)
    composed_classifiers: List[ComposedRosNodeClassifier] = Field(default_factory=list)
    placeholder_classifiers: List[PlaceholderClassifier] = Field(default_factory=list)
    root_composed_id: str

    def composed(self, classifier_id: str) -> Optional[ComposedRosNodeClassifier]:
        return next((c for c in self.composed_classifiers if c.id == classifier_id), None)

    def classifier_names(self) -> Dict[str, str]:
        """Map every classifier id to the name shown for it in diagrams."""
        names = {c.id: c.class_name for c in self.atomic_classifiers}
        names.update({c.id: c.name for c in self.composed_classifiers})
        names.update({c.id: c.name for c in self.placeholder_classifiers})
        return names


# ---------------------------------------------------------------------------
# Node inventory
# ---------------------------------------------------------------------------


class PackageDescriptor(BaseModel):
    model_config = ConfigDict(frozen=True)

    package_name: str
    root_path: str = Field(..., description="Repo-relative package directory")
    manifest_path: str = Field(..., description="Repo-relative path of package.xml")
    build_type: BuildType


class PackageEntry(BaseModel):
    package_name: str
    list_atomic_ros_node_classifiers: List[AtomicRosNodeClassifier] = Field(default_factory=list)


class NodeInventory(BaseModel):
    list_packages: List[PackageEntry] = Field(default_factory=list)

    def classifiers(self) -> Iterator[Tuple[str, AtomicRosNodeClassifier]]:
        for package in self.list_packages:
            for classifier in package.list_atomic_ros_node_classifiers:
                yield package.package_name, classifier

    class Config:
        json_schema_extra = {
            "example": {
                "list_packages": [
                    {
                        "package_name": "example_pkg",
                        "list_atomic_ros_node_classifiers": [
                            {
                                "id": "arc_1",
                                "class_name": "ExampleNode",
                                "node_name": "example_node",
                                "header_file_paths": [],
                                "source_file_paths": ["example_pkg/example_pkg/example.py"],
                                "description": "ExampleNode publishes 1 topic.",
                                "compile_type": "python",
                                "execution": "example",
                                "ports": [
                                    {
                                        "kind": "publisher",
                                        "interface_type": "std_msgs/msg/String",
                                        "declared_name": "chatter",
                                        "callback_name": None,
                                    }
                                ],
                            }
                        ],
                    }
                ]
            }
        }


# ---------------------------------------------------------------------------
# Launch dependency description
# ---------------------------------------------------------------------------


class LaunchFileEntry(BaseModel):
    """One launch file instance; field order is the emitted JSON key order"""

    id: str
    type: str = Field(..., description="Launch file name")
    nodes: List[str] = Field(default_factory=list)
    included_launch_files: List[str] = Field(default_factory=list)
    namespace: Dict[str, List[str]] = Field(default_factory=dict)


class NodeInstanceEntry(BaseModel):
    """One node instance; package, remappings and parameters follow the core fields"""

    id: str
    node_kind: Optional[CompileType] = None
    exec_name: str
    class_name: Optional[str] = None
    node_name: Optional[str] = None
    namespace: str = ""
    package: Optional[str] = None
    remappings: List[Tuple[str, str]] = Field(default_factory=list)
    parameters: List[str] = Field(default_factory=list)


class UnresolvedInclude(BaseModel):
    launch_file_id: str
    reference: str


class LaunchDependencyDescription(BaseModel):
    list_launch_file: List[LaunchFileEntry] = Field(default_factory=list)
    list_atom_node_instances: List[NodeInstanceEntry] = Field(default_factory=list)
    roots: List[str] = Field(default_factory=list)
    unresolved_includes: List[UnresolvedInclude] = Field(default_factory=list)

    def launch_file(self, launch_id: str) -> Optional[LaunchFileEntry]:
        return next((e for e in self.list_launch_file if e.id == launch_id), None)

    def instance(self, instance_id: str) -> Optional[NodeInstanceEntry]:
        return next((n for n in self.list_atom_node_instances if n.id == instance_id), None)


# ---------------------------------------------------------------------------
# Name resolution
# ---------------------------------------------------------------------------


class ResolvedName(BaseModel):
    model_config = ConfigDict(frozen=True)

    raw: str
    base_namespace: str
    node_name: Optional[str] = None
    absolute: str


class LinkedInstance(BaseModel):
    """A node instance together with the classifier it was linked to (if any)"""

    model_config = ConfigDict(frozen=True)

    instance_id: str
    node_name: Optional[str] = None
    namespace: str = ""
    remappings: List[Tuple[str, str]] = Field(default_factory=list)
    classifier: Optional[AtomicRosNodeClassifier] = None


# ---------------------------------------------------------------------------
# LLM bridge
# ---------------------------------------------------------------------------


class PromptContract(BaseModel):
    """Seven-field prompt contract"""

    role: str
    goal: str
    backstory: str
    examples: str
    input: str
    task: str
    expected_output: str


class GenerationResult(BaseModel):
    text: str
    used_fallback: bool = False
    attempts: int = 0
    error: Optional[str] = None


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


class MetricLevel(str, Enum):
    ACD = "ACD"
    CCD = "CCD"


class MetricElementKind(str, Enum):
    ARC_NAME = "arc_name"
    ARC_STEREOTYPE = "arc_stereotype"
    MESSAGE_TYPE = "message_type"
    CALLBACK_FUNCTION_NAME = "callback_function_name"
    SERVICE_TYPE = "service_type"
    SERVICE_FUNCTION_NAME = "service_function_name"
    COMPOSED_CLASSIFIER_NAME = "composed_classifier_name"
    NODE_PART_NAME = "node_part_name"
    NODE_PART_CLASSIFIER_REF = "node_part_classifier_ref"
    NODE_PART_NAMESPACE = "node_part_namespace"
    COMMUNICATION_RELATION = "communication_relation"
    REMAPPING = "remapping"

    @property
    def level(self) -> MetricLevel:
        return MetricLevel.ACD if self in ACD_ELEMENT_KINDS else MetricLevel.CCD

    @classmethod
    def for_level(cls, level: MetricLevel) -> List["MetricElementKind"]:
        return [kind for kind in cls if kind.level == level]


ACD_ELEMENT_KINDS = frozenset(
    {
        MetricElementKind.ARC_NAME,
        MetricElementKind.ARC_STEREOTYPE,
        MetricElementKind.MESSAGE_TYPE,
        MetricElementKind.CALLBACK_FUNCTION_NAME,
        MetricElementKind.SERVICE_TYPE,
        MetricElementKind.SERVICE_FUNCTION_NAME,
    }
)


class CanonicalElement(BaseModel):
    """Equal iff (kind, key) are equal"""

    model_config = ConfigDict(frozen=True)

    kind: MetricElementKind
    key: tuple


class ElementCounts(BaseModel):
    model_config = ConfigDict(frozen=True)

    tp: int = Field(0, ge=0)
    fp: int = Field(0, ge=0)
    fn: int = Field(0, ge=0)


class MetricScores(BaseModel):
    model_config = ConfigDict(frozen=True)

    precision: float
    recall: float
    f1: float


class ElementReport(BaseModel):
    level: MetricLevel
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


class EvaluationReport(BaseModel):
    """Per-metric-element counts and scores with macro averages per level"""

    schema_version: str = "1.0"
    zero_division: str = Field(
        "0/0 scores 1.0 when both element sets are empty, 0.0 otherwise",
        description="Convention used when a denominator is zero",
    )
    per_element: Dict[str, ElementReport] = Field(default_factory=dict)
    macro: Dict[str, MetricScores] = Field(default_factory=dict)
    notices: List[str] = Field(default_factory=list)
    conformance: List[Diagnostic] = Field(default_factory=list)
    parse_diagnostics: List[Diagnostic] = Field(default_factory=list)


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


class RecoveryJobConfig(BaseModel):
    repo_root: str
    out_dir: str
    roots: List[str] = Field(default_factory=list)
    llm_enabled: bool = True
    diagnostics_path: Optional[str] = None
    fail_under: Optional[float] = Field(None, ge=0.0, le=1.0)
    dump_relations: Optional[str] = None


class ArtifactRecord(BaseModel):
    path: str
    sha256: str
    stage: str


class LlmUsage(BaseModel):
    enabled: bool
    fallback_used: bool


class RunManifest(BaseModel):
    schema_version: str = "1.0"
    status: str = Field(..., description="succeeded or failed")
    failed_stage: Optional[str] = None
    error: Optional[str] = None
    stages_completed: List[str] = Field(default_factory=list)
    llm: LlmUsage
    artifacts: List[ArtifactRecord] = Field(default_factory=list)


# ---------------------------------------------------------------------------
# HTTP API
# ---------------------------------------------------------------------------


class RecoveryJobRequest(BaseModel):
    """Request to recover the architecture of a local ROS 2 checkout"""

    repo_root: str = Field(..., description="Path of the repository checkout to analyze")
    out_dir: Optional[str] = Field(None, description="Output directory (defaults under jobs_root)")
    roots: List[str] = Field(default_factory=list, description="Root launch files")
    llm_enabled: bool = Field(False, description="Let the LLM author node descriptions")

    class Config:
        json_schema_extra = {
            "example": {
                "repo_root": "/workspace/brickbybrick",
                "roots": ["bbb_bringup/launch/brickbybrick.launch.py"],
                "llm_enabled": False,
            }
        }


class RecoveryJobAccepted(BaseModel):
    job_id: str = Field(..., description="Unique job ID for tracking")
    status: str = Field(default="accepted", description="Job status")
    message: str = Field(..., description="Status message")


class JobStatusResponse(BaseModel):
    job_id: str
    status: str = Field(..., description="accepted, running, succeeded or failed")
    out_dir: str
    exit_code: Optional[int] = None
    manifest: Optional[RunManifest] = None
    error: Optional[str] = None


class EvaluateRequest(BaseModel):
    recovered: str = Field(..., description="Recovered .puml file or directory")
    reference: str = Field(..., description="Reference .puml file or directory")
    fail_under: Optional[float] = Field(None, ge=0.0, le=1.0, description="Reject reports with a macro F1 below this")


class HealthResponse(BaseModel):
    """Health check response"""

    status: str = Field(..., description="Health status: healthy or degraded")
    message: str = Field(..., description="Status message")
    services: Optional[dict] = Field(None, description="Status of individual services")


class VersionResponse(BaseModel):
    """Version information response"""

    api_version: str = Field(..., description="API version")
    schema_version: str = Field(..., description="Artifact schema version")
