from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from app.main import app
from app.models import (
    AtomicRosNodeClassifier,
    CommunicationPort,
    CompileType,
    NodeInventory,
    PackageEntry,
    PortKind,
    RecoveryJobConfig,
)
from app.services.diagnostics import DiagnosticsCollector
from app.services.job_registry import job_registry

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def test_client():
    """Create a test client for the FastAPI app."""
    job_registry.clear()
    return TestClient(app)


@pytest.fixture
def brickbybrick_repo():
    """Four ament_python packages, ten node classes and one launch file."""
    return FIXTURES / "brickbybrick"


@pytest.fixture
def brickbybrick_reference():
    return FIXTURES / "brickbybrick_reference"


@pytest.fixture
def nested_launch_repo():
    """One package whose root launch file includes a second one under a namespace."""
    return FIXTURES / "nested_launch"


@pytest.fixture
def diagnostics():
    return DiagnosticsCollector(stage="test")


@pytest.fixture
def offline_config(tmp_path, brickbybrick_repo):
    return RecoveryJobConfig(
        repo_root=str(brickbybrick_repo),
        out_dir=str(tmp_path / "out"),
        llm_enabled=False,
    )


@pytest.fixture
def example_classifier():
    return AtomicRosNodeClassifier(
        id="arc_1",
        class_name="ExampleNode",
        node_name="example_node",
        source_file_paths=["example_pkg/example_pkg/example.py"],
        description="ExampleNode publishes 1 topic and subscribes to 1 topic.",
        compile_type=CompileType.PYTHON,
        execution="example",
        ports=[
            CommunicationPort(
                kind=PortKind.PUBLISHER,
                interface_type="std_msgs/msg/String",
                declared_name="chatter",
            ),
            CommunicationPort(
                kind=PortKind.SUBSCRIBER,
                interface_type="sensor_msgs/msg/Image",
                declared_name="camera/rgb",
                callback_name="on_image",
            ),
        ],
    )


@pytest.fixture
def example_inventory(example_classifier):
    return NodeInventory(
        list_packages=[
            PackageEntry(package_name="example_pkg", list_atomic_ros_node_classifiers=[example_classifier])
        ]
    )
