import json
import shutil
import textwrap

import pytest

from app.errors import IncludeCycleError, InputError, ModelValidationError
from app.models import (
    AtomicRosNodeClassifier,
    BuildType,
    CompileType,
    LaunchDependencyDescription,
    LaunchFileEntry,
    NodeInstanceEntry,
    NodeInventory,
    PackageEntry,
)
from app.services.launch_analyzer import (
    LaunchAnalyzer,
    annotate_class_names,
    dump_ldd,
    emit_launch_dependency_json,
    is_launch_file,
    link_instances_to_classifiers,
    linked_instances,
    load_ldd,
    validate_ldd,
)
from app.services.node_extractor import NodeExtractor

NESTED_ROOT = "example_pkg/launch/main.launch.py"
BRICK_ROOT = "bbb_bringup/launch/brickbybrick.launch.py"
BRICK_PACKAGES = {name: name for name in ("bbb_bringup", "bbb_control", "bbb_perception", "bbb_planning")}


@pytest.fixture
def nested_analyzer(nested_launch_repo, diagnostics):
    return LaunchAnalyzer(str(nested_launch_repo), {"example_pkg": "example_pkg"}, diagnostics)


@pytest.fixture
def nested_ldd(nested_analyzer):
    return nested_analyzer.build_launch_dependency_description([NESTED_ROOT])


@pytest.fixture
def brick_ldd(brickbybrick_repo, diagnostics):
    return LaunchAnalyzer(str(brickbybrick_repo), BRICK_PACKAGES, diagnostics).build_launch_dependency_description(
        [BRICK_ROOT]
    )


def write(path, source):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(textwrap.dedent(source), encoding="utf-8")


def instance(instance_id, exec_name, package=None, **kwargs):
    return NodeInstanceEntry(id=instance_id, exec_name=exec_name, package=package, **kwargs)


def classifier(classifier_id, class_name, execution):
    return AtomicRosNodeClassifier(
        id=classifier_id,
        class_name=class_name,
        source_file_paths=[f"src/{class_name.lower()}.py"],
        compile_type=CompileType.PYTHON,
        execution=execution,
    )


class TestNestedLaunch:
    def test_launch_file_entries(self, nested_ldd):
        lf1, lf2 = nested_ldd.list_launch_file
        assert lf1.id == "lf1" and lf1.type == "main.launch.py"
        assert lf1.nodes == ["n1", "n3"]
        assert lf1.included_launch_files == ["lf2"]
        assert lf1.namespace == {"main": ["lf2"], "backup": ["n3"]}
        assert lf2.id == "lf2" and lf2.type == "sub.launch.py"
        assert lf2.nodes == ["n2"]
        assert lf2.namespace == {}
        assert nested_ldd.roots == ["lf1"]

    def test_node_instances(self, nested_ldd):
        found = [
            (n.id, n.exec_name, n.node_name, n.namespace, n.package) for n in nested_ldd.list_atom_node_instances
        ]
        assert found == [
            ("n1", "example", "example_node", "", "example_pkg"),
            ("n2", "example_2_exec", "Tom", "/main", "example_pkg"),
            ("n3", "example_2_exec", "Tom", "/backup", "example_pkg"),
        ]
        assert nested_ldd.instance("n2").remappings == [("chatter", "/chatter")]
        assert nested_ldd.instance("n3").remappings == []

    def test_description_is_valid(self, nested_ldd):
        assert validate_ldd(nested_ldd) == []

    def test_parse_single_file(self, nested_analyzer):
        result = nested_analyzer.parse_launch_file(NESTED_ROOT)
        assert result.entry.id == "lf1"
        assert result.entry.nodes == ["n1", "n2"]
        assert result.entry.included_launch_files == ["lf2"]
        assert result.entry.namespace == {"main": ["lf2"], "backup": ["n2"]}
        assert len(result.includes) == 1
        assert [n.namespace for n in result.nodes] == ["", "/backup"]

    def test_discover_roots(self, nested_analyzer):
        assert nested_analyzer.discover_launch_files() == [
            "example_pkg/launch/main.launch.py",
            "example_pkg/launch/sub.launch.py",
        ]
        assert nested_analyzer.discover_roots() == [NESTED_ROOT]


class TestSingleLaunchFile:
    def test_ten_instances_in_global_namespace(self, brick_ldd):
        assert [e.id for e in brick_ldd.list_launch_file] == ["lf1"]
        instances = brick_ldd.list_atom_node_instances
        assert [n.id for n in instances] == [f"n{i}" for i in range(1, 11)]
        assert [n.node_name for n in instances] == [
            "camera_driver",
            "brick_detector",
            "pose_estimator",
            "task_planner",
            "grasp_planner",
            "motion_planner",
            "arm_controller",
            "gripper_controller",
            "safety_monitor",
            "supervisor",
        ]
        assert all(n.namespace == "" for n in instances)
        assert brick_ldd.list_launch_file[0].namespace == {}

    def test_node_kind_follows_package_build_type(self, tmp_path, diagnostics):
        write(
            tmp_path / "launch" / "main.launch.xml",
            """
            <launch>
              <node pkg="py_pkg" exec="talker"/>
              <node pkg="cpp_pkg" exec="listener"/>
              <node pkg="mixed_pkg" exec="relay"/>
              <node pkg="elsewhere" exec="monitor"/>
            </launch>
            """,
        )
        build_types = {
            "py_pkg": BuildType.PYTHON_PACKAGE,
            "cpp_pkg": BuildType.CPP_PACKAGE,
            "mixed_pkg": BuildType.MIXED,
        }
        ldd = LaunchAnalyzer(str(tmp_path), {}, diagnostics, build_types).build_launch_dependency_description(
            ["launch/main.launch.xml"]
        )
        assert [(n.exec_name, n.node_kind) for n in ldd.list_atom_node_instances] == [
            ("talker", CompileType.PYTHON),
            ("listener", CompileType.CPP),
            ("relay", None),
            ("monitor", None),
        ]

    def test_python_packages_give_python_instances(self, brickbybrick_repo, diagnostics):
        build_types = {name: BuildType.PYTHON_PACKAGE for name in BRICK_PACKAGES}
        ldd = LaunchAnalyzer(
            str(brickbybrick_repo), BRICK_PACKAGES, diagnostics, build_types
        ).build_launch_dependency_description([BRICK_ROOT])
        assert {n.node_kind for n in ldd.list_atom_node_instances} == {CompileType.PYTHON}


class TestIncludeHandling:
    def test_include_cycle(self, tmp_path, diagnostics):
        include = """
            from launch import LaunchDescription
            from launch.actions import IncludeLaunchDescription
            from launch.launch_description_sources import PythonLaunchDescriptionSource
            from launch.substitutions import PathJoinSubstitution, ThisLaunchFileDir

            def generate_launch_description():
                return LaunchDescription([
                    IncludeLaunchDescription(
                        PythonLaunchDescriptionSource(PathJoinSubstitution([ThisLaunchFileDir(), "{target}"]))
                    ),
                ])
            """
        write(tmp_path / "launch" / "a.launch.py", include.replace("{target}", "b.launch.py"))
        write(tmp_path / "launch" / "b.launch.py", include.replace("{target}", "a.launch.py"))
        analyzer = LaunchAnalyzer(str(tmp_path), {}, diagnostics)

        with pytest.raises(IncludeCycleError) as excinfo:
            analyzer.build_launch_dependency_description(["launch/a.launch.py"])
        assert excinfo.value.cycle == ["a.launch.py", "b.launch.py", "a.launch.py"]
        assert "a.launch.py→b.launch.py→a.launch.py" in str(excinfo.value)

    def test_discover_roots_reports_cycle(self, tmp_path, diagnostics):
        write(tmp_path / "p" / "launch" / "a.launch.xml", '<launch><include file="$(dirname)/b.launch.xml"/></launch>')
        write(tmp_path / "p" / "launch" / "b.launch.xml", '<launch><include file="$(dirname)/a.launch.xml"/></launch>')
        with pytest.raises(IncludeCycleError):
            LaunchAnalyzer(str(tmp_path), {"p": "p"}, diagnostics).discover_roots()

    def test_missing_include_is_recorded(self, tmp_path, diagnostics):
        write(
            tmp_path / "launch" / "main.launch.py",
            """
            from launch import LaunchDescription
            from launch.actions import IncludeLaunchDescription
            from launch.launch_description_sources import PythonLaunchDescriptionSource
            from launch.substitutions import PathJoinSubstitution
            from launch_ros.substitutions import FindPackageShare

            def generate_launch_description():
                return LaunchDescription([
                    IncludeLaunchDescription(PythonLaunchDescriptionSource(
                        PathJoinSubstitution([FindPackageShare("ghost"), "launch", "x.launch.py"])
                    )),
                ])
            """,
        )
        ldd = LaunchAnalyzer(str(tmp_path), {}, diagnostics).build_launch_dependency_description(
            ["launch/main.launch.py"]
        )
        assert ldd.list_launch_file[0].included_launch_files == []
        assert [(u.launch_file_id, u.reference) for u in ldd.unresolved_includes] == [
            ("lf1", "$(find-pkg-share ghost)/launch/x.launch.py")
        ]
        assert len(diagnostics.by_code("include-unresolved")) == 1

    def test_unreadable_launch_file_is_not_a_root(self, brickbybrick_repo, tmp_path, diagnostics):
        repo = tmp_path / "repo"
        shutil.copytree(brickbybrick_repo, repo)
        (repo / "bbb_bringup" / "launch" / "broken.launch.py").write_bytes(b"\xff\xfe\x00bad")
        analyzer = LaunchAnalyzer(str(repo), BRICK_PACKAGES, diagnostics)

        roots = analyzer.discover_roots()
        assert roots == [BRICK_ROOT]
        assert [d.file for d in diagnostics.by_code("launch-unreadable")] == ["bbb_bringup/launch/broken.launch.py"]
        ldd = analyzer.build_launch_dependency_description(roots)
        assert len(ldd.list_atom_node_instances) == 10

    def test_unreadable_include_is_recorded(self, tmp_path, diagnostics):
        write(
            tmp_path / "launch" / "main.launch.xml",
            """
            <launch>
              <include file="$(dirname)/broken.launch.xml"/>
              <node pkg="demo" exec="talker"/>
            </launch>
            """,
        )
        (tmp_path / "launch" / "broken.launch.xml").write_bytes(b"\xff\xfe\x00bad")
        ldd = LaunchAnalyzer(str(tmp_path), {}, diagnostics).build_launch_dependency_description(
            ["launch/main.launch.xml"]
        )
        assert [e.id for e in ldd.list_launch_file] == ["lf1"]
        assert ldd.list_launch_file[0].included_launch_files == []
        assert [(u.launch_file_id, u.reference) for u in ldd.unresolved_includes] == [
            ("lf1", "launch/broken.launch.xml")
        ]
        assert [n.exec_name for n in ldd.list_atom_node_instances] == ["talker"]
        assert len(diagnostics.by_code("launch-unreadable")) == 1

    def test_unreadable_root(self, tmp_path, diagnostics):
        (tmp_path / "launch").mkdir()
        (tmp_path / "launch" / "broken.launch.py").write_bytes(b"\xff\xfe\x00bad")
        with pytest.raises(InputError, match="cannot be read"):
            LaunchAnalyzer(str(tmp_path), {}, diagnostics).build_launch_dependency_description(
                ["launch/broken.launch.py"]
            )

    def test_include_arguments_reach_child(self, tmp_path, diagnostics):
        write(
            tmp_path / "launch" / "main.launch.xml",
            """
            <launch>
              <include file="$(dirname)/robot.launch.xml">
                <arg name="robot" value="robot1"/>
              </include>
              <include file="$(dirname)/robot.launch.xml"/>
            </launch>
            """,
        )
        write(
            tmp_path / "launch" / "robot.launch.xml",
            """
            <launch>
              <arg name="robot" default="spare"/>
              <node pkg="demo" exec="driver" name="driver" namespace="$(var robot)" if="$(var enabled)"/>
            </launch>
            """,
        )
        ldd = LaunchAnalyzer(str(tmp_path), {}, diagnostics).build_launch_dependency_description(
            ["launch/main.launch.xml"]
        )
        assert [e.id for e in ldd.list_launch_file] == ["lf1", "lf2", "lf3"]
        assert [n.namespace for n in ldd.list_atom_node_instances] == ["/robot1", "/spare"]
        assert ldd.list_launch_file[1].namespace == {"robot1": ["n1"]}
        assert len(diagnostics.by_code("conditional")) == 2

    def test_missing_root(self, nested_analyzer):
        with pytest.raises(InputError):
            nested_analyzer.build_launch_dependency_description(["example_pkg/launch/ghost.launch.py"])

    def test_no_roots(self, nested_analyzer):
        with pytest.raises(InputError):
            nested_analyzer.build_launch_dependency_description([])


class TestIsLaunchFile:
    @pytest.mark.parametrize(
        "path,expected",
        [
            ("pkg/launch/a.launch.py", True),
            ("pkg/config/a.launch.xml", True),
            ("pkg/launch/robot.py", True),
            ("pkg/launch/__init__.py", False),
            ("pkg/config/params.yaml", False),
        ],
    )
    def test_detection(self, tmp_path, path, expected):
        assert is_launch_file(tmp_path / path) is expected


class TestValidateLdd:
    def test_node_owned_twice(self):
        ldd = LaunchDependencyDescription(
            list_launch_file=[
                LaunchFileEntry(id="lf1", type="a.launch.py", nodes=["n1"], included_launch_files=["lf2"]),
                LaunchFileEntry(id="lf2", type="b.launch.py", nodes=["n1"]),
            ],
            list_atom_node_instances=[instance("n1", "talker")],
            roots=["lf1"],
        )
        assert [v.invariant for v in validate_ldd(ldd)] == ["single-owner"]

    def test_unknown_reference_and_wrong_roots(self):
        ldd = LaunchDependencyDescription(
            list_launch_file=[LaunchFileEntry(id="lf1", type="a.launch.py", nodes=["n9"])],
            roots=[],
        )
        invariants = [v.invariant for v in validate_ldd(ldd)]
        assert "references-exist" in invariants
        assert "roots-in-degree-zero" in invariants

    def test_scope_soundness(self):
        ldd = LaunchDependencyDescription(
            list_launch_file=[LaunchFileEntry(id="lf1", type="a.launch.py", nodes=["n1"], namespace={"x": ["n2"]})],
            list_atom_node_instances=[instance("n1", "talker")],
            roots=["lf1"],
        )
        assert [v.invariant for v in validate_ldd(ldd)] == ["scope-soundness"]

    def test_duplicate_names_and_relative_namespace(self):
        ldd = LaunchDependencyDescription(
            list_launch_file=[LaunchFileEntry(id="lf1", type="a.launch.py", nodes=["n1", "n2"])],
            list_atom_node_instances=[
                instance("n1", "talker", node_name="talker", namespace="robot"),
                instance("n2", "talker", node_name="talker", namespace="robot"),
            ],
            roots=["lf1"],
        )
        invariants = [v.invariant for v in validate_ldd(ldd)]
        assert "instance-distinctness" in invariants
        assert "namespace-absolute" in invariants

    def test_emit_refuses_invalid_description(self):
        ldd = LaunchDependencyDescription(
            list_launch_file=[LaunchFileEntry(id="lf1", type="a.launch.py", nodes=["n9"])], roots=["lf1"]
        )
        with pytest.raises(ModelValidationError):
            emit_launch_dependency_json(ldd)


class TestLaunchArtifact:
    def test_key_order(self, nested_ldd):
        document = json.loads(emit_launch_dependency_json(nested_ldd))
        assert list(document) == ["list_launch_file", "list_atom_node_instances", "roots", "unresolved_includes"]
        assert list(document["list_launch_file"][0]) == ["id", "type", "nodes", "included_launch_files", "namespace"]
        assert list(document["list_atom_node_instances"][0])[:6] == [
            "id",
            "node_kind",
            "exec_name",
            "class_name",
            "node_name",
            "namespace",
        ]

    def test_reload(self, nested_ldd, tmp_path):
        path = tmp_path / "launch_dependencies.json"
        text = emit_launch_dependency_json(nested_ldd)
        path.write_text(text, encoding="utf-8")
        reloaded = load_ldd(path)
        assert reloaded == nested_ldd
        assert dump_ldd(reloaded) == text


class TestLinking:
    def test_nested_instances_link_by_execution(self, nested_launch_repo, nested_ldd, diagnostics):
        inventory = NodeExtractor(str(nested_launch_repo), diagnostics).build_inventory()
        links = link_instances_to_classifiers(nested_ldd, inventory, diagnostics)
        assert links == {"n1": "arc_1", "n2": "arc_2", "n3": "arc_2"}

        annotated = annotate_class_names(nested_ldd, links, inventory)
        assert [n.class_name for n in annotated.list_atom_node_instances] == [
            "ExampleNode",
            "Example2Node",
            "Example2Node",
        ]
        assert all(n.node_kind == CompileType.PYTHON for n in annotated.list_atom_node_instances)
        assert nested_ldd.instance("n1").class_name is None

    def test_brickbybrick_bijection(self, brickbybrick_repo, brick_ldd, diagnostics):
        inventory = NodeExtractor(str(brickbybrick_repo), diagnostics).build_inventory()
        links = link_instances_to_classifiers(brick_ldd, inventory, diagnostics)
        assert sorted(links.values()) == sorted(f"arc_{i}" for i in range(1, 11))
        assert links["n1"] == "arc_6"
        assert links["n10"] == "arc_1"
        assert diagnostics.by_code("link-unmatched") == []

    def test_package_narrows_execution_match(self, diagnostics):
        inventory = NodeInventory(
            list_packages=[
                PackageEntry(package_name="a", list_atomic_ros_node_classifiers=[classifier("arc_1", "Driver", "driver")]),
                PackageEntry(package_name="b", list_atomic_ros_node_classifiers=[classifier("arc_2", "Driver", "driver")]),
            ]
        )
        ldd = LaunchDependencyDescription(list_atom_node_instances=[instance("n1", "driver", package="b")])
        assert link_instances_to_classifiers(ldd, inventory, diagnostics) == {"n1": "arc_2"}
        assert diagnostics.by_code("link-ambiguous") == []

    def test_ambiguous_match_takes_lowest_id(self, diagnostics):
        inventory = NodeInventory(
            list_packages=[
                PackageEntry(package_name="a", list_atomic_ros_node_classifiers=[classifier("arc_10", "Driver", "driver")]),
                PackageEntry(package_name="b", list_atomic_ros_node_classifiers=[classifier("arc_2", "Driver", "driver")]),
            ]
        )
        ldd = LaunchDependencyDescription(list_atom_node_instances=[instance("n1", "driver")])
        assert link_instances_to_classifiers(ldd, inventory, diagnostics) == {"n1": "arc_2"}
        assert len(diagnostics.by_code("link-ambiguous")) == 1

    def test_class_name_fallback(self, diagnostics):
        inventory = NodeInventory(
            list_packages=[
                PackageEntry(package_name="demo", list_atomic_ros_node_classifiers=[classifier("arc_1", "Talker", None)])
            ]
        )
        ldd = LaunchDependencyDescription(
            list_atom_node_instances=[instance("n1", "demo::Talker", package="demo", node_kind=CompileType.CPP)]
        )
        assert link_instances_to_classifiers(ldd, inventory, diagnostics) == {"n1": "arc_1"}

    def test_unmatched_instance(self, example_inventory, diagnostics):
        ldd = LaunchDependencyDescription(list_atom_node_instances=[instance("n1", "ghost", package="nowhere")])
        links = link_instances_to_classifiers(ldd, example_inventory, diagnostics)
        assert links == {"n1": None}
        assert len(diagnostics.by_code("link-unmatched")) == 1
        linked = linked_instances(ldd, links, example_inventory)
        assert linked[0].classifier is None
