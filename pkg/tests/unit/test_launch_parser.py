import textwrap
from pathlib import Path

import pytest

from app.models import LaunchFormat
from app.services.launch_parser import (
    ArgumentRef,
    DeclareArgumentAction,
    GroupAction,
    IncludeAction,
    NodeAction,
    PackageShareRef,
    PushNamespaceAction,
    ResolutionContext,
    SetRemapAction,
    Text,
    UnresolvedAction,
    frontend_text,
    infer_format,
    literal,
    parse_launch_source,
    resolve_text,
)


def parse_py(source):
    return parse_launch_source("pkg/launch/x.launch.py", textwrap.dedent(source))


def render(text):
    return text.render() if text is not None else None


class TestInferFormat:
    @pytest.mark.parametrize(
        "name,expected",
        [
            ("a.launch.py", LaunchFormat.SCRIPT),
            ("a.launch.xml", LaunchFormat.XML),
            ("a.launch.yaml", LaunchFormat.YAML),
            ("a.YML", LaunchFormat.YAML),
        ],
    )
    def test_by_suffix(self, name, expected):
        assert infer_format(Path(name)) == expected

    def test_unknown_suffix(self):
        with pytest.raises(ValueError):
            infer_format(Path("a.launch"))


class TestPythonLaunch:
    def test_nodes_in_launch_description(self):
        parsed = parse_py(
            """
            from launch import LaunchDescription
            from launch_ros.actions import Node

            def generate_launch_description():
                return LaunchDescription([
                    Node(package="demo", executable="talker", name="talker", namespace="ns",
                         remappings=[("chatter", "/chatter")], parameters=["params.yaml", {"rate": 2}]),
                    Node(package="demo", executable="listener"),
                ])
            """
        )
        assert parsed.format == LaunchFormat.SCRIPT
        first, second = parsed.actions
        assert isinstance(first, NodeAction)
        assert render(first.package) == "demo"
        assert render(first.executable) == "talker"
        assert render(first.name) == "talker"
        assert render(first.namespace) == "ns"
        assert [(render(a), render(b)) for a, b in first.remappings] == [("chatter", "/chatter")]
        assert [render(p) for p in first.parameters] == ["params.yaml"]
        assert second.name is None
        assert parsed.diagnostics == []

    def test_add_action_and_variables(self):
        parsed = parse_py(
            """
            from launch import LaunchDescription
            from launch_ros.actions import Node

            def generate_launch_description():
                ld = LaunchDescription()
                talker = Node(package="demo", executable="talker")
                ld.add_action(talker)
                return ld
            """
        )
        assert [render(a.executable) for a in parsed.actions] == ["talker"]

    def test_group_with_namespace_and_remap(self):
        parsed = parse_py(
            """
            from launch import LaunchDescription
            from launch.actions import GroupAction
            from launch_ros.actions import Node, PushRosNamespace, SetRemap

            def generate_launch_description():
                return LaunchDescription([
                    GroupAction([
                        PushRosNamespace("main"),
                        SetRemap(src="a", dst="b"),
                        Node(package="demo", executable="talker"),
                    ]),
                ])
            """
        )
        group = parsed.actions[0]
        assert isinstance(group, GroupAction) and group.scoped
        push, remap, node = group.actions
        assert isinstance(push, PushNamespaceAction) and render(push.namespace) == "main"
        assert isinstance(remap, SetRemapAction)
        assert (render(remap.source), render(remap.target)) == ("a", "b")
        assert isinstance(node, NodeAction)

    def test_include_with_package_share_and_arguments(self):
        parsed = parse_py(
            """
            import os
            from launch import LaunchDescription
            from launch.actions import IncludeLaunchDescription
            from launch.launch_description_sources import PythonLaunchDescriptionSource
            from launch.substitutions import PathJoinSubstitution
            from launch_ros.substitutions import FindPackageShare

            def generate_launch_description():
                return LaunchDescription([
                    IncludeLaunchDescription(
                        PythonLaunchDescriptionSource(
                            PathJoinSubstitution([FindPackageShare("demo"), "launch", "sub.launch.py"])
                        ),
                        launch_arguments={"robot": "r1"}.items(),
                    ),
                ])
            """
        )
        include = parsed.actions[0]
        assert isinstance(include, IncludeAction)
        assert include.path.parts == (PackageShareRef("demo"), "/", "launch", "/", "sub.launch.py")
        assert [(name, render(value)) for name, value in include.arguments] == [("robot", "r1")]

    def test_launch_arguments(self):
        parsed = parse_py(
            """
            from launch import LaunchDescription
            from launch.actions import DeclareLaunchArgument
            from launch.substitutions import LaunchConfiguration
            from launch_ros.actions import Node

            def generate_launch_description():
                return LaunchDescription([
                    DeclareLaunchArgument("robot", default_value="r1"),
                    Node(package="demo", executable="driver", namespace=LaunchConfiguration("robot")),
                ])
            """
        )
        declared = parsed.declared_arguments()
        assert [(d.name, render(d.default)) for d in declared] == [("robot", "r1")]
        node = parsed.actions[1]
        assert node.namespace.parts == (ArgumentRef("robot", None),)

    def test_condition_is_recorded(self):
        parsed = parse_py(
            """
            from launch import LaunchDescription
            from launch.conditions import IfCondition
            from launch.substitutions import LaunchConfiguration
            from launch_ros.actions import Node

            def generate_launch_description():
                return LaunchDescription([
                    Node(package="demo", executable="rviz", condition=IfCondition(LaunchConfiguration("gui"))),
                ])
            """
        )
        assert parsed.actions[0].condition == "IfCondition(LaunchConfiguration('gui'))"

    def test_dynamic_constructs_are_diagnosed(self):
        parsed = parse_py(
            """
            from launch import LaunchDescription
            from launch.actions import OpaqueFunction
            from launch_ros.actions import Node

            def generate_launch_description():
                nodes = []
                for index in range(3):
                    nodes.append(Node(package="demo", executable="worker"))
                return LaunchDescription(nodes + [OpaqueFunction(function=print)])
            """
        )
        assert [d.code for d in parsed.diagnostics] == ["launch-unresolved"]
        assert isinstance(parsed.actions[-1], UnresolvedAction)

    def test_concatenation_with_none_is_unresolved(self):
        parsed = parse_py(
            """
            from launch import LaunchDescription
            from launch_ros.actions import Node

            def generate_launch_description():
                prefix = None
                return LaunchDescription([
                    Node(package="demo", executable="talker", name=prefix + "talker"),
                ])
            """
        )
        (node,) = parsed.actions
        assert isinstance(node, NodeAction)
        assert render(node.executable) == "talker"
        assert render(node.name).startswith("<unresolved:")
        assert resolve_text(node.name, ResolutionContext(arguments={}, this_dir="", package_roots={})) is None
        assert [d.code for d in parsed.diagnostics] == ["launch-unresolved"]

    def test_composable_nodes(self):
        parsed = parse_py(
            """
            from launch import LaunchDescription
            from launch_ros.actions import ComposableNodeContainer
            from launch_ros.descriptions import ComposableNode

            def generate_launch_description():
                return LaunchDescription([
                    ComposableNodeContainer(
                        name="container", namespace="", package="rclcpp_components",
                        executable="component_container",
                        composable_node_descriptions=[
                            ComposableNode(package="demo", plugin="demo::Talker", name="talker"),
                        ],
                    ),
                ])
            """
        )
        container = parsed.actions[0]
        assert isinstance(container, GroupAction) and not container.scoped
        assert render(container.actions[0].plugin) == "demo::Talker"
        assert render(container.actions[0].executable) == "demo::Talker"

    def test_missing_entry_point(self):
        parsed = parse_py("x = 1\n")
        assert parsed.actions == []
        assert [d.code for d in parsed.diagnostics] == ["launch-entry-missing"]

    def test_syntax_error(self):
        parsed = parse_py("def generate_launch_description(:\n")
        assert [d.code for d in parsed.diagnostics] == ["launch-unparseable"]

    def test_empty_launch_description(self):
        parsed = parse_py(
            """
            from launch import LaunchDescription

            def generate_launch_description():
                return LaunchDescription([])
            """
        )
        assert parsed.actions == []
        assert parsed.diagnostics == []


class TestXmlLaunch:
    def test_nodes_groups_and_includes(self):
        source = """
<launch>
  <arg name="robot" default="r1"/>
  <node pkg="demo" exec="talker" name="talker" namespace="$(var robot)">
    <remap from="chatter" to="/chatter"/>
    <param from="$(find-pkg-share demo)/config/talker.yaml"/>
  </node>
  <group>
    <push-ros-namespace namespace="main"/>
    <include file="$(find-pkg-share demo)/launch/sub.launch.xml">
      <arg name="robot" value="r2"/>
    </include>
  </group>
  <group ns="backup" scoped="false">
    <node pkg="demo" exec="listener" if="$(var gui)"/>
  </group>
  <executable cmd="ls"/>
  <unknown-tag/>
</launch>
"""
        parsed = parse_launch_source("demo/launch/main.launch.xml", source)
        arg, node, group, backup = parsed.actions
        assert isinstance(arg, DeclareArgumentAction) and render(arg.default) == "r1"
        assert node.namespace.parts == (ArgumentRef("robot"),)
        assert [(render(a), render(b)) for a, b in node.remappings] == [("chatter", "/chatter")]
        assert [render(p) for p in node.parameters] == ["$(find-pkg-share demo)/config/talker.yaml"]
        assert isinstance(group.actions[0], PushNamespaceAction)
        include = group.actions[1]
        assert isinstance(include, IncludeAction)
        assert [(n, render(v)) for n, v in include.arguments] == [("robot", "r2")]
        assert not backup.scoped
        assert render(backup.actions[0].namespace) == "backup"
        assert backup.actions[1].condition == "if=$(var gui)"
        assert [d.code for d in parsed.diagnostics] == ["launch-unrecognized"]

    def test_malformed_xml(self):
        parsed = parse_launch_source("a.launch.xml", "<launch><node></launch>")
        assert [d.code for d in parsed.diagnostics] == ["launch-unparseable"]


class TestYamlLaunch:
    def test_nodes_and_groups(self):
        source = """
launch:
  - arg:
      name: robot
      default: r1
  - node:
      pkg: demo
      exec: talker
      name: talker
      remap:
        - from: chatter
          to: /chatter
  - group:
      children:
        - push_ros_namespace:
            namespace: main
        - include:
            file: $(find-pkg-share demo)/launch/sub.launch.yaml
"""
        parsed = parse_launch_source("demo/launch/main.launch.yaml", source)
        arg, node, group = parsed.actions
        assert arg.name == "robot"
        assert render(node.executable) == "talker"
        assert [(render(a), render(b)) for a, b in node.remappings] == [("chatter", "/chatter")]
        assert isinstance(group.actions[0], PushNamespaceAction)
        assert isinstance(group.actions[1], IncludeAction)

    def test_empty_document(self):
        parsed = parse_launch_source("a.launch.yaml", "")
        assert parsed.actions == []


class TestSubstitutions:
    def test_frontend_text(self):
        text = frontend_text("$(find-pkg-share demo)/launch/$(var name).py")
        assert text.parts == (PackageShareRef("demo"), "/launch/", ArgumentRef("name"), ".py")
        assert text.render() == "$(find-pkg-share demo)/launch/$(var name).py"

    def test_unknown_substitution_renders_unresolved(self):
        assert frontend_text("$(env HOME)").render() == "<unresolved:$(env HOME)>"

    def test_resolve_text(self):
        context = ResolutionContext(arguments={"name": "sub"}, this_dir="demo/launch", package_roots={"demo": "demo"})
        text = frontend_text("$(find-pkg-share demo)/launch/$(var name).launch.py")
        assert resolve_text(text, context) == "demo/launch/sub.launch.py"

    def test_default_of_argument(self):
        context = ResolutionContext(arguments={}, this_dir=".", package_roots={})
        assert resolve_text(Text((ArgumentRef("x", literal("fallback")),)), context) == "fallback"

    def test_unknown_values_do_not_resolve(self):
        context = ResolutionContext(arguments={}, this_dir=".", package_roots={})
        assert resolve_text(frontend_text("$(var missing)"), context) is None
        assert resolve_text(frontend_text("$(find-pkg-share other)"), context) is None
        assert resolve_text(None, context) is None
