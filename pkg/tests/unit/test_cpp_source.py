from app.models import PortKind
from app.services.cpp_source import CppSourceScanner

CAMERA_NODE = """
#include <rclcpp/rclcpp.hpp>
#include <sensor_msgs/msg/image.hpp>
#include <std_msgs/msg/string.hpp>
#include <std_srvs/srv/trigger.hpp>

using std::placeholders::_1;
using std::placeholders::_2;

class Camera : public rclcpp::Node
{
public:
  Camera() : Node("camera")
  {
    image_sub_ = this->create_subscription<sensor_msgs::msg::Image>(
      "camera/rgb", 10, std::bind(&Camera::on_image, this, _1));
    status_pub_ = this->create_publisher<std_msgs::msg::String>("status", 10);
    reset_srv_ = this->create_service<std_srvs::srv::Trigger>(
      "reset", std::bind(&Camera::handle_reset, this, _1, _2));
    peer_ = this->create_client<std_srvs::srv::Trigger>("peer/reset");
  }

private:
  void on_image(const sensor_msgs::msg::Image::SharedPtr msg) {}
  void handle_reset(
    const std::shared_ptr<std_srvs::srv::Trigger::Request> request,
    std::shared_ptr<std_srvs::srv::Trigger::Response> response) {}

  rclcpp::Subscription<sensor_msgs::msg::Image>::SharedPtr image_sub_;
  rclcpp::Publisher<std_msgs::msg::String>::SharedPtr status_pub_;
  rclcpp::Service<std_srvs::srv::Trigger>::SharedPtr reset_srv_;
  rclcpp::Client<std_srvs::srv::Trigger>::SharedPtr peer_;
};

int main(int argc, char ** argv)
{
  rclcpp::init(argc, argv);
  rclcpp::spin(std::make_shared<Camera>());
  rclcpp::shutdown();
  return 0;
}
"""

SPLIT_SOURCE = """
#include "talker/talker.hpp"

static const char * TOPIC = "chatter";

Talker::Talker() : rclcpp::Node("talker")
{
  publisher_ = create_publisher<std_msgs::msg::String>(TOPIC, 10);
  timer_ = create_wall_timer(std::chrono::milliseconds(500), [this]() { tick(); });
}
"""


class TestCppNodeClasses:
    def test_inline_class(self):
        result = CppSourceScanner().scan("camera/src/camera.cpp", CAMERA_NODE)
        assert result.node_classes == {"Camera"}
        assert result.node_names == {"Camera": "camera"}
        assert result.main_constructs == ["Camera"]
        assert not result.is_header

    def test_ports_in_declaration_order(self):
        ports, diagnostics = CppSourceScanner().ports_in_source("camera/src/camera.cpp", CAMERA_NODE)
        assert [(p.kind, p.interface_type, p.declared_name, p.callback_name) for p in ports] == [
            (PortKind.SUBSCRIBER, "sensor_msgs/msg/Image", "camera/rgb", "on_image"),
            (PortKind.PUBLISHER, "std_msgs/msg/String", "status", None),
            (PortKind.SERVICE_SERVER, "std_srvs/srv/Trigger", "reset", "handle_reset"),
            (PortKind.SERVICE_CLIENT, "std_srvs/srv/Trigger", "peer/reset", None),
        ]
        assert not [d for d in diagnostics if d.code.startswith("port-")]

    def test_out_of_class_constructor_and_constant_topic(self):
        result = CppSourceScanner().scan("talker/src/talker.cpp", SPLIT_SOURCE)
        assert "Talker" in result.classes_present
        assert result.node_names == {"Talker": "talker"}
        ports = [port for _, port in result.ports["Talker"]]
        assert [(p.kind, p.declared_name) for p in ports] == [(PortKind.PUBLISHER, "chatter")]

    def test_header_declares_node_class(self):
        header = """
        #pragma once
        #include <rclcpp/rclcpp.hpp>
        namespace demo {
        class Talker : public rclcpp::Node {
        public:
          Talker();
        private:
          void tick();
        };
        }
        """
        result = CppSourceScanner().scan("talker/include/talker/talker.hpp", header)
        assert result.is_header
        assert result.node_classes == {"Talker"}

    def test_lifecycle_base(self):
        source = """
        class Managed : public rclcpp_lifecycle::LifecycleNode {
        public:
          Managed() : LifecycleNode("managed") {}
        };
        """
        result = CppSourceScanner().scan("m.cpp", source)
        assert result.node_classes == {"Managed"}
        assert result.node_names == {"Managed": "managed"}

    def test_plain_class_is_not_a_node(self):
        result = CppSourceScanner().scan("util.cpp", "class Helper { public: int x; };")
        assert result.node_classes == set()

    def test_dynamic_topic_is_unresolved(self):
        source = """
        class Relay : public rclcpp::Node {
        public:
          Relay(const std::string & topic) : Node("relay") {
            pub_ = create_publisher<std_msgs::msg::String>(topic, 10);
          }
        };
        """
        result = CppSourceScanner().scan("relay.cpp", source)
        port = result.ports["Relay"][0][1]
        assert port.declared_name == "<unresolved:topic>"
        assert "port-name-unresolved" in [d.code for d in result.diagnostics]

    def test_lambda_callback(self):
        source = """
        class Echo : public rclcpp::Node {
        public:
          Echo() : Node("echo") {
            sub_ = create_subscription<std_msgs::msg::String>(
              "in", 10, [this](std_msgs::msg::String::SharedPtr msg) { (void)msg; });
          }
        };
        """
        result = CppSourceScanner().scan("echo.cpp", source)
        assert result.ports["Echo"][0][1].callback_name == "<lambda>"
