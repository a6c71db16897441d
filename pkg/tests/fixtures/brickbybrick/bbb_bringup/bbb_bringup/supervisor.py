import rclpy
from rclpy.node import Node
from std_msgs.msg import Bool, Empty, Float64, Int32, String


class Supervisor(Node):
    """Sequences the disassembly cell and stops it on a safety event."""

    def __init__(self):
        super().__init__("supervisor")
        self.trigger_pub = self.create_publisher(Bool, "camera/trigger", 10)
        self.status_pub = self.create_publisher(String, "supervisor/status", 10)
        self.heartbeat_pub = self.create_publisher(Empty, "supervisor/heartbeat", 10)
        self.create_subscription(Int32, "bricks/count", self.on_count, 10)
        self.create_subscription(String, "plan/state", self.on_plan_state, 10)
        self.create_subscription(Float64, "plan/progress", self.on_progress, 10)
        self.create_subscription(Bool, "safety/stop", self.on_stop, 10)
        self.timer = self.create_timer(1.0, self.on_tick)
        self.stopped = False
        self.remaining = 0

    def on_tick(self):
        self.heartbeat_pub.publish(Empty())
        if not self.stopped:
            self.trigger_pub.publish(Bool(data=True))

    def on_count(self, msg):
        self.remaining = msg.data

    def on_plan_state(self, msg):
        self.status_pub.publish(String(data=f"plan: {msg.data}"))

    def on_progress(self, msg):
        self.get_logger().debug(f"progress {msg.data:.2f}")

    def on_stop(self, msg):
        self.stopped = msg.data
        if self.stopped:
            self.status_pub.publish(String(data="stopped"))


def main(args=None):
    rclpy.init(args=args)
    node = Supervisor()
    rclpy.spin(node)
    node.destroy_node()
    rclpy.shutdown()
