import rclpy
from rclpy.node import Node
from sensor_msgs.msg import CameraInfo, Image
from std_msgs.msg import Bool


class CameraDriver(Node):
    def __init__(self):
        super().__init__("camera_driver")
        self.color_pub = self.create_publisher(Image, "camera/color/image_raw", 10)
        self.depth_pub = self.create_publisher(Image, "camera/depth/image_raw", 10)
        self.info_pub = self.create_publisher(CameraInfo, "camera/camera_info", 10)
        self.create_subscription(Bool, "camera/trigger", self.on_trigger, 10)

    def on_trigger(self, msg):
        if not msg.data:
            return
        stamp = self.get_clock().now().to_msg()
        for publisher in (self.color_pub, self.depth_pub):
            image = Image()
            image.header.stamp = stamp
            publisher.publish(image)
        info = CameraInfo()
        info.header.stamp = stamp
        self.info_pub.publish(info)


def main(args=None):
    rclpy.init(args=args)
    node = CameraDriver()
    rclpy.spin(node)
    node.destroy_node()
    rclpy.shutdown()
