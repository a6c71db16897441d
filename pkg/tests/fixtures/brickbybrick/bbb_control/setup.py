from setuptools import setup

package_name = "bbb_control"

setup(
    name=package_name,
    version="0.1.0",
    packages=[package_name],
    data_files=[
        ("share/ament_index/resource_index/packages", ["resource/" + package_name]),
        ("share/" + package_name, ["package.xml"]),
    ],
    install_requires=["setuptools"],
    zip_safe=True,
    license="Apache-2.0",
    tests_require=["pytest"],
    entry_points={
        "console_scripts": [
            "arm_controller = bbb_control.arm_controller:main",
            "gripper_controller = bbb_control.gripper_controller:main",
            "safety_monitor = bbb_control.safety_monitor:main",
        ],
    },
)
