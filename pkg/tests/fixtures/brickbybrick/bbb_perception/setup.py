from setuptools import setup

package_name = "bbb_perception"

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
            "brick_detector = bbb_perception.brick_detector:main",
            "camera_driver = bbb_perception.camera_driver:main",
            "pose_estimator = bbb_perception.pose_estimator:main",
        ],
    },
)
