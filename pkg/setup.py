from setuptools import find_packages, setup

setup(
    packages=find_packages(include=["dcscreen", "dcscreen.*"]),
    zip_safe=False,
)
