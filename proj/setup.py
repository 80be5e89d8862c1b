import os
import subprocess
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class cmake_extension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class cmake_build_ext(build_ext):
    # Delegates the extension build to the repository's CMake project; only
    # the _core module is built (SKBUILD trims the CLI and test targets).
    def build_extension(self, ext):
        extdir = os.path.abspath(os.path.dirname(self.get_ext_fullpath(ext.name)))
        source = os.path.abspath(os.path.dirname(__file__))
        build_temp = os.path.abspath(self.build_temp)
        os.makedirs(build_temp, exist_ok=True)
        subprocess.run(
            [
                "cmake",
                "-S", source,
                "-B", build_temp,
                "-DSKBUILD=ON",
                "-DCMAKE_BUILD_TYPE=Release",
                f"-DCMAKE_LIBRARY_OUTPUT_DIRECTORY={extdir}",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", build_temp, "--target", "_core", "-j"],
            check=True,
        )


setup(
    ext_modules=[cmake_extension("memprot._core")],
    cmdclass={"build_ext": cmake_build_ext},
)
