import glob
import os
import shutil
import subprocess
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = os.path.abspath(os.path.dirname(__file__))
        build_temp = os.path.abspath(self.build_temp)
        os.makedirs(build_temp, exist_ok=True)
        ext_path = os.path.abspath(self.get_ext_fullpath(ext.name))
        ext_dir = os.path.dirname(ext_path)
        os.makedirs(ext_dir, exist_ok=True)

        subprocess.check_call(
            [
                "cmake",
                "-S", source_dir,
                "-B", build_temp,
                "-DCMAKE_BUILD_TYPE=Release",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ]
        )
        subprocess.check_call(["cmake", "--build", build_temp, "--target", "_core", "-j"])

        built = glob.glob(os.path.join(build_temp, "python", "csknn", "_core*.so"))
        if not built:
            raise RuntimeError("cmake did not produce the _core module")
        shutil.copy2(built[0], ext_path)


setup(
    ext_modules=[CMakeExtension("csknn._core")],
    cmdclass={"build_ext": CMakeBuild},
)
