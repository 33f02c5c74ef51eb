"""Builds the arboreal_py extension by delegating to cargo."""

import pathlib
import shutil
import subprocess

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

ROOT = pathlib.Path(__file__).resolve().parent


class CargoBuild(build_ext):
    """Compiles the cdylib crate and copies it to the extension path."""

    def build_extension(self, ext):
        subprocess.run(
            ["cargo", "build", "--release", "-p", "arboreal-py"],
            cwd=ROOT,
            check=True,
        )
        built = ROOT / "target" / "release" / "libarboreal_py.so"
        target = pathlib.Path(self.get_ext_fullpath(ext.name))
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, target)


setup(
    ext_modules=[Extension("arboreal_py", sources=[])],
    cmdclass={"build_ext": CargoBuild},
)
