from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "gsmix._gsmix",
    sources=[
        "src/numerics.cpp",
        "src/sub_density.cpp",
        "src/design.cpp",
        "src/estimation.cpp",
        "src/simulation.cpp",
        "src/asymptotics.cpp",
        "src/design_io.cpp",
        "python/bindings.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
