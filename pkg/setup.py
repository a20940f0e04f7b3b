from setuptools import setup, find_packages

import nv_magnetometry as nv

setup(
    name=nv.__name__,
    version=nv.__version__,
    author=nv.__author__,
    author_email=nv.__email__,
    packages=find_packages(exclude=["tests", "tests.*"]),
    license="MIT",
    description="Simulation, waveform synthesis and analysis of pulsed NV magnetometry experiments",
    install_requires=["numpy", "scipy"],
    extras_require={"test": ["pytest"]},
    entry_points={
        "console_scripts": [
            "nv-magnetometry = nv_magnetometry.cli.main:main",
        ]
    },
)
