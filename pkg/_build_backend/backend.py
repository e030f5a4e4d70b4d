"""In-tree PEP 517 backend.

setup.py in this repository is an interactive helper script (``python setup.py``),
not a setuptools build script, so the build must not execute it. This backend
delegates to setuptools.build_meta but runs a plain ``setup()`` call instead;
all metadata lives in pyproject.toml.
"""

from setuptools import build_meta as _orig


class _Backend(_orig._BuildMetaBackend):
    def run_setup(self, setup_script="setup.py"):
        import setuptools

        setuptools.setup()


_backend = _Backend()

get_requires_for_build_wheel = _backend.get_requires_for_build_wheel
get_requires_for_build_sdist = _backend.get_requires_for_build_sdist
get_requires_for_build_editable = _backend.get_requires_for_build_editable
prepare_metadata_for_build_wheel = _backend.prepare_metadata_for_build_wheel
prepare_metadata_for_build_editable = _backend.prepare_metadata_for_build_editable
build_wheel = _backend.build_wheel
build_sdist = _backend.build_sdist
build_editable = _backend.build_editable
