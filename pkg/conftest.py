"""
Shared fixtures and hypothesis profiles.

Select a profile with HYPOTHESIS_PROFILE=fast|ci; `fast` is the default.
"""
import os

import hypothesis
import pytest

from corpus import NamePool, corpus_path
from frontend import load_program

hypothesis.settings.register_profile("fast", max_examples=100, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=1000, deadline=None,
                                     suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture(scope="session")
def load_corpus():
    """Load corpus program files by name, caching each combination."""
    cache = {}

    def load(*files):
        if files not in cache:
            cache[files] = load_program([corpus_path(f) for f in files])
        return cache[files]

    return load


@pytest.fixture
def ids():
    return NamePool("id")
