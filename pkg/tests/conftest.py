from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from biaslens.cascade import (
    CascadeSpec, EmbeddingConfig, LcConfig, OscConfig, PnocConfig, Variant,
)
from biaslens.corpus import make_folds
from biaslens.synthetic import synthetic_corpus


def tiny_spec(variant: Variant = Variant.BASELINE, **overrides) -> CascadeSpec:
    """Fast settings for plumbing-level tests; accuracy tests use their own."""
    kwargs = dict(
        variant=variant, seed=22,
        embedding=EmbeddingConfig(epochs=2, buckets=500),
        lc=LcConfig(n_trees=10),
        pnoc=PnocConfig(max_iterations=10),
        osc=OscConfig(epochs=4),
    )
    kwargs.update(overrides)
    return CascadeSpec(**kwargs)


@pytest.fixture(scope="session")
def small_corpus():
    return synthetic_corpus(40, seed=11)


@pytest.fixture(scope="session")
def small_folds(small_corpus):
    return make_folds(small_corpus, k=5, seed=22)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                lines.append((name, "PASS" if status == "passed" else "FAIL"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {name}")
