import math

import numpy as np
import pytest
from hypothesis import strategies as st

from brwre.criticality import two_env_example
from brwre.environment import EnvironmentLaw
from brwre.pointprocess import PointProcessLaw

LAW_A = PointProcessLaw.from_pairs([(0.5, [-1, 1]), (0.5, [1, 1])])
LAW_B = PointProcessLaw.from_pairs([(0.4, [-2, 0, 3]), (0.6, [0, 1])])
LAW_14 = PointProcessLaw.from_pairs([(0.1, [-1, 0, 0, 2, 2, 2]), (0.7, [-1, -1, 2, 3]), (0.2, [])])
DOUBLING = PointProcessLaw.deterministic([0, 0])
PM1 = PointProcessLaw.from_pairs([(0.5, [-1, 1]), (0.5, [-1, 1])])


@pytest.fixture(scope="session")
def example2():
    """Two-environment instance used for the L^p statements."""
    return two_env_example(0.5, LAW_A, LAW_B)


@pytest.fixture(scope="session")
def example1():
    """Two-environment instance with a concentrated component."""
    return two_env_example(0.5, LAW_A, LAW_14)


def _law_from(draw):
    k = draw(st.integers(1, 4))
    raw = [draw(st.integers(1, 20)) for _ in range(k)]
    total = sum(raw)
    atoms = []
    for w in raw:
        n = draw(st.integers(0, 3))
        atoms.append((w / total, [draw(st.integers(-2, 3)) for _ in range(n)]))
    if all(not a[1] for a in atoms):
        atoms[0] = (atoms[0][0], [draw(st.integers(-2, 3))])
    return PointProcessLaw.from_pairs(atoms)


@st.composite
def point_laws(draw):
    return _law_from(draw)


@st.composite
def environment_laws(draw, max_components=4):
    k = draw(st.integers(1, max_components))
    raw = [draw(st.integers(1, 10)) for _ in range(k)]
    total = sum(raw)
    w = [r / total for r in raw]
    w[-1] = 1.0 - math.fsum(w[:-1])
    return EnvironmentLaw(tuple((wi, _law_from(draw)) for wi in w))


def random_envlaw(rng: np.random.Generator, max_components=4, max_atoms=4):
    """Plain-numpy version of ``environment_laws`` for fixed-seed loops."""
    k = int(rng.integers(1, max_components + 1))
    comps = []
    w = rng.dirichlet(np.ones(k))
    w[-1] = 1.0 - math.fsum(w[:-1])
    for wi in w:
        a = int(rng.integers(1, max_atoms + 1))
        p = rng.dirichlet(np.ones(a))
        p[-1] = 1.0 - math.fsum(p[:-1])
        atoms = [(float(pi), [int(v) for v in rng.integers(-2, 4, int(rng.integers(0, 4)))]) for pi in p]
        if all(not d for _, d in atoms):
            atoms[0] = (atoms[0][0], [int(rng.integers(-2, 4))])
        comps.append((float(wi), PointProcessLaw.from_pairs(atoms)))
    return EnvironmentLaw(tuple(comps))


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
