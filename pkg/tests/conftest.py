import math

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from reinhardt.polygon import MINUS, PLUS, PolygonFamily, build_polygon

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

INV_SQRT3 = 1 / math.sqrt(3)


@st.composite
def star_points(draw, margin=1e-3, y_max=3.0):
    """Points of the star region with slack ``margin``."""
    x = draw(st.floats(-INV_SQRT3 + margin, INV_SQRT3 - margin))
    y_min = math.sqrt(1 / 3 + margin - x * x)
    y = draw(st.floats(y_min, y_max))
    return complex(x, y)


@st.composite
def half_plane_points(draw, bound=5.0):
    x = draw(st.floats(-bound, bound))
    y = draw(st.floats(1e-2, bound))
    return complex(x, y)


@st.composite
def simplex_points(draw):
    w = np.array([draw(st.floats(0, 1)) for _ in range(3)]) + 1e-12
    return w / w.sum()


def random_star_points(rng, n, margin=1e-3, y_max=3.0):
    x = rng.uniform(-INV_SQRT3 + margin, INV_SQRT3 - margin, n)
    y = rng.uniform(np.sqrt(1 / 3 + margin - x * x), y_max)
    return x + 1j * y


@pytest.fixture(scope="session")
def polygons():
    cache = {}

    def get(tag, k):
        if (tag, k) not in cache:
            cache[tag, k] = build_polygon(PolygonFamily(tag, k))
        return cache[tag, k]
    return get


@pytest.fixture(scope="session")
def octagon(polygons):
    return polygons(PLUS, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)



ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per criterion and assert on it."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(n, ok, detail):
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


__all__ = ["MINUS", "PLUS"]
