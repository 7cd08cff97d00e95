import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsn_track.geometry import CirclePair, intersection_area, prediction_error


def lens_box(r_a, r_s, L):
    """Axis-aligned box (circle a at the origin, b on the +x axis) that contains the lens."""
    x_lo, x_hi = max(-r_a, L - r_s), min(r_a, L + r_s)
    if L == 0:
        h = min(r_a, r_s)
    else:
        xc = (L * L + r_a * r_a - r_s * r_s) / (2 * L)
        if xc < 0:
            h = r_a
        elif xc > L:
            h = r_s
        else:
            h = math.sqrt(max(r_a * r_a - xc * xc, 0.0))
    return x_lo, x_hi, min(h, r_a, r_s)


def monte_carlo_area(r_a, r_s, L, n, rng):
    x_lo, x_hi, h = lens_box(r_a, r_s, L)
    x = rng.uniform(x_lo, x_hi, n)
    y = rng.uniform(-h, h, n)
    inside = (x * x + y * y <= r_a * r_a) & ((x - L) ** 2 + y * y <= r_s * r_s)
    return inside.mean() * (x_hi - x_lo) * 2 * h


def test_prediction_error_examples():
    assert prediction_error((0, 0), (0, 0)) == 0.0
    assert prediction_error((0, 0), (3, 4)) == 5.0


@given(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)))
def test_prediction_error_symmetric(p, q):
    assert prediction_error(p, q) == prediction_error(q, p)


def test_coincident_circles():
    for r in (1.0, 24.0, 100.0):
        assert intersection_area(CirclePair(r, r, 0.0)) == pytest.approx(math.pi * r * r, rel=1e-15)


def test_disjoint_circles():
    assert intersection_area(CirclePair(10, 20, 30)) == 0.0
    assert intersection_area(CirclePair(10, 20, 31.5)) == 0.0


def test_hand_value_unit_circles():
    # theta_1 = theta_2 = pi/3, each segment term 0.6142
    assert intersection_area(CirclePair(1, 1, 1)) == pytest.approx(1.2284, abs=1e-4)
    exact = 2 * (math.pi / 3 - math.sin(math.pi / 3) * math.cos(math.pi / 3))
    assert intersection_area(CirclePair(1, 1, 1)) == pytest.approx(exact, rel=1e-14)


def test_contained_circle():
    assert intersection_area(CirclePair(5, 40, 10)) == pytest.approx(math.pi * 25)
    assert intersection_area(CirclePair(40, 5, 10)) == pytest.approx(math.pi * 25)


def test_zero_activation_radius():
    assert intersection_area(CirclePair(0.0, 40, 0.0)) == 0.0


def test_invalid_pair_rejected():
    with pytest.raises(ValueError):
        CirclePair(-1, 1, 0)
    with pytest.raises(ValueError):
        CirclePair(1, 1, -0.1)


radii = st.floats(0.5, 200.0)


@settings(max_examples=300)
@given(radii, radii, st.floats(0.0, 1.0))
def test_bounds_and_symmetry(r_a, r_s, frac):
    L = frac * (r_a + r_s) * 1.1
    s = intersection_area(CirclePair(r_a, r_s, L))
    assert 0.0 <= s <= math.pi * min(r_a, r_s) ** 2 * (1 + 1e-14)
    assert s == pytest.approx(intersection_area(CirclePair(r_s, r_a, L)), rel=1e-12, abs=1e-12)


@settings(max_examples=200)
@given(radii, st.floats(0.0, 0.999))
def test_monotone_in_activation_radius(r_s, frac):
    L = frac * r_s
    grid = np.linspace(0.0, 3 * r_s, 200)
    areas = [intersection_area(CirclePair(r, r_s, L)) for r in grid]
    assert all(b >= a - 1e-9 * r_s * r_s for a, b in zip(areas, areas[1:]))


@pytest.mark.parametrize("r_a,r_s", [(40, 40), (8, 40), (40, 8), (1, 1), (33.3, 100)])
def test_continuity_at_piecewise_boundaries(r_a, r_s):
    tol = 1e-6 * r_s * r_s
    outer = r_a + r_s
    assert intersection_area(CirclePair(r_a, r_s, outer - 1e-9)) < tol
    inner = abs(r_a - r_s)
    lo = intersection_area(CirclePair(r_a, r_s, max(inner - 1e-9, 0.0)))
    hi = intersection_area(CirclePair(r_a, r_s, inner + 1e-9))
    assert abs(lo - hi) < tol


def test_monte_carlo_oracle_small():
    rng = np.random.default_rng(7)
    for _ in range(10):
        r_a, r_s = rng.uniform(1, 100, 2)
        L = rng.uniform(0, r_a + r_s)
        mc = monte_carlo_area(r_a, r_s, L, 200_000, rng)
        exact = intersection_area(CirclePair(r_a, r_s, L))
        assert exact == pytest.approx(mc, rel=0.03, abs=1e-9)
