import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from delaymsf.roots import (
    RootFindingError,
    decisive_root_phase,
    decisive_roots_frequency,
    frequency_root_arrays,
    im_part,
    interval_index,
    phase_root_array,
    re_part,
)

# reference values computed with mpmath at 30 digits
Y_TAN_ONE = 0.860333589019379762          # y tan y = 1
Y_COT_0865 = 1.98225867171206424          # y cot y = -0.865
Y_SMALL_A = 0.0670317692818803            # a tau = 0.0045, b = 0


def test_phase_root_reference():
    r = decisive_root_phase(1.0, 0.0, 1.0)
    assert r.y1 == pytest.approx(Y_TAN_ONE, abs=1e-12)
    assert r.residual < 1e-14


def test_phase_root_small_damping():
    assert decisive_root_phase(0.1, 0.0, 0.045).y1 == pytest.approx(Y_SMALL_A, abs=1e-12)


def test_frequency_root_reference():
    r = decisive_roots_frequency(0.865, 0.0, 1.0)
    assert r.m_star == 1 and r.y_star == pytest.approx(Y_COT_0865, abs=1e-12)
    assert r.m_star_star == 0 and r.y_star_star == 0.0


def test_interval_index():
    pi = math.pi
    assert interval_index(np.array([0.0, 1.0, pi / 2 + 1e-9, 3 * pi / 2 + 1e-9])).tolist() == [0, 0, 1, 2]


def test_regime_errors():
    with pytest.raises(RootFindingError, match="phase-delay regime"):
        decisive_root_phase(-0.1, 0.0, 1.0)
    with pytest.raises(RootFindingError, match="phase-delay regime"):
        decisive_root_phase(0.1, 1.0, 1.0)
    with pytest.raises(RootFindingError, match="frequency-delay regime"):
        decisive_roots_frequency(0.1, -1.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0.01, 5.0), frac=st.floats(0.0, 0.99), tau=st.floats(0.01, 5.0))
def test_phase_root_is_first_sign_change(a, frac, tau):
    b = -frac * a / tau
    y1 = float(phase_root_array(a, b, tau))
    assert 0 < y1 <= math.pi
    grid = np.linspace(1e-9, y1 * (1 - 1e-9), 2000)
    vals = im_part(grid, a, b, tau)
    assert np.all(vals > 0) or np.all(vals < 0)
    assert abs(im_part(y1, a, b, tau)) <= 1e-9 * max(1.0, a * tau * math.pi, abs(b) * tau**2 + 10)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(0.01, 5.0), b=st.floats(0.0, 500.0), tau=st.floats(0.01, 5.0))
def test_frequency_roots_in_parity_intervals(a, b, tau):
    r = decisive_roots_frequency(a, b, tau)
    assert r.m_star % 2 == 1 and r.m_star_star % 2 == 0
    for m, y in r.candidates:
        lo = 0.0 if m == 0 else m * math.pi - math.pi / 2
        assert lo <= y <= m * math.pi + math.pi / 2
    assert abs(r.y_star - r.rho) <= 3 * math.pi / 2 + 1e-9


def test_generic_point_has_no_tie():
    assert not decisive_roots_frequency(0.1, 63.0, 0.3).tie


def test_vectorized_matches_scalar(rng):
    a = rng.uniform(0.05, 2, 20)
    b = rng.uniform(0, 100, 20)
    tau = rng.uniform(0.01, 3, 20)
    arr = frequency_root_arrays(a, b, tau)
    for i in range(20):
        r = decisive_roots_frequency(a[i], b[i], tau[i])
        assert arr["y_star"][i] == r.y_star
        assert arr["m_star_star"][i] == r.m_star_star


def test_re_part_root_residual_large_y():
    r = decisive_roots_frequency(0.1, 1e4, 3.0)
    assert r.residual <= 1e-9 * (1e4 * 9)
