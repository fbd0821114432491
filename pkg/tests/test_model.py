import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from inls_lab.model import (ModelParams, Regime, HardyViolation, derive_indices,
                            check_hypotheses, strichartz_a_floor)


def test_indices_cubic_3d():
    d = derive_indices(ModelParams(3, 0, 0, 2))
    assert d.s_c == F(1, 2)
    assert d.rho == 0
    assert d.regime is Regime.INTERCRITICAL


@pytest.mark.parametrize("a", [F(-1, 5), 0, 1, F(7, 3)])
def test_mass_critical_power_gives_zero_index(a):
    d = derive_indices(ModelParams(3, a, 1, F(2, 3)))
    assert d.s_c == 0
    assert d.regime is Regime.MASS_CRITICAL


def test_rho_nu_for_a_equal_two():
    d = derive_indices(ModelParams(3, 2, 0, 1))
    assert d.rho == -1
    assert d.nu == F(3, 2)


def test_float_alpha_at_critical_power_within_tolerance():
    d = derive_indices(ModelParams(3, 0.0, 1.0, 2 / 3 + 1e-14))
    assert d.regime is Regime.MASS_CRITICAL
    assert derive_indices(ModelParams(3, 0.0, 0.5, 3.0)).regime is Regime.ENERGY_CRITICAL


def test_hardy_floor_rejected():
    with pytest.raises(HardyViolation):
        ModelParams(3, F(-1, 4), 0, 1)
    with pytest.raises(HardyViolation):
        ModelParams(5, -2.25, 0, 1)


def test_gwp_n3_i_example():
    rep = check_hypotheses(ModelParams(3, 0, F(1, 4), 2))
    # a = 0 fails the a > 0 condition, every other condition holds
    assert rep.failing("gwp_n3_i") == ["a>0"]
    assert check_hypotheses(ModelParams(3, F(1, 10), F(1, 4), 2))["gwp_n3_i"]


def test_corollary_ii_strict_at_boundary():
    b = F(1, 2)
    edge = F(-1, 4) + b * b / 9
    assert not check_hypotheses(ModelParams(3, edge, b, 2))["corollary_ii"]
    assert check_hypotheses(ModelParams(3, edge + F(1, 10**6), b, 2))["corollary_ii"]


def test_kato_case2_floor_value():
    # N=4, b=1, alpha=1: floor -1 + ((2 - 0)/4)^2 = -3/4
    assert strichartz_a_floor(4, 1, 1) == F(-3, 4)
    rep = check_hypotheses(ModelParams(4, 0, 1, 1))
    assert rep.conditions["kato_lwp_case2"]["a>strichartz floor"]
    assert not check_hypotheses(ModelParams(4, F(-3, 4), 1, 1)).conditions[
        "kato_lwp_case2"]["a>strichartz floor"]


params_st = st.tuples(
    st.integers(3, 8),
    st.floats(0.0, 1.9),
    st.floats(0.05, 6.0),
)


@given(params_st, st.floats(0.0, 0.99))
def test_rho_decreasing_in_a(p, t):
    N, b, al = p
    floor = -(N - 2) ** 2 / 4
    a1 = floor + 0.01 + t * 3
    a2 = a1 + 0.5
    r1 = derive_indices(ModelParams(N, a1, b, al)).rho
    r2 = derive_indices(ModelParams(N, a2, b, al)).rho
    assert r2 < r1 < (N - 2) / 2


def test_rho_limits():
    assert derive_indices(ModelParams(4, 0, 0, 1)).rho == 0
    near = derive_indices(ModelParams(4, -1 + 1e-12, 0, 1)).rho
    assert abs(near - 1) < 1e-5


@given(params_st)
def test_s_c_regime_equivalences(p):
    N, b, al = p
    d = derive_indices(ModelParams(N, 0.0, b, al))
    am, ae = (4 - 2 * b) / N, (4 - 2 * b) / (N - 2)
    if abs(al - am) > 1e-9 and abs(al - ae) > 1e-9:
        assert (d.s_c < 1) == (al < ae)
        assert (d.s_c > 0) == (al > am)


@settings(max_examples=200)
@given(params_st, st.floats(0.0, 2.0), st.floats(0.001, 2.0))
def test_hypotheses_monotone_in_a(p, t, step):
    N, b, al = p
    a0 = -(N - 2) ** 2 / 4 + 1e-3 + t
    lo = check_hypotheses(ModelParams(N, a0, b, al)).flags
    hi = check_hypotheses(ModelParams(N, a0 + step, b, al)).flags
    for name, ok in lo.items():
        if ok:
            assert hi[name], name


def test_lam_must_be_sign():
    with pytest.raises(ValueError):
        ModelParams(3, 0, 0, 1, lam=2)
