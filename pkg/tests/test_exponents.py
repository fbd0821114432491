import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from inls_lab.model import ModelParams, HypothesisViolation
from inls_lab.exponents import (PairQR, INF, Kind, HolderSplit, is_s_admissible,
                                is_hs_admissible, is_dual_hs_admissible, classify,
                                sobolev_equivalence_window, radial_hat_exponents,
                                build_named_pairs, build_holder_splits, verify_holder_split,
                                verify_family, family_passes, sample_family_params, FAMILIES,
                                verification_report)


def test_s_admissible_examples():
    assert is_s_admissible(PairQR(INF, 2), 3)
    assert is_s_admissible(PairQR(2, 6), 3)
    # 2/4 = 3/2 - 3/3, so (4, 3) is admissible; (4, 4) is not
    assert is_s_admissible(PairQR(4, 3), 3)
    assert not is_s_admissible(PairQR(4, 4), 3)


def test_hs_admissible_examples():
    s = F(1, 2)
    # 2/q = 3/2 - 3/4 - 1/2 = 1/4
    assert is_hs_admissible(PairQR(8, 4), s, 3)
    assert not is_hs_admissible(PairQR(F(8, 3), 4), s, 3)
    assert not is_hs_admissible(PairQR(INF, F(6, 2)), s, 3)   # 2N/(N-2s) = 3
    assert not is_hs_admissible(PairQR(F(4, 3), 6), s, 3)     # r = 2N/(N-2)
    assert not is_hs_admissible(PairQR(2, 8), s, 3)


def test_classify_prefers_s():
    assert classify(PairQR(F(8, 3), 4), 3) is Kind.S
    assert classify(PairQR(8, 4), 3, F(1, 2)) is Kind.HS
    assert classify(PairQR(4, 4), 3) is Kind.NONE


@given(st.fractions(F(2), F(6)).filter(lambda r: r > 2))
def test_dual_of_s_pair_is_involution(r):
    # q from the admissibility relation in N=3
    iq = (F(3, 2) - 3 / r) / 2
    p = PairQR(1 / iq, r)
    assert is_s_admissible(p, 3)
    assert p.dual().dual() == p


def test_window_cases():
    assert sobolev_equivalence_window(1, ModelParams(4, 1, 1, F(1, 2))) == (1, 4)
    assert sobolev_equivalence_window(1, ModelParams(3, 0, 1, 1)) == (1, INF)
    lo, hi = sobolev_equivalence_window(1, ModelParams(3, F(-1, 5), 1, 1))
    assert lo > 1 and hi < 3


def test_window_near_hardy_floor():
    # rho -> 1/2 in N = 3: (N/(N-rho), N/(1+rho)) -> (6/5, 2)
    lo, hi = sobolev_equivalence_window(1, ModelParams(3, -0.25 + 1e-12, 1, 1))
    assert abs(lo - 1.2) < 1e-4 and abs(hi - 2) < 1e-4


@given(st.integers(3, 8), st.floats(1e-9, 0.999), st.floats(0.01, 1.99))
def test_window_nonempty_for_negative_a(N, t, s):
    # N/(s+rho) > N/(N-rho) reduces to s < 2 + 2 nu
    a = -(N - 2) ** 2 / 4 * (1 - t)
    lo, hi = sobolev_equivalence_window(s, ModelParams(N, a, 0.5, 1.0))
    assert 1 < lo < hi


def test_window_rejects_s_out_of_range():
    with pytest.raises(ValueError):
        sobolev_equivalence_window(F(5, 2), ModelParams(3, -0.25 + 1e-12, 1, 1))


def test_hat_pair_cubic_3d():
    qh, rh, _, _ = radial_hat_exponents(3, 0, 2, 0)
    assert (qh, rh) == (F(8, 3), 4)
    assert is_s_admissible(PairQR(qh, rh), 3)


def test_local_pairs_inverse_qstar_positivity_limit():
    # 1/q*_+ -> (4 - 2b - alpha(N-2))/4 as eps -> 0: positive iff subcritical
    for N, b, al in [(3, F(1, 2), F(5, 2)), (4, F(1, 3), F(3, 2)), (5, F(1, 5), F(1))]:
        p = ModelParams(N, 1, b, al)
        rep = verify_family("local_high_power", p, eps=F(1, 10**6))
        assert rep.ok, rep.failures()


def test_small_data_3d_r_eps_below_three():
    for e in (F(1, 10), F(1, 1000), F(1, 10**6)):
        assert 3 / (1 + e) < 3


def test_holder_split_theta_zero_rejected():
    split = HolderSplit("degenerate", "test", "B", {"gamma": 3},
                        equations=[], finiteness=[("N/gamma-b", F(0))])
    rep = verify_holder_split(split, ModelParams(3, 1, 1, 1))
    assert not rep["ok"]
    assert rep["failures"] == ["N/gamma-b"]


def test_holder_split_examples_pass():
    p = ModelParams(3, F(1, 2), F(1, 2), 2)
    for s in build_holder_splits(p):
        rep = verify_holder_split(s, p)
        assert rep["ok"], (s.name, rep["failures"])


def test_named_pairs_raise_outside_region():
    with pytest.raises(HypothesisViolation):
        build_named_pairs(ModelParams(3, 1, F(1, 2), 4))
    with pytest.raises(HypothesisViolation):
        build_named_pairs(ModelParams(3, 1, F(1, 2), 2), family="local_low_power")


@pytest.mark.parametrize("theta", [F(1, 100), F(1, 1000), F(1, 10000)])
def test_families_pass_at_several_small_parameters(theta):
    p = ModelParams(3, F(1, 2), F(1, 2), 2)
    rep = verification_report(p, theta=theta, eps=theta)
    assert rep["all_pass"]
    assert {f["family"] for f in rep["families"]} >= {"local_high_power", "small_data_radial"}


@pytest.mark.parametrize("family", FAMILIES)
def test_random_region_samples(family):
    rng = np.random.default_rng(7)
    for _ in range(300):
        p = sample_family_params(family, rng)
        assert family_passes(family, p), p


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(FAMILIES), st.integers(0, 2**32 - 1))
def test_sampled_parameters_lie_in_region(family, seed):
    p = sample_family_params(family, np.random.default_rng(seed))
    assert family_passes(family, p)


def test_report_lists_failing_condition_at_boundary():
    # alpha exactly energy-critical: every family rejects it by name
    rep = verification_report(ModelParams(3, F(1, 2), F(1, 2), 3))
    assert not rep["all_pass"]
    assert any("(4-2b)/(N-2)" in c for conds in rep["not_applicable"].values() for c in conds)
