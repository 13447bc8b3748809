from fractions import Fraction
from math import comb, floor, log, sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from pureqm.hilbert import ResourceLimitError
from pureqm.typeclass import (
    binary_kl,
    chernoff_log_bound,
    dense_oracle_expand,
    dominant_type,
    log_tail_mass,
    sample_types,
    sample_world,
    symmetric_expand,
    tail_mass,
    type_weight,
    type_weight_exact,
)


def random_pair(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return v[0], v[1]


def test_two_copies_match_hand_expansion():
    td = symmetric_expand(0.6, 0.8, 2)
    coef = td.coefficients
    assert abs(coef[2] - 0.36) <= 1e-15
    assert abs(coef[1] - sqrt(2) * 0.6 * 0.8) <= 1e-15
    assert abs(coef[0] - 0.64) <= 1e-15


def test_deterministic_state_puts_all_weight_on_one_type():
    td = symmetric_expand(1.0, 0.0, 7)
    assert td.log_weight[7] == 0.0
    assert np.all(np.isneginf(td.log_weight[:7]))
    td = symmetric_expand(0.0, 1.0, 7)
    assert td.log_weight[0] == 0.0 and np.all(np.isneginf(td.log_weight[1:]))


def test_uniform_ten_copies_is_binomial_half():
    td = symmetric_expand(1 / sqrt(2), 1 / sqrt(2), 10)
    exact = np.array([comb(10, m) / 2**10 for m in range(11)])
    dense = dense_oracle_expand(1 / sqrt(2), 1 / sqrt(2), 10).type_sums()
    assert np.max(np.abs(td.weight_squared - exact)) <= 1e-14
    assert np.max(np.abs(dense - exact)) <= 1e-14


def test_oracle_equivalence_random_pairs(rng):
    for N in range(1, 13):
        for _ in range(20):
            c0, c1 = random_pair(rng)
            dense = dense_oracle_expand(c0, c1, N).type_sums()
            assert np.max(np.abs(dense - symmetric_expand(c0, c1, N).weight_squared)) <= 1e-12


def test_expand_rejects_bad_input():
    with pytest.raises(ValueError):
        symmetric_expand(0.6, 0.6, 3)
    with pytest.raises(ValueError):
        symmetric_expand(0.6, 0.8, 0)


@pytest.mark.parametrize("N", [1, 10, 1000, 10**6])
def test_normalization(N):
    assert abs(symmetric_expand(0.6, 0.8, N).total() - 1) <= 1e-10


def test_type_weight_small_case_by_enumeration():
    # the m=1 class of (|00>+|11>)^{(x)2}/2 holds indices 01 and 10
    amps = dense_oracle_expand(1 / sqrt(2), 1 / sqrt(2), 2).amplitudes
    oracle = abs(amps[0b01]) ** 2 + abs(amps[0b10]) ** 2
    assert type_weight(1, 2, 0.5) == pytest.approx(oracle, abs=1e-15)
    assert type_weight(1, 2, 0.5) == pytest.approx(0.5, abs=1e-15)


def test_type_weight_certain_outcome():
    assert type_weight(5, 5, 1.0) == 1.0
    assert type_weight(4, 5, 1.0) == 0.0


def test_type_weight_against_big_integers():
    exact = Fraction(comb(1000, 500), 2**1000)
    assert type_weight(500, 1000, 0.5) == pytest.approx(float(exact), rel=1e-12)


def test_type_weight_out_of_range():
    with pytest.raises(ValueError):
        type_weight(6, 5, 0.5)


@settings(max_examples=50, deadline=None)
@given(N=st.integers(1, 64), p=st.floats(0.0, 1.0), frac=st.floats(0, 1))
def test_log_domain_matches_exact_rationals(N, p, frac):
    m = int(frac * N)
    exact = float(type_weight_exact(m, N, p))
    got = type_weight(m, N, p)
    assert got == pytest.approx(exact, rel=1e-11, abs=1e-300)


def test_dominant_type_examples():
    assert dominant_type(10, 0.3).m == 3
    d = dominant_type(7, 0.5)
    assert d.m == 3 and d.tie and d.tied_with == 4
    assert dominant_type(10**6, 0.36).m == 360000


@settings(max_examples=100, deadline=None)
@given(N=st.integers(1, 300), p=st.floats(0.0, 1.0))
def test_dominant_type_is_argmax(N, p):
    w = np.array([type_weight_exact(m, N, p) for m in range(N + 1)], dtype=object) if N <= 64 else None
    d = dominant_type(N, p)
    if w is not None:
        best = max(w)
        assert w[d.m] == best
        ties = [m for m in range(N + 1) if w[m] == best]
        assert d.m == min(ties)
    else:
        ws = [type_weight(m, N, p) for m in range(N + 1)]
        assert ws[d.m] >= max(ws) * (1 - 1e-12)
    assert abs(d.m - floor(N * p)) <= 1


def test_dominant_type_flags_shift_above_floor():
    # N=9, p=0.35: floor(Np)=3 but the binomial mode is floor((N+1)p)=3; pick a case where they differ
    N, p = 4, 0.79
    d = dominant_type(N, p)
    assert d.floor_np == 3 and d.m == 3
    N, p = 5, 0.6  # floor 3, (N+1)p = 3.6 -> mode 3
    assert dominant_type(N, p).m == 3
    N, p = 3, 0.26  # floor 0, mode floor(4*0.26)=1
    d = dominant_type(N, p)
    assert d.m == 1 and d.adjusted and not d.tie


def test_tail_mass_extreme_types():
    assert tail_mass(100, 0.5, 0.4999) == pytest.approx(2 * 2.0**-100, rel=1e-12)
    assert tail_mass(50, 1.0, 0.1) == 0.0
    assert log_tail_mass(50, 1.0, 0.1) == float("-inf")


def test_binary_kl():
    assert binary_kl(0.3, 0.3) == 0.0
    assert binary_kl(0.4, 0.3) == pytest.approx(0.4 * log(0.4 / 0.3) + 0.6 * log(0.6 / 0.7), rel=1e-14)


def test_tail_mass_below_chernoff_bound():
    assert log_tail_mass(1000, 0.3, 0.05) <= chernoff_log_bound(1000, 0.3, 0.05)


@settings(max_examples=60, deadline=None)
@given(N=st.integers(10, 5000), p=st.floats(0.02, 0.98), eps=st.floats(0.005, 0.3))
def test_concentration_property(N, p, eps):
    if not (0 < p - eps and p + eps < 1):
        return
    assert log_tail_mass(N, p, eps) <= chernoff_log_bound(N, p, eps) + 1e-9


@pytest.mark.parametrize("p,eps", [(0.3, 0.05), (0.5, 0.01), (0.1, 0.02)])
def test_tail_shrinks_tenfold_N(p, eps):
    for N in (100, 1000, 10000):
        assert log_tail_mass(10 * N, p, eps) < log_tail_mass(N, p, eps)


def test_tail_monotone_in_eps():
    vals = [log_tail_mass(500, 0.3, e) for e in (0.01, 0.02, 0.05, 0.1, 0.2)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_sample_world_deterministic_types():
    for seed in range(5):
        assert sample_world(5, 1.0, seed).bits.tolist() == [0] * 5
        assert sample_world(5, 0.0, seed).bits.tolist() == [1] * 5


def test_sample_world_reproducible():
    a, b = sample_world(50, 0.3, 11), sample_world(50, 0.3, 11)
    assert np.array_equal(a.bits, b.bits) and a.m0 == b.m0
    assert a.m0 == int(sample_types(50, 0.3, 1, 11)[0])


def test_sample_world_mean_fraction():
    fr = [sample_world(10**4, 0.5, s).m0 / 10**4 for s in range(100)]
    assert 0.485 <= np.mean(fr) <= 0.515
    # every individual world sits within 5 sigma as well
    assert max(abs(f - 0.5) for f in fr) < 5 * 0.005


def test_sampled_types_follow_squared_weights():
    N, p = 100, 0.3
    m = sample_types(N, p, 10**5, seed=7)
    observed = np.bincount(m, minlength=N + 1)
    expected = np.array([type_weight(k, N, p) for k in range(N + 1)]) * m.size
    # pool sparse tails so every cell expects at least 5
    keep = expected >= 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    assert chisquare(obs, exp * obs.sum() / exp.sum()).pvalue > 0.001


def test_within_type_arrangement_is_uniform():
    N = 4
    seqs = {}
    for s in range(6000):
        w = sample_world(N, 0.5, s)
        if w.m0 == 2:
            key = tuple(w.bits.tolist())
            seqs[key] = seqs.get(key, 0) + 1
    assert len(seqs) == comb(4, 2)
    assert chisquare(list(seqs.values())).pvalue > 0.001


def test_dense_oracle_base_cases():
    assert np.array_equal(dense_oracle_expand(0.6, 0.8, 1).amplitudes, [0.6, 0.8])
    assert np.allclose(dense_oracle_expand(0.6, 0.8, 2).amplitudes, [0.36, 0.48, 0.48, 0.64], atol=1e-16)


def test_dense_oracle_guard():
    with pytest.raises(ResourceLimitError):
        dense_oracle_expand(0.6, 0.8, 25)


def test_csv_rows():
    rows = symmetric_expand(0.6, 0.8, 2).csv_rows()
    assert [r[0] for r in rows] == [0, 1, 2]
    assert rows[2][2] == pytest.approx(0.1296, abs=1e-15)
