"""Quick invariant suites, one per module, for ``pureqm <cmd> --selftest``.

These are smoke-sized versions of the properties the test suite checks in
depth. Each function returns ``{check name: passed}``.
"""
from __future__ import annotations

import numpy as np

from . import device, estimation, hilbert, measurement, typeclass
from .hilbert import TOL, StateVector, SubsystemLayout, UnitaryOp


def _random_state(rng, layout):
    v = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    return StateVector.normalized(layout, v)


def _random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def hilbert_checks(seed=0):
    rng = np.random.default_rng(seed)
    layout = SubsystemLayout.of(("S", 2), ("A", 3), ("E", 2))
    ok_norm = ok_rev = ok_complete = ok_rel = True
    for _ in range(20):
        s = _random_state(rng, layout)
        u = UnitaryOp(("E", "S"), _random_unitary(rng, 4))
        out = hilbert.apply(u, s)
        ok_norm &= abs(out.norm - 1) <= TOL
        ok_rev &= hilbert.apply(u.inverse(), out).allclose(s)
        for name in layout.names:
            tot = sum(hilbert.born_probability(s, name, j) for j in range(layout.dim_of(name)))
            ok_complete &= abs(tot - 1) <= TOL
        ok_rel &= abs(hilbert.component_norm(s, "A", 1) ** 2 - hilbert.born_probability(s, "A", 1)) <= TOL
    return {
        "norm_preservation": bool(ok_norm),
        "reversibility": bool(ok_rev),
        "completeness": bool(ok_complete),
        "relative_state_consistency": bool(ok_rel),
    }


def typeclass_checks(seed=0):
    rng = np.random.default_rng(seed)
    ok_oracle = True
    for N in (1, 5, 10):
        a = rng.uniform()
        c0, c1 = np.sqrt(a), np.sqrt(1 - a)
        dense = typeclass.dense_oracle_expand(c0, c1, N).type_sums()
        ok_oracle &= np.max(np.abs(dense - typeclass.symmetric_expand(c0, c1, N).weight_squared)) <= TOL
    td = typeclass.symmetric_expand(0.6, 0.8, 10**5)
    dom = typeclass.dominant_type(1000, 0.3)
    w = [typeclass.type_weight(m, 1000, 0.3) for m in range(1001)]
    tails = [typeclass.log_tail_mass(N, 0.3, 0.05) for N in (100, 1000)]
    bound_ok = all(
        typeclass.log_tail_mass(N, 0.3, 0.05) <= typeclass.chernoff_log_bound(N, 0.3, 0.05)
        for N in (100, 1000, 10000)
    )
    return {
        "oracle_equivalence": bool(ok_oracle),
        "normalization": abs(td.total() - 1) <= 1e-10,
        "dominance": w[dom.m] >= max(w),
        "concentration_bound": bool(bound_ok),
        "tail_shrinks_with_N": tails[1] < tails[0],
    }


def measurement_checks(seed=0):
    rng = np.random.default_rng(seed)
    ok = {"norm_preserving": True, "reversible": True, "no_cross_terms": True, "test_self_zero": True}
    for _ in range(10):
        spec = measurement.CascadeSpec.random(rng)
        pipe = measurement.cascade_evolve(spec)
        ok["norm_preserving"] &= max(pipe.norm_errors()) <= TOL
        ok["reversible"] &= pipe.reversal_error() <= TOL
        s = _random_state(rng, SubsystemLayout.of(("S", 2)))
        env = measurement.EnvironmentSpec(_random_state(rng, SubsystemLayout.of(("E", 3))),
                                          _random_state(rng, SubsystemLayout.of(("E", 3))))
        out = measurement.premeasure(s, env).state.tensor()
        ok["no_cross_terms"] &= np.max(np.abs(out[0, 1]), initial=0) <= TOL and np.max(np.abs(out[1, 0])) <= TOL
        ok["test_self_zero"] &= measurement.test_protocol(s, s) <= TOL
    cat = measurement.cat_scenario()
    ok["cat_relative_state"] = bool(np.array_equal(cat.given_alive.amplitudes, [1, 0]))
    dice = measurement.dice_scenario(3)
    ok["dice_branches"] = dice.branch_count == 216 and dice.max_amplitude_error <= 1e-15
    return {k: bool(v) for k, v in ok.items()}


def estimation_checks(seed=0):
    rng = np.random.default_rng(seed)
    ok_round = True
    for _ in range(20):
        spec = measurement.CascadeSpec.random(rng)
        probs = measurement.branch_probabilities(spec)
        N = 10**6
        # exact expected counts are not integers; use scaled floats directly
        est = estimation.cascade_estimates(estimation.CascadeCounts(*[N * p for p in probs]))
        want = [abs(c) ** 2 for c in spec.first + spec.after0 + spec.after1]
        got = [est.first0, est.first1, est.after0_0, est.after0_1, est.after1_0, est.after1_1]
        ok_round &= max(abs(a - b) for a, b in zip(got, want)) <= TOL
    bounds = [estimation.test_confidence(0, N, 0.95) for N in (10, 100, 1000)]
    e = estimation.estimate_coefficients(estimation.CountRecord(25, 75))
    return {
        "cascade_round_trip": bool(ok_round),
        "confidence_monotone": bounds[0] > bounds[1] > bounds[2],
        "estimator_range": abs(e.c0_hat**2 + e.c1_hat**2 - 1) <= TOL,
    }


def device_checks(seed=0):
    out = {}
    for L in (2, 4, 6, 8):
        for k, v in device.verify_cycle(device.run_cycle(L)).items():
            out[k] = out.get(k, True) and v
    traj = device.run_cycle(4)
    out["permutation_matrices"] = all(
        np.array_equal(device.permutation_matrix(m).T @ device.permutation_matrix(m), np.eye(4 << 4, dtype=np.int64))
        for m in traj.moves
    )
    return out


SUITES = {
    "hilbert": hilbert_checks,
    "typeclass": typeclass_checks,
    "measurement": measurement_checks,
    "estimation": estimation_checks,
    "device": device_checks,
}
