import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circlaw.ensemble import EnsembleSpec, gaussian, rademacher, two_point
from circlaw.hermitization import shifted_singular_values
from circlaw.ensemble import sample_matrix
from circlaw.sv_tail import (COMPRESSIBLE, DEFAULT_PROFILE, REGULAR, SINGULAR,
                             ProfileStructureError, classify_profile, clopper_pearson,
                             profile_counts, small_ball_prob, smin_tail_estimate)


def _brute_counts(x, Delta):
    out = {}
    for a in np.abs(x):
        if a == 0:
            continue
        k = 0
        while not (k * Delta < a <= (k + 1) * Delta):
            k += 1
        out[k] = out.get(k, 0) + 1
    return out


def test_profile_counts_examples():
    assert profile_counts([0.15, 0.32, 0.18], 0.1) == ({1: 2, 3: 1}, 0)
    assert profile_counts([0.1, 0.1, 0.1], 0.1) == ({0: 3}, 0)
    assert profile_counts([0.0, -0.25, 0.0], 0.1) == ({2: 1}, 2)
    assert profile_counts(np.array([0.3j, 0.4]), 0.1) == ({2: 1, 3: 1}, 0)
    with pytest.raises(ValueError):
        profile_counts([0.1], 0.0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-40, 40), min_size=1, max_size=30), st.sampled_from([0.1, 0.05, 0.3]))
def test_profile_counts_on_bucket_edges(ks, Delta):
    # coordinates that are exact multiples of Delta probe the closed right edge
    x = np.array(ks, dtype=float) * Delta
    assert profile_counts(x, Delta)[0] == _brute_counts(x, Delta)


def test_profile_partition_on_random_vectors():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        n = int(rng.integers(1, 50))
        x = rng.standard_normal(n) * (rng.random(n) < 0.8)
        x /= max(np.linalg.norm(x), 1e-300)
        Delta = float(rng.uniform(0.005, 0.3))
        counts, zeros = profile_counts(x, Delta)
        assert sum(counts.values()) == np.count_nonzero(x)
        assert zeros == n - np.count_nonzero(x)
        assert counts == _brute_counts(x, Delta)


def test_classify_basis_vector_is_compressible():
    e1 = np.zeros(64)
    e1[0] = 1.0
    assert classify_profile(e1, R=1.0, r=0.5).classification == COMPRESSIBLE
    assert classify_profile(e1).classification == COMPRESSIBLE


def _flat_sides(n, R, r, Q, p=1.0):
    """Both sides of the regularity test for the flat vector, counted by hand."""
    Delta = r / (4 * math.pi * math.sqrt(n))
    m = max(1.0, r * r * n / (2 * R * R * p))
    half = math.ceil(m / 2)
    # every coordinate equals 1/sqrt n, so all of J lands in one bucket
    k = math.ceil((1 / math.sqrt(n)) / Delta) - 1
    lhs = half ** 2 if k >= 1 else 0
    return lhs, Q * m ** 2.5 * Delta


def test_flat_vector_under_defaults_is_regular():
    n = 64
    x = np.full(n, 1 / math.sqrt(n))
    rep = classify_profile(x)
    lhs, budget = _flat_sides(n, DEFAULT_PROFILE["R"], DEFAULT_PROFILE["r"], DEFAULT_PROFILE["Q"])
    assert rep.lhs == lhs and rep.budget == pytest.approx(budget)
    assert rep.classification == REGULAR
    assert rep.sigma_set.size == n and rep.J.size == math.ceil(rep.m / 2)
    assert rep.alt_budget > 0


def test_flat_vector_with_small_radius_ratio():
    # R = 3, r = 0.5 makes m = 1, so lhs = 1 against a budget of about 0.05
    n = 64
    x = np.full(n, 1 / math.sqrt(n))
    rep = classify_profile(x, R=3.0, r=0.5, Q=10.0)
    lhs, budget = _flat_sides(n, 3.0, 0.5, 10.0)
    assert (rep.lhs, rep.budget) == pytest.approx((lhs, budget))
    assert rep.classification == (REGULAR if lhs <= budget else SINGULAR)


def test_tiny_budget_is_singular():
    x = np.full(64, 1 / 8)
    assert classify_profile(x, Q=1e-6).classification == SINGULAR


def test_monotone_in_budget():
    rng = np.random.default_rng(3)
    for _ in range(30):
        x = np.abs(rng.standard_normal(100)) + 0.5
        x /= np.linalg.norm(x)
        labels = []
        for Q in (1e-3, 1e-1, 1, 10, 1e3):
            try:
                labels.append(classify_profile(x, R=2.0, r=0.9, Q=Q).classification)
            except ProfileStructureError:
                break
        if REGULAR in labels:
            assert SINGULAR not in labels[labels.index(REGULAR):]


def test_classify_validation():
    x = np.full(4, 0.5)
    with pytest.raises(ValueError):
        classify_profile(x * 2)
    with pytest.raises(ValueError):
        classify_profile(x, R=0.5, r=0.9)
    with pytest.raises(ValueError):
        classify_profile(x, Delta=1.0)
    with pytest.raises(ValueError):
        classify_profile(np.array([np.nan, 1.0]))
    with pytest.raises(ValueError):
        profile_counts([np.inf], 0.1)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=80).filter(lambda v: sum(v) > 1e-6),
       st.floats(1.0, 4.0), st.floats(0.05, 0.95))
def test_dense_band_shortfall_implies_compressible(v, R, r):
    # with p_n = 1, below-floor coordinates carry < r^2/4 of sigma's mass and fewer
    # than m/2 band coordinates carry < r^2/4 more, so ||x_sigma|| < r
    p = 1.0
    x = np.array(v) / np.linalg.norm(v)
    Delta = r / (4 * math.pi * math.sqrt(x.size))
    try:
        rep = classify_profile(x, R=R, r=r, Delta=Delta, p_n=p)
    except ProfileStructureError:
        pytest.fail("structural error reached")
    assert rep.classification in (COMPRESSIBLE, REGULAR, SINGULAR)


def test_sparse_band_shortfall_is_structural():
    # for p_n < 1 the band cap R/sqrt(n p_n) widens and the bound above becomes r^2/(4 p_n^2)
    with pytest.raises(ProfileStructureError):
        classify_profile(np.array([0.0, 1.0]), R=1.0, r=0.75,
                         Delta=0.75 / (4 * math.pi * math.sqrt(2)), p_n=0.2)


def test_clopper_pearson():
    lo, hi = clopper_pearson(0, 500)
    assert lo == 0.0 and hi == pytest.approx(1 - 0.025 ** (1 / 500))
    lo, hi = clopper_pearson(500, 500)
    assert hi == 1.0 and lo == pytest.approx(0.025 ** (1 / 500))
    lo, hi = clopper_pearson(7, 40)
    assert lo < 7 / 40 < hi


def test_tail_report_monotone_and_deterministic():
    spec = EnsembleSpec(24, gaussian(), 1.0, 4)
    th = [1e-4 / 24 ** 2, 1e-3, 1e-2, 0.05, 0.2]
    a = smin_tail_estimate(spec, 0.5, th, 60)
    b = smin_tail_estimate(spec, 0.5, th, 60, workers=3)
    assert np.all(np.diff(a.counts) >= 0) and np.all(a.counts <= 60)
    assert np.array_equal(a.counts, b.counts) and np.array_equal(a.smin, b.smin)
    s = shifted_singular_values(sample_matrix(spec, 7), 0.5)[-1]
    assert a.smin[7] == s
    rows = list(a.rows())
    assert rows[0][:3] == (th[0], int(a.counts[0]), 60)
    assert a.summary()["trials"] == 60


def test_tail_validation():
    spec = EnsembleSpec(8, gaussian(), 1.0, 0)
    with pytest.raises(ValueError):
        smin_tail_estimate(spec, 0.5, [0.1], 49)
    with pytest.raises(ValueError):
        smin_tail_estimate(spec, 0.5, [0.2, 0.1], 50)
    with pytest.raises(ValueError):
        smin_tail_estimate(spec, 0.5, [0.0, 0.1], 50)


def _exact_small_ball(x, atoms, probs, Delta, v):
    total = 0.0
    for combo in itertools.product(range(len(atoms)), repeat=len(x)):
        val = sum(atoms[c] * xi for c, xi in zip(combo, x))
        if abs(val - v) < Delta:
            total += math.prod(probs[c] for c in combo)
    return total


def test_small_ball_rademacher():
    x = [1 / math.sqrt(2)] * 2
    assert _exact_small_ball(x, [-1, 1], [0.5, 0.5], 0.1, 0) == 0.5
    assert small_ball_prob(x, rademacher(), 0.1) == pytest.approx(0.5, abs=0.05)
    assert small_ball_prob(x, rademacher(), 1e3) == 1.0
    assert small_ball_prob(x, rademacher(), 0.1, v=100) <= 0.001


def test_small_ball_two_point_enumeration():
    d = two_point(2.0)
    x = np.array([0.6, 0.8])
    exact = _exact_small_ball(x, [d.atom, d.other_atom], [d.prob, 1 - d.prob], 0.5, 0.0)
    est = small_ball_prob(x, d, 0.5, trials=40_000, seed=2)
    assert est == pytest.approx(exact, abs=4 * math.sqrt(exact * (1 - exact) / 40_000) + 1e-3)


def test_small_ball_validation():
    with pytest.raises(ValueError):
        small_ball_prob([1.0], rademacher(), 0.1, trials=10)


@pytest.mark.parametrize("p", [1.0, 0.5, 0.25])
def test_sparse_tail_is_reported_with_intervals(p):
    n = 64
    rep = smin_tail_estimate(EnsembleSpec(n, gaussian(), p, 1), 0.5, [1e-4 / n ** 2, 1.0 / n], 60)
    (lo, hi), _ = rep.intervals()
    assert lo <= rep.probabilities[0] <= hi
    row = rep.summary()["rows"][0]
    assert row["cp_upper"] == hi and row["trials"] == 60
