import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairbandits import ContractError
from fairbandits.ecdf import (
    EcdfWindow,
    project,
    rank_per_arm,
    rank_per_group,
    ranks_all_arms,
    ranks_all_groups,
    split_round,
)
from fairbandits.metrics import dkwm_epsilon, ecdf_sup_distance


def window_with(projections_by_arm, dim=1):
    """Window whose arm-a contexts project to the given values under mu = e_1."""
    w = EcdfWindow(dim)
    rows = max(len(v) for v in projections_by_arm)
    for r in range(rows):
        ctx = np.zeros((len(projections_by_arm), dim))
        for a, vals in enumerate(projections_by_arm):
            ctx[a, 0] = vals[r]
        w.push(r + 1, ctx, groups=np.arange(len(projections_by_arm)))
    return w


def test_push_counts():
    w = EcdfWindow(3)
    for t in (1, 2, 3):
        w.push(t, np.ones((2, 3)))
    assert len(w) == 6


def test_push_out_of_order():
    w = EcdfWindow(2)
    w.push(3, np.zeros((2, 2)))
    with pytest.raises(ContractError):
        w.push(3, np.zeros((2, 2)))


def test_push_per_arm_counts():
    w = EcdfWindow(2).push(1, np.zeros((4, 2)))
    assert w.arm_counts(4).tolist() == [1, 1, 1, 1]


@pytest.mark.parametrize("t, kept", [(5, [3, 4]), (1, []), (2, [1])])
def test_prune(t, kept):
    w = EcdfWindow(1)
    for r in range(1, t):
        w.push(r, np.zeros((2, 1)))
    w.prune(t)
    assert sorted(set(w.rounds.tolist())) == kept


def test_rank_per_arm_examples():
    w = window_with([[1.0, 2.0, 3.0]])
    mu = np.array([1.0])
    r = rank_per_arm(w, mu, 0, [2.5])
    assert r.value == pytest.approx(2 / 3) and r.sample_count == 3
    # inclusive comparison at the maximum
    assert rank_per_arm(w, mu, 0, [3.0]).value == 1.0
    assert rank_per_arm(w, mu, 0, [0.5]).value == 0.0


def test_rank_empty_window():
    w = EcdfWindow(2)
    r = rank_per_arm(w, np.ones(2), 0, np.ones(2))
    assert (r.value, r.sample_count) == (0.0, 0)
    r = rank_per_group(w, np.ones(2), 0, np.ones(2))
    assert (r.value, r.sample_count) == (0.0, 0)


def test_rank_per_group_pools_arms():
    w = EcdfWindow(1)
    w.push(1, np.array([[0.1], [0.9]]), groups=[7, 7])
    r = rank_per_group(w, np.array([1.0]), 7, [0.5])
    assert (r.value, r.sample_count) == (0.5, 2)
    r = rank_per_group(w, np.array([1.0]), 3, [0.5])
    assert (r.value, r.sample_count) == (0.0, 0)


def test_rank_per_group_counts():
    w = EcdfWindow(2)
    for t in (1, 2):
        w.push(t, np.ones((3, 2)), groups=[0, 0, 0])
    assert rank_per_group(w, np.ones(2), 0, np.ones(2)).sample_count == 6


def test_rank_per_group_needs_labels():
    w = EcdfWindow(2).push(1, np.ones((2, 2)))
    with pytest.raises(ContractError):
        rank_per_group(w, np.ones(2), 0, np.ones(2))


def test_window_exactness_under_policy_schedule():
    k = 3
    w = EcdfWindow(2)
    for t in range(1, 60):
        w.prune(t)
        assert w.arm_counts(k).tolist() == [t - 1 - split_round(t)] * k
        assert len(w) == 0 or w.rounds.min() >= split_round(t) + 1
        w.push(t, np.ones((k, 2)))


@settings(max_examples=50, deadline=None)
@given(
    rows=st.integers(min_value=1, max_value=300),
    dim=st.integers(min_value=1, max_value=20),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_project_row_independent_of_stacking(rows, dim, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(rows, dim))
    mu = rng.normal(size=dim)
    full = project(x, mu)
    i = int(rng.integers(rows))
    assert full[i] == project(x[i:i + 1], mu)[0]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1), q=st.floats(-10, 10), q2=st.floats(-10, 10))
def test_rank_monotone_in_query(seed, q, q2):
    rng = np.random.default_rng(seed)
    w = window_with([rng.normal(size=30).tolist()])
    lo, hi = sorted([q, q2])
    mu = np.array([1.0])
    assert rank_per_arm(w, mu, 0, [lo]).value <= rank_per_arm(w, mu, 0, [hi]).value


def test_dkwm_band_respected():
    # known continuous law: standard normal; n = 400, delta = 0.1
    from scipy import stats

    rng = np.random.default_rng(2024)
    n, delta = 400, 0.1
    eps = dkwm_epsilon(n, delta)
    w_dim = 3
    mu = np.array([1.0, -2.0, 0.5])
    sd = np.linalg.norm(mu)
    exceed = 0
    for _ in range(200):
        w = EcdfWindow(w_dim)
        w.push(1, rng.normal(size=(n, w_dim)))
        proj = project(w.contexts, mu)
        exceed += ecdf_sup_distance(proj, stats.norm(scale=sd).cdf) > eps
    assert exceed / 200 <= delta + 0.05


def _naive_ranks(window, mu, contexts, labels_window, labels_query):
    proj = project(window.contexts, mu)
    queries = project(contexts, mu)
    out = []
    for q, lab in zip(queries, labels_query):
        n = 0
        hit = 0
        for p, l in zip(proj, labels_window):
            if l == lab:
                n += 1
                hit += p <= q
        out.append(hit / n if n else 0.0)
    return np.array(out)


def test_vectorised_ranks_match_single_and_naive():
    rng = np.random.default_rng(5)
    for _ in range(20):
        k, d = rng.integers(1, 5), rng.integers(1, 6)
        w = EcdfWindow(d)
        for t in range(1, rng.integers(2, 30)):
            w.push(t, rng.integers(-3, 4, size=(k, d)).astype(float), groups=rng.integers(0, 3, size=k))
        mu = rng.integers(-2, 3, size=d).astype(float)
        ctx = rng.integers(-3, 4, size=(k, d)).astype(float)
        groups = rng.integers(0, 3, size=k)
        va, _ = ranks_all_arms(w, mu, ctx)
        vg, _ = ranks_all_groups(w, mu, ctx, groups)
        np.testing.assert_array_equal(va, [rank_per_arm(w, mu, a, ctx[a]).value for a in range(k)])
        np.testing.assert_array_equal(vg, [rank_per_group(w, mu, groups[a], ctx[a]).value for a in range(k)])
        np.testing.assert_array_equal(va, _naive_ranks(w, mu, ctx, w.arms, np.arange(k)))
        np.testing.assert_array_equal(vg, _naive_ranks(w, mu, ctx, w.groups, groups))
