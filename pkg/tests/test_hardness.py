import math

import numpy as np
import pytest

from conftest import single_edge
from fomlab.errors import ParamsInvalid
from fomlab.hardness import (
    AdversaryTreeParams,
    LayeredParams,
    adversary_p_sequence,
    adversary_ratio,
    empirical_ratio,
    fluid_recurrence,
    gen_adversary_tree,
    gen_ranking_hard,
    omega_fixed_point,
    z_path,
)
from fomlab.instance import build_instance
from fomlab.oracle import max_matching_bipartite
from fomlab.engine import Role, run_ranking
from conftest import enumerate_rank_orders

OMEGA = 0.567143290409784


def test_params_validation():
    with pytest.raises(ParamsInvalid):
        AdversaryTreeParams(k=0, h=1, seed=0)
    with pytest.raises(ParamsInvalid):
        LayeredParams(k=2, h=0)
    with pytest.raises(ParamsInvalid):
        adversary_ratio(1, 3)


def test_adversary_tree_smallest():
    inst = gen_adversary_tree(AdversaryTreeParams(k=1, h=1, seed=0))
    assert inst.n == 4  # u1 + two children + one b-vertex
    assert inst.is_bipartite()


def test_adversary_tree_sizes():
    params = AdversaryTreeParams(k=3, h=2, seed=5)
    assert params.side_size == 13
    inst = gen_adversary_tree(params)
    assert inst.n == 26
    # revalidates through the constructor
    rebuilt = build_instance(
        inst.n, list(inst.events), list(inst.edges), inst.bipartition
    )
    assert rebuilt == inst


def test_adversary_tree_perfect_matching():
    for k, h, seed in [(2, 2, 0), (2, 3, 1), (3, 2, 2), (4, 2, 3)]:
        params = AdversaryTreeParams(k=k, h=h, seed=seed)
        inst = gen_adversary_tree(params)
        assert inst.n == 2 * params.side_size
        assert max_matching_bipartite(inst).size == params.side_size


def test_adversary_tree_deterministic():
    a = gen_adversary_tree(AdversaryTreeParams(k=3, h=3, seed=9))
    b = gen_adversary_tree(AdversaryTreeParams(k=3, h=3, seed=9))
    assert a == b


def test_p_sequence_recurrence_matches_closed_form():
    # the closed-form cross-check is asserted inside the helper
    for k in (2, 3, 7, 25, 50):
        ps = adversary_p_sequence(k, 200)
        assert ps[0] == 0.0
        assert ps[1] == pytest.approx(1 / (k + 1), abs=1e-12)
        assert ps[-1] == pytest.approx(1 / (k + 2), abs=1e-12)


def test_adversary_ratio_k7_asymptotic():
    pred = adversary_ratio(7, 8)
    closed = 62 / 63 - (6 / 7) * math.exp(-8 / 9)
    assert pred.ratio_asymptotic == pytest.approx(closed, abs=1e-12)
    assert pred.ratio_asymptotic == pytest.approx(0.631745, abs=1e-6)


def test_adversary_ratio_finite_approaches_asymptotic():
    deltas = [
        abs(adversary_ratio(7, h).ratio_finite - adversary_ratio(7, h).ratio_asymptotic)
        for h in (2, 4, 6, 8)
    ]
    assert deltas[-1] < 1e-5
    assert deltas[-1] < deltas[0]


def test_ranking_hard_structure():
    inst = gen_ranking_hard(LayeredParams(k=3, h=4))
    n = 12
    assert inst.n == 2 * n
    assert inst.is_bipartite()
    # pendants and complete bipartite between consecutive groups
    assert all((i, n + i) in inst.edges for i in range(n))
    assert inst.m == n + 3 * 3 * 3  # pendants + 3 consecutive group pairs
    # deadlines of u-vertices in index order, before all pendants
    dl = [inst.deadline_pos[v] for v in range(n)]
    assert dl == sorted(dl)
    assert max(dl) < min(inst.deadline_pos[n + i] for i in range(n))


def test_ranking_hard_perfect_matching():
    for k, h in [(1, 3), (3, 4), (5, 2)]:
        inst = gen_ranking_hard(LayeredParams(k=k, h=h))
        assert max_matching_bipartite(inst).size == k * h


def test_ranking_hard_k1_every_u_matched():
    inst = gen_ranking_hard(LayeredParams(k=1, h=3))
    n = 3
    for ranks in enumerate_rank_orders(inst):
        out = run_ranking(inst, ranks)
        for u in range(n):
            assert out.role[u] in (Role.ACTIVE, Role.PASSIVE)


def test_omega_fixed_point():
    x = omega_fixed_point()
    assert abs(x - math.exp(-x)) < 1e-12
    assert x * math.exp(x) == pytest.approx(1.0, abs=1e-12)
    assert x == pytest.approx(OMEGA, abs=1e-12)


def test_fluid_recurrence():
    res = fluid_recurrence(10, 3)
    assert res.fractions[0] == 1.0
    assert res.fractions[1] == pytest.approx(math.exp(-1.0))
    long = fluid_recurrence(10, 80)
    assert long.fractions[-1] == pytest.approx(omega_fixed_point(), abs=1e-9)


def test_z_path_against_exponential_decay():
    k = 1000
    path = z_path(k, k)
    t = np.arange(k + 1)
    sup = np.max(np.abs(path - np.exp(-t / k)))
    assert sup < 1e-3
    # the deviation shrinks with k
    k2 = 100
    sup2 = np.max(np.abs(z_path(k2, k2) - np.exp(-np.arange(k2 + 1) / k2)))
    assert sup < sup2


def test_phase_simulation_matches_fluid_limit():
    """Directly simulate one group phase: each deadline consumes the
    minimum-rank unmatched group vertex unless the pendant outranks it."""
    k = 1000
    rng = np.random.default_rng(0)
    fractions = []
    for _ in range(60):
        group = np.sort(rng.random(k))
        ptr = 0
        for _ in range(k):
            if ptr < k and group[ptr] < rng.random():
                ptr += 1
        fractions.append((k - ptr) / k)
    assert np.mean(fractions) == pytest.approx(math.exp(-1.0), abs=0.01)


def test_empirical_ratio_single_edge_exact():
    mean, stderr = empirical_ratio(single_edge(), "ranking", 50, 0)
    assert mean == 1.0
    assert stderr == 0.0


def test_empirical_ratio_validation():
    with pytest.raises(ParamsInvalid):
        empirical_ratio(single_edge(), "ranking", 0, 0)
    with pytest.raises(ParamsInvalid):
        empirical_ratio(single_edge(), "dynamic", 10, 0)


def test_empirical_ratio_greedy_at_least_half():
    inst = gen_ranking_hard(LayeredParams(k=3, h=4))
    mean, _ = empirical_ratio(inst, "greedy", 3, 0)
    assert mean >= 0.5


def test_layered_ladder_approaches_omega():
    dists = []
    for k, h, trials in [(5, 5, 200), (20, 10, 200), (100, 50, 100)]:
        inst = gen_ranking_hard(LayeredParams(k=k, h=h))
        mean, stderr = empirical_ratio(inst, "ranking", trials, 1)
        dists.append(abs(mean - OMEGA))
        assert mean > OMEGA - 3 * stderr  # approaches from above
    assert dists[0] > dists[1] > dists[2]


def test_adversary_tree_empirical_matches_prediction():
    pred = adversary_ratio(3, 4)

    def gen(trial):
        return gen_adversary_tree(AdversaryTreeParams(k=3, h=4, seed=500 + trial))

    mean, stderr = empirical_ratio(gen, "ranking", 100, 0)
    assert mean == pytest.approx(pred.ratio_finite, abs=max(4 * stderr, 0.01))
    assert mean <= 0.64 + 3 * stderr
