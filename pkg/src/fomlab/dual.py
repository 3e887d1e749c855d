"""Randomized dual fitting: marginal ranks, victims, gain sharing and the
empirical verification of the two dual-feasibility conditions.

Per-run duals follow the two-step rule literally: gain sharing on matched
edges, then a compensation h(y_passive_partner) from every active vertex
that has a victim.  Victims are identified post hoc via counterfactual runs
with the active vertex removed, one per vertex, after the full stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import Optional

import numpy as np

from ._parallel import CHUNK_SIZE, chunk_sizes, run_chunked
from .charging import ChargingFunction, check_properties
from .engine import (
    RankAssignment,
    Role,
    Side,
    run_ranking,
    run_ranking_batch,
    run_without,
)
from .errors import ChargingInvalid, NotActive, RankMissing, TooLarge
from .instance import Instance

COND1_TOL = 1e-9


@dataclass(frozen=True)
class DualAssignment:
    alpha: tuple[float, ...]
    gain: tuple[float, ...]
    comp_in: tuple[float, ...]
    comp_out: tuple[float, ...]
    victim_of: dict  # active vertex -> victim vertex


@dataclass(frozen=True)
class MarginalRank:
    theta: float


def marginal_rank(
    instance: Instance, ranks_others: RankAssignment, v: int
) -> MarginalRank:
    """Largest candidate rank c such that v is passive at y_v = c-minus.

    The matching is piecewise constant in y_v between other vertices' ranks,
    so scanning the candidate set {other ranks} + {1} from above is exact.
    """
    if len(ranks_others.ranks) != instance.n:
        raise RankMissing("rank assignment must cover all vertices (v is ignored)")
    candidates = sorted(
        {ranks_others.ranks[u] for u in range(instance.n) if u != v} | {1.0},
        reverse=True,
    )
    for c in candidates:
        out = run_ranking(
            instance, ranks_others.with_rank(v, c, Side.JUST_BELOW)
        )
        if out.role[v] is Role.PASSIVE:
            return MarginalRank(theta=c)
    return MarginalRank(theta=0.0)


def find_victim(
    instance: Instance, ranks: RankAssignment, w: int
) -> Optional[int]:
    """The unique unmatched neighbor of active w that is matched without w."""
    outcome = run_ranking(instance, ranks)
    if outcome.role[w] is not Role.ACTIVE:
        raise NotActive(f"vertex {w} is not active under these ranks")
    without = run_without(instance, ranks, w)
    victims = [
        z
        for z in instance.adj[w]
        if not outcome.is_matched(z) and without.is_matched(z)
    ]
    assert len(victims) <= 1, f"multiple victims for {w}: {victims}"
    return victims[0] if victims else None


def assign_duals(
    instance: Instance, ranks: RankAssignment, charging: ChargingFunction
) -> DualAssignment:
    if not check_properties(charging).passed:
        raise ChargingInvalid("charging function fails its required properties")
    outcome = run_ranking(instance, ranks)
    n = instance.n
    gain = [0.0] * n
    comp_in = [0.0] * n
    comp_out = [0.0] * n
    victim_of = {}
    for v in range(n):
        if outcome.role[v] is not Role.ACTIVE:
            continue
        p = outcome.partner[v]
        y_p = ranks.ranks[p]
        gain[v] = 1.0 - charging.g(y_p, ranks.sides[p])
        gain[p] = charging.g(y_p, ranks.sides[p])
        z = find_victim(instance, ranks, v)
        if z is not None:
            amount = charging.h(y_p, ranks.sides[p])
            comp_out[v] = amount
            comp_in[z] += amount
            victim_of[v] = z
            assert z != v and outcome.is_matched(v)
    alpha = [g + ci - co for g, ci, co in zip(gain, comp_in, comp_out)]
    assert all(a >= -COND1_TOL for a in alpha)
    return DualAssignment(
        alpha=tuple(alpha),
        gain=tuple(gain),
        comp_in=tuple(comp_in),
        comp_out=tuple(comp_out),
        victim_of=victim_of,
    )


# -- vectorized Monte Carlo core ---------------------------------------------


def simulate_alphas_batch(
    instance: Instance, charging: ChargingFunction, ranks_matrix: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial dual vectors for a batch of rank draws.

    Returns (alpha, matched_edges): alpha is (trials x n), matched_edges the
    per-trial matching size.  Cross-checked against assign_duals in tests.
    """
    trials, n = ranks_matrix.shape
    partner, active = run_ranking_batch(instance, ranks_matrix)
    alpha = np.zeros((trials, n))
    rows = np.arange(trials)

    # gain sharing
    for v in range(n):
        sel = active[:, v]
        if not sel.any():
            continue
        p = partner[sel, v]
        gp = charging.g_limit_grid(ranks_matrix[sel, p])
        alpha[sel, v] += 1.0 - gp
        alpha[rows[sel], p] += gp

    # compensations via counterfactual runs, one removed vertex at a time
    for w in range(n):
        if not active[:, w].any() or not instance.adj[w]:
            continue
        partner_wo, _ = run_ranking_batch(instance, ranks_matrix, removed=w)
        victim = np.full(trials, -1, dtype=np.int64)
        vic_count = np.zeros(trials, dtype=np.int64)
        for z in instance.adj[w]:
            hit = active[:, w] & (partner[:, z] < 0) & (partner_wo[:, z] >= 0)
            victim[hit] = z
            vic_count += hit
        assert vic_count.max(initial=0) <= 1, "victim uniqueness violated"
        sel = victim >= 0
        if not sel.any():
            continue
        p = partner[sel, w]
        amount = charging.h_limit_grid(ranks_matrix[sel, p])
        alpha[sel, w] -= amount
        alpha[rows[sel], victim[sel]] += amount

    return alpha, active.sum(axis=1)


def _edge_cover_chunk(args):
    instance, charging, seed, chunk_id, size = args
    rng = np.random.default_rng([seed, chunk_id])
    ranks = rng.random((size, instance.n))
    alpha, msize = simulate_alphas_batch(instance, charging, ranks)
    cond1_bad = int(
        np.sum(np.abs(alpha.sum(axis=1) - msize) > COND1_TOL)
    )
    eu = np.array([e[0] for e in instance.edges], dtype=np.int64)
    ev = np.array([e[1] for e in instance.edges], dtype=np.int64)
    if len(eu):
        cover = alpha[:, eu] + alpha[:, ev]
        sums = cover.sum(axis=0)
        sumsqs = (cover * cover).sum(axis=0)
    else:
        sums = np.zeros(0)
        sumsqs = np.zeros(0)
    return sums, sumsqs, cond1_bad


@dataclass(frozen=True)
class EdgeEstimate:
    u: int
    v: int
    mean: float
    stderr: float
    trials: int


@dataclass(frozen=True)
class FeasibilityReport:
    edges: tuple[EdgeEstimate, ...]
    target: float
    trials: int
    min_mean: float
    failing: tuple[tuple[int, int], ...]
    cond1_violations: int

    @property
    def passed(self) -> bool:
        return not self.failing and self.cond1_violations == 0

    def as_dict(self) -> dict:
        return {
            "edges": [
                {
                    "u": e.u,
                    "v": e.v,
                    "mean": e.mean,
                    "stderr": e.stderr,
                    "trials": e.trials,
                }
                for e in self.edges
            ],
            "summary": {
                "min_mean": self.min_mean,
                "F": self.target,
                "trials": self.trials,
                "cond1_violations": self.cond1_violations,
                "pass": self.passed,
            },
        }


def _edge_statistics(
    instance: Instance,
    charging: ChargingFunction,
    trials: int,
    seed: int,
    workers=None,
) -> tuple[list[EdgeEstimate], int]:
    sizes = chunk_sizes(trials)
    args = [
        (instance, charging, seed, cid, size) for cid, size in enumerate(sizes)
    ]
    results = run_chunked(_edge_cover_chunk, args, workers=workers)
    m = instance.m
    sums = np.zeros(m)
    sumsqs = np.zeros(m)
    cond1_bad = 0
    for s, sq, bad in results:  # fixed order: chunk id
        sums += s
        sumsqs += sq
        cond1_bad += bad
    estimates = []
    for i, (u, v) in enumerate(instance.edges):
        mean = sums[i] / trials
        var = max(0.0, sumsqs[i] / trials - mean * mean)
        stderr = math.sqrt(var / trials)
        estimates.append(EdgeEstimate(u=u, v=v, mean=mean, stderr=stderr, trials=trials))
    return estimates, cond1_bad


def estimate_edge_cover(
    instance: Instance,
    edge: tuple[int, int],
    charging: ChargingFunction,
    trials: int,
    seed: int,
    workers=None,
) -> tuple[float, float]:
    """Monte Carlo estimate of E[alpha_u + alpha_v] over fresh rank draws."""
    e = (min(edge), max(edge))
    if e not in instance.edges:
        raise RankMissing(f"edge {e} not in instance")
    estimates, _ = _edge_statistics(instance, charging, trials, seed, workers)
    for est in estimates:
        if (est.u, est.v) == e:
            return est.mean, est.stderr
    raise AssertionError("unreachable")


def verify_feasibility(
    instance: Instance,
    charging: ChargingFunction,
    target: float,
    trials: int,
    seed: int,
    workers=None,
) -> FeasibilityReport:
    """Check both dual-fitting conditions: exact per-trial mass balance and
    the per-edge expected cover against the target ratio (3-sigma band)."""
    estimates, cond1_bad = _edge_statistics(
        instance, charging, trials, seed, workers
    )
    failing = tuple(
        (e.u, e.v) for e in estimates if e.mean + 3.0 * e.stderr < target
    )
    min_mean = min((e.mean for e in estimates), default=float("inf"))
    return FeasibilityReport(
        edges=tuple(estimates),
        target=target,
        trials=trials,
        min_mean=min_mean,
        failing=failing,
        cond1_violations=cond1_bad,
    )


# -- exact quadrature oracle (n <= 4) ----------------------------------------


def _order_statistic_expectation(
    charging: ChargingFunction, which: str, r: int, n: int
) -> float:
    """E[f(U_(r:n))] by Gauss-Legendre on each smooth piece of f."""
    fn = charging.g if which == "g" else charging.h
    coef = math.factorial(n) / (
        math.factorial(r - 1) * math.factorial(n - r)
    )
    breakpoints = [0.0, 1.0]
    if charging.constants is not None:
        breakpoints.insert(1, charging.constants.t)
    nodes, weights = np.polynomial.legendre.leggauss(32)
    total = 0.0
    for a, b in zip(breakpoints, breakpoints[1:]):
        xs = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        vals = np.array(
            [
                fn(float(x)) * x ** (r - 1) * (1.0 - x) ** (n - r)
                for x in xs
            ]
        )
        total += 0.5 * (b - a) * float(np.dot(weights, vals))
    return coef * total


def exact_edge_cover(
    instance: Instance, edge: tuple[int, int], charging: ChargingFunction
) -> float:
    """Exact E[alpha_u + alpha_v] by summing over rank orders.

    Within a fixed rank order the matching, roles and victims are constant,
    so each alpha decomposes into constants plus g/h evaluated at specific
    order statistics; those expectations integrate in closed form.
    """
    n = instance.n
    if n > 4:
        raise TooLarge("exact quadrature oracle is limited to n <= 4")
    eu, ev = min(edge), max(edge)
    if (eu, ev) not in instance.edges:
        raise RankMissing(f"edge {(eu, ev)} not in instance")

    cache: dict[tuple[str, int], float] = {}

    def expect(which: str, r: int) -> float:
        key = (which, r)
        if key not in cache:
            cache[key] = _order_statistic_expectation(charging, which, r, n)
        return cache[key]

    total = 0.0
    count = 0
    for perm in permutations(range(n)):
        # perm[i] = vertex holding the i-th smallest rank
        position = {vtx: i for i, vtx in enumerate(perm)}
        rep = RankAssignment(
            tuple((position[v] + 0.5) / n for v in range(n)),
            (Side.AT,) * n,
        )
        outcome = run_ranking(instance, rep)
        const = 0.0
        terms: dict[tuple[str, int], float] = {}

        def add(vtx: int, c: float, which: Optional[str], at: Optional[int], sign: float):
            nonlocal const
            if vtx not in (eu, ev):
                return
            const += c
            if which is not None:
                key = (which, position[at] + 1)
                terms[key] = terms.get(key, 0.0) + sign

        for a in range(n):
            if outcome.role[a] is not Role.ACTIVE:
                continue
            p = outcome.partner[a]
            add(a, 1.0, "g", p, -1.0)  # active share 1 - g(y_p)
            add(p, 0.0, "g", p, +1.0)  # passive share g(y_p)
            z = find_victim(instance, rep, a)
            if z is not None:
                add(a, 0.0, "h", p, -1.0)
                add(z, 0.0, "h", p, +1.0)

        value = const + sum(c * expect(wf, r) for (wf, r), c in terms.items())
        total += value
        count += 1
    return total / count
