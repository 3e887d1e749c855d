"""Online algorithms over an instance's event stream.

Both Ranking and Greedy are lazy: all decisions happen at deadline events.
The deadline vertex of each matched pair is labeled active, its partner
passive.  `run_ranking_batch` is a numpy kernel that replays the same
execution for many rank vectors at once; it is cross-checked against the
scalar engine in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import IndexOutOfRange, RankMissing
from .instance import EventKind, Instance


class Side(Enum):
    """Whether a rank value means exactly y or the limit y-minus."""

    AT = "at"
    JUST_BELOW = "just_below"


class Role(Enum):
    ACTIVE = "active"
    PASSIVE = "passive"


@dataclass(frozen=True)
class RankAssignment:
    ranks: tuple[float, ...]
    sides: tuple[Side, ...]

    def key(self, v: int) -> tuple[float, int, int]:
        """Comparison key: rank, then just-below before at, then vertex id."""
        return (self.ranks[v], 0 if self.sides[v] is Side.JUST_BELOW else 1, v)

    def with_rank(
        self, v: int, rank: float, side: Side = Side.AT
    ) -> "RankAssignment":
        ranks = list(self.ranks)
        sides = list(self.sides)
        ranks[v] = rank
        sides[v] = side
        return RankAssignment(tuple(ranks), tuple(sides))


def ranks_from_values(values, sides=None) -> RankAssignment:
    vals = tuple(float(x) for x in values)
    if sides is None:
        side_t = (Side.AT,) * len(vals)
    else:
        side_t = tuple(sides)
    return RankAssignment(vals, side_t)


def sample_ranks(instance: Instance, seed: int) -> RankAssignment:
    """I.i.d. uniform [0,1) ranks, deterministic per seed."""
    rng = np.random.default_rng(seed)
    return ranks_from_values(rng.random(instance.n))


@dataclass(frozen=True)
class MatchingOutcome:
    pairs: frozenset[tuple[int, int]]
    partner: tuple[int, ...]  # -1 for unmatched
    role: tuple[Optional[Role], ...]
    unmatched: frozenset[int]
    trace: Optional[tuple[str, ...]] = None

    @property
    def size(self) -> int:
        return len(self.pairs)

    def is_matched(self, v: int) -> bool:
        return self.partner[v] >= 0


def _finish(
    instance: Instance,
    partner: list[int],
    role: list[Optional[Role]],
    removed: Optional[int],
    trace: Optional[list[str]],
) -> MatchingOutcome:
    pairs = frozenset(
        (v, p) for v, p in enumerate(partner) if 0 <= v < p
    )
    unmatched = frozenset(
        v for v in range(instance.n) if partner[v] < 0 and v != removed
    )
    return MatchingOutcome(
        pairs=pairs,
        partner=tuple(partner),
        role=tuple(role),
        unmatched=unmatched,
        trace=tuple(trace) if trace is not None else None,
    )


def _execute(
    instance: Instance,
    pick,
    removed: Optional[int],
    trace_fmt=None,
) -> MatchingOutcome:
    partner = [-1] * instance.n
    role: list[Optional[Role]] = [None] * instance.n
    trace: Optional[list[str]] = [] if trace_fmt is not None else None
    for ev in instance.events:
        v = ev.vertex
        if ev.kind is not EventKind.DEADLINE or v == removed:
            continue
        if partner[v] >= 0:
            if trace is not None:
                trace.append(trace_fmt(v, partner[v], True))
            continue
        candidates = [
            u for u in instance.adj[v] if partner[u] < 0 and u != removed
        ]
        u = pick(v, candidates) if candidates else None
        if u is not None:
            partner[v] = u
            partner[u] = v
            role[v] = Role.ACTIVE
            role[u] = Role.PASSIVE
        if trace is not None:
            trace.append(trace_fmt(v, u, False))
    return _finish(instance, partner, role, removed, trace)


def run_ranking(
    instance: Instance,
    ranks: RankAssignment,
    *,
    removed: Optional[int] = None,
    with_trace: bool = False,
) -> MatchingOutcome:
    """Lazy Ranking: a deadline vertex takes its min-rank unmatched neighbor."""
    if len(ranks.ranks) != instance.n:
        raise RankMissing(
            f"rank assignment covers {len(ranks.ranks)} of {instance.n} vertices"
        )
    trace_fmt = None
    if with_trace:
        def trace_fmt(v, u, already_matched):
            if u is None:
                return f"deadline v={v} decision=unmatched partner=- rank=-"
            decision = "already-matched" if already_matched else "match"
            return (
                f"deadline v={v} decision={decision} partner={u} "
                f"rank={ranks.ranks[u]:.12g}"
            )

    return _execute(
        instance, lambda v, cs: min(cs, key=ranks.key), removed, trace_fmt
    )


def run_greedy(instance: Instance) -> MatchingOutcome:
    """Greedy baseline: a deadline vertex takes its earliest-arrived unmatched
    neighbor (ties by smallest id, though arrival positions are unique)."""
    return _execute(
        instance,
        lambda v, cs: min(cs, key=lambda u: (instance.arrival_pos[u], u)),
        None,
    )


def run_without(
    instance: Instance, ranks: RankAssignment, removed: int
) -> MatchingOutcome:
    """Ranking on the sub-instance with `removed` and its edges deleted."""
    if not 0 <= removed < instance.n:
        raise IndexOutOfRange(f"vertex {removed} out of range [0, {instance.n})")
    return run_ranking(instance, ranks, removed=removed)


def run_ranking_batch(
    instance: Instance,
    ranks_matrix: np.ndarray,
    removed: Optional[int] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Replay Ranking for every row of ranks_matrix (trials x n).

    Returns (partner, active): partner is (trials x n) int32 with -1 for
    unmatched, active a boolean matrix marking deadline-side endpoints.
    Ties break toward the smaller vertex id, matching the scalar engine for
    all-At rank assignments.
    """
    trials, n = ranks_matrix.shape
    if n != instance.n:
        raise RankMissing(f"rank matrix covers {n} of {instance.n} vertices")
    partner = np.full((trials, n), -1, dtype=np.int32)
    active = np.zeros((trials, n), dtype=bool)
    rows = np.arange(trials)
    for v in instance.deadline_order:
        if v == removed:
            continue
        nbrs = [u for u in instance.adj[v] if u != removed]
        if not nbrs:
            continue
        nbrs_arr = np.array(nbrs, dtype=np.int32)
        cand_ranks = np.where(
            (partner[:, nbrs_arr] < 0), ranks_matrix[:, nbrs_arr], np.inf
        )
        best_idx = np.argmin(cand_ranks, axis=1)
        best_rank = cand_ranks[rows, best_idx]
        decide = (partner[:, v] < 0) & np.isfinite(best_rank)
        chosen = nbrs_arr[best_idx[decide]]
        rsel = rows[decide]
        partner[rsel, v] = chosen
        partner[rsel, chosen] = v
        active[rsel, v] = True
    return partner, active
