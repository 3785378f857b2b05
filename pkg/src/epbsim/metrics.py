"""Post-run analytics: inequality, ordering distortion, MEV attribution,
auction efficiency, and the closed-form inclusion/growth evaluators."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .core import ValidationError


class NoSettledSlots(Exception):
    """Every slot in the run was skipped; the ratio is undefined."""


class UnknownAgent(Exception):
    pass


def gini(values) -> Optional[Fraction]:
    """Population Gini coefficient, sum |xi - xj| / (2 n sum x).

    Returns an exact Fraction (it feeds ratio CSV columns), or None,
    a flagged null, when every value is zero and the coefficient is
    undefined.
    """
    xs = sorted(int(v) for v in values)
    if xs and xs[0] < 0:
        raise ValidationError("gini expects non-negative values")
    n = len(xs)
    total = sum(xs)
    if n == 0 or total == 0:
        return None
    # sorted form of the pairwise sum: sum_i sum_j |xi-xj| = 2*(sum i*x_(i)) - (n+1)*total
    weighted = sum(i * x for i, x in enumerate(xs, start=1))
    return Fraction(2 * weighted - (n + 1) * total, n * total)


def inversion_count(created_at_seq) -> int:
    """Pairs out of chronological order in a block, counted by merge sort.

    An inversion is (i, j) with i before j in the block but
    created_at_i > created_at_j; equal timestamps are in order.
    """
    seq = list(created_at_seq)

    def count(a):
        if len(a) <= 1:
            return a, 0
        mid = len(a) // 2
        left, nl = count(a[:mid])
        right, nr = count(a[mid:])
        merged = []
        inv = nl + nr
        i = j = 0
        while i < len(left) and j < len(right):
            if left[i] <= right[j]:
                merged.append(left[i])
                i += 1
            else:
                inv += len(left) - i
                merged.append(right[j])
                j += 1
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged, inv

    return count(seq)[1]


def mev_breakdown(run) -> tuple:
    """Split included victims' MEV into (user, producer, uncaptured) percent.

    Exact Fractions that sum to 100 whenever any MEV landed on-chain;
    (0, 0, 0) flags a run with none.
    """
    user = producer = uncaptured = 0
    for rec in run.settlements:
        user += rec.mev_captured_by_users
        producer += rec.mev_captured_by_producer
        uncaptured += rec.mev_uncaptured
    total = user + producer + uncaptured
    if total == 0:
        return Fraction(0), Fraction(0), Fraction(0)
    return (Fraction(100 * user, total), Fraction(100 * producer, total),
            Fraction(100 * uncaptured, total))


def producer_profits(run) -> list:
    """Profit totals of the block-producing role, in agent-id order.

    Builders produce under auctions, validators under direct selection;
    this is the population the profit-inequality figures are drawn on.
    """
    role = "builder" if run.config.mode == "epbs" else "validator"
    return [run.profits[a.agent_id] for a in run.agents if a.role == role]


def proposer_share(run) -> Fraction:
    """Total winning bids over total winner valuations, non-skipped slots."""
    bids = value = 0
    for row in run.slot_rows:
        if row["skipped"]:
            continue
        bids += row["winning_bid"]
        value += row["valuation"]
    if value == 0:
        raise NoSettledSlots("no settled slot with positive valuation")
    return Fraction(bids, value)


def auction_efficiency(run) -> tuple:
    """(top-valuation win rate, mean bid/v1, mean bid/v2).

    Win rate asks whether the winner held the highest final-round
    valuation. The ratio means use the top two valuations at the stop
    round; slots with fewer than two active builders (v2 = 0) carry no
    ratio and are left out, as are skipped slots.
    """
    wins = settled = 0
    r1 = []
    r2 = []
    for st in run.auction_stats:
        if st["skipped"]:
            continue
        settled += 1
        if st["winner_val_end"] == st["v1_end"]:
            wins += 1
        if st["v2_at_stop"] > 0:
            r1.append(st["winning_bid"] / st["v1_at_stop"])
            r2.append(st["winning_bid"] / st["v2_at_stop"])
    win_rate = wins / settled if settled else 0.0
    mean1 = sum(r1) / len(r1) if r1 else 0.0
    mean2 = sum(r2) / len(r2) if r2 else 0.0
    return win_rate, mean1, mean2


def phi_pos(theta: float) -> float:
    """Inclusion probability with no producer advantage: the prior itself."""
    if not 0 <= theta <= 1:
        raise ValidationError("theta must lie in [0, 1]")
    return float(theta)


def phi_epbs(theta: float, omega: float) -> float:
    """Posterior probability that a block includes an MEV opportunity.

    omega is the factor by which MEV-carrying blocks are likelier to
    win the auction; omega = 1 collapses to the prior. Values below 1
    are outside the model and rejected.
    """
    if not 0 <= theta <= 1:
        raise ValidationError("theta must lie in [0, 1]")
    if omega < 1:
        raise ValidationError("omega must be >= 1")
    return (omega * theta) / (1 + theta * (omega - 1))


def growth_rate(role: str, s: int, total: int, *, v: int = 0, b: int = 0,
                f: float = 0.0, pi: float = 0.0, gamma: int = 1) -> float:
    """Expected per-slot relative stake growth for one staking role.

    validator: 1 + g*v/total; proposer: 1 + g*b/total;
    builder: 1 + g*(v*(1-f*pi)/total + f*pi*v/s), where f is the win
    probability and pi the profit margin kept when winning.
    """
    if s <= 0:
        raise ValidationError("stake must be positive")
    if total < s:
        raise ValidationError("total stake cannot be below own stake")
    if not (0 <= f <= 1 and 0 <= pi <= 1):
        raise ValidationError("f and pi must lie in [0, 1]")
    if role == "validator":
        return 1.0 + gamma * (v / total)
    if role == "proposer":
        return 1.0 + gamma * (b / total)
    if role == "builder":
        return 1.0 + gamma * (v * (1.0 - f * pi) / total + f * pi * v / s)
    raise ValidationError(f"unknown role {role!r}")


def blocks_to_target(run, agent_id: int, target: int = 10**11) -> Optional[int]:
    """Blocks until an agent's cumulative profit first reaches target.

    1-based: an agent earning the target in its first settled slot gets
    1; a zero target is met before any block (0). None if never reached.
    """
    if all(p.agent_id != agent_id for p in run.agents):
        raise UnknownAgent(f"agent {agent_id} not in run")
    if target <= 0:
        return 0
    acc = 0
    for count, rec in enumerate(run.settlements, start=1):
        acc += rec.utilities.get(agent_id, 0)
        if acc >= target:
            return count
    return None
