"""Per-slot first-price auction: bidding rounds, winner choice, settlement.

Builders re-bid every round their strategy permits. Within a round the
reactive map b -> min(v, max(others) + delta) is iterated to its fixed
point before the round closes; the closed form below avoids stepping
through delta-sized raises one at a time, which for realistic
valuations (hundreds of ETH against sub-gwei increments) would never
terminate inside 24 rounds. The log stores one entry per builder per
round, and only when its standing bid actually rose.

The proposer never sees this resolution directly: it reads the log
through the latency filter at its pre-committed stop round and takes
the maximum. Everything after the stop round still lands in the log,
because next slot's stop-round update needs it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .agents import bidding_active, resolve_captures
from .core import AuctionOutcome, Bid, SettlementRecord, ValidationError


class NoVisibleBids(Exception):
    """No bid reached the proposer by its stop round; slot is skipped."""


@dataclass(frozen=True)
class BidderView:
    """Static per-slot facts the engine needs about one builder."""

    builder_id: int
    strategy: str
    node: int


def resolve_bid_round(actives, standing, valuations, frozen_max: int, delta: int) -> dict:
    """Fixed point of simultaneous reactive bidding for one round.

    actives: builder ids permitted to bid now. standing and valuations
    map builder id -> gwei. frozen_max is the highest standing bid among
    non-participants (normally 0). Returns only the increases.

    Each bidder's ceiling is max(standing, valuation). Everyone except
    the highest-ceiling bidder ends pinned at their own ceiling; the
    top one needs only to clear the runner-up by delta, capped by its
    valuation. A lone bidder with nothing to react to opens at
    min(v, delta).
    """
    if not actives:
        return {}
    caps = {i: max(standing[i], valuations[i]) for i in actives}
    top = min(actives, key=lambda i: (-caps[i], i))
    runner_up = frozen_max
    for i in actives:
        if i != top and caps[i] > runner_up:
            runner_up = caps[i]
    out = {}
    top_bid = max(standing[top], min(caps[top], runner_up + delta))
    if top_bid > standing[top]:
        out[top] = top_bid
    for i in actives:
        if i != top and caps[i] > standing[i]:
            out[i] = caps[i]
    return out


def select_winner(bids, dist, node_by_builder, proposer_node: int, stop_round: int) -> Optional[Bid]:
    """Highest bid visible to the proposer at its stop round.

    Ties break toward the earlier emission round, then the smaller
    builder id. Returns None when nothing has propagated in time.
    """
    best = None
    for b in bids:
        if b.round + dist[proposer_node, node_by_builder[b.builder_id]] > stop_round:
            continue
        key = (-b.amount, b.round, b.builder_id)
        if best is None or key < best[0]:
            best = (key, b)
    return None if best is None else best[1]


def run_slot_auction(slot: int, bidders, stop_round: int, valuations, dist,
                     proposer_node: int, cfg, excluded=frozenset()) -> AuctionOutcome:
    """Run all 24 bidding rounds of one slot and pick the winner.

    valuations is an int64 matrix [bidder index, round-1] as produced by
    the valuation kernel, aligned with `bidders`. excluded builders sit
    the slot out entirely (a builder acting as its own proposer).
    Returns an outcome with winner_id None for a skipped slot; block
    settlement is the caller's job.
    """
    if not 1 <= stop_round <= cfg.rounds_per_slot:
        raise ValidationError("stop round out of range")
    index = {bv.builder_id: k for k, bv in enumerate(bidders)}
    standing = {bv.builder_id: 0 for bv in bidders}
    log = []
    for t in range(1, cfg.rounds_per_slot + 1):
        actives = [
            bv.builder_id for bv in bidders
            if bv.builder_id not in excluded
            and bidding_active(bv.strategy, t, cfg.last_minute_threshold)
        ]
        vals_t = {i: int(valuations[index[i], t - 1]) for i in actives}
        frozen = 0
        for bv in bidders:
            if bv.builder_id not in actives and standing[bv.builder_id] > frozen:
                frozen = standing[bv.builder_id]
        for i, amount in sorted(resolve_bid_round(actives, standing, vals_t, frozen, cfg.delta).items()):
            standing[i] = amount
            log.append(Bid(builder_id=i, slot=slot, round=t, amount=amount))
    node_by_builder = {bv.builder_id: bv.node for bv in bidders}
    winner = select_winner(log, dist, node_by_builder, proposer_node, stop_round)
    if winner is None:
        return AuctionOutcome(slot=slot, stop_round=stop_round, winner_id=None,
                              winning_bid=0, block=None, all_bids=tuple(log))
    return AuctionOutcome(slot=slot, stop_round=stop_round, winner_id=winner.builder_id,
                          winning_bid=winner.amount, block=None, all_bids=tuple(log))


def settle_block(slot: int, txs, producer_id: int, producer_valuation: int,
                 proposer_id: Optional[int] = None, winning_bid: int = 0) -> SettlementRecord:
    """Apply all per-block utility transfers and split the included MEV.

    The producer earns its valuation minus the winning bid (the full
    valuation when there is no auction and the bid is zero); the
    proposer earns the bid. Users pay gas on every included
    transaction, and each resolved capture moves the victim's value to
    the attacker's creator. The record is zero-sum by construction and
    asserts it.
    """
    utilities: dict = {}

    def add(agent, delta):
        if delta:
            utilities[agent] = utilities.get(agent, 0) + delta

    gas_total = 0
    for t in txs:
        gas_total += t.gas_fee
        add(t.creator_id, -t.gas_fee)

    captures = resolve_captures(txs, producer_id)
    mev_user = mev_producer = mev_uncaptured = 0
    for t in txs:
        if t.mev_potential <= 0:
            continue
        attacker = captures.get(t.tx_id)
        if attacker is None:
            mev_uncaptured += t.mev_potential
            continue
        add(t.creator_id, -t.mev_potential)
        if attacker.creator_id == producer_id:
            # already counted inside the producer's valuation below
            mev_producer += t.mev_potential
        else:
            add(attacker.creator_id, t.mev_potential)
            mev_user += t.mev_potential

    if gas_total + mev_producer != producer_valuation:
        raise AssertionError(
            f"slot {slot}: settled value {gas_total + mev_producer} != "
            f"producer valuation {producer_valuation}"
        )
    add(producer_id, producer_valuation - winning_bid)
    if proposer_id is not None:
        add(proposer_id, winning_bid)
    elif winning_bid:
        raise ValidationError("winning bid without a proposer to pay")

    total = sum(utilities.values())
    if total != 0:
        raise AssertionError(f"slot {slot}: settlement drifts by {total}")
    return SettlementRecord(
        slot=slot, utilities=utilities, gas_total=gas_total,
        mev_captured_by_users=mev_user, mev_captured_by_producer=mev_producer,
        mev_uncaptured=mev_uncaptured,
    )


def settle_epbs(outcome: AuctionOutcome, txs, producer_valuation: int,
                proposer_id: int) -> SettlementRecord:
    """Settlement wrapper for an auctioned slot; skipped slots are no-ops."""
    if outcome.winner_id is None:
        return SettlementRecord(slot=outcome.slot, utilities={}, gas_total=0,
                                mev_captured_by_users=0, mev_captured_by_producer=0,
                                mev_uncaptured=0)
    return settle_block(outcome.slot, txs, outcome.winner_id, producer_valuation,
                        proposer_id=proposer_id, winning_bid=outcome.winning_bid)
