"""Agent behaviour: transaction creation and block construction.

Users emit one transaction per slot. Benign users sample a gas fee and,
with configured probability, an extractable-value amount. Attacking
users instead target the juiciest visible opportunity with a zero-value
front or back transaction priced to land adjacent to the victim.

Producers (builders in the auction mode, validators in the baseline)
assemble blocks from their visible mempool. A benign producer takes the
top-fee transactions; an attacking producer additionally inserts its
own 0-gas attack transactions wherever the captured value exceeds the
fees it displaces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import ROUNDS_PER_SLOT, AgentProfile, Transaction, ValidationError
from .io import sample


# -- user transactions --------------------------------------------------

def make_benign_tx(tx_id: int, creator_id: int, created_at: int, cfg, rng) -> Transaction:
    """Sample a benign transaction.

    Consumes, in order: one gas draw, one uniform gate draw, and one
    value draw iff the gate fires. Keep that order stable; stream
    discipline is part of the reproducibility contract.
    """
    gas = sample(cfg.gas_fee_dist, rng)
    mev = 0
    if rng.random() < cfg.mev_probability:
        mev = sample(cfg.mev_dist, rng)
    return Transaction(tx_id=tx_id, creator_id=creator_id, created_at=created_at, gas_fee=gas, mev_potential=mev)


def pick_victim(visible, taken_targets):
    """Largest visible opportunity not already claimed; ties to lower id."""
    best = None
    for tx in visible:
        if tx.mev_potential <= 0 or tx.tx_id in taken_targets:
            continue
        if best is None or (-tx.mev_potential, tx.tx_id) < (-best.mev_potential, best.tx_id):
            best = tx
    return best


def make_user_tx(profile, tx_id: int, created_at: int, visible, own_targets, cfg, rng) -> Transaction:
    """One per-slot transaction for this user.

    An attacker with no fresh victim falls back to benign behaviour
    (and to the benign RNG consumption pattern). With a victim it
    consumes, in order: the front/back coin, then the usual value gate
    and value draw. Any user transaction can itself carry extractable
    value, attack or not, so attacks are legitimate prey for later
    attackers and for producers.
    """
    if profile.tau == "attack":
        victim = pick_victim(visible, own_targets)
        if victim is not None:
            if rng.random() < 0.5:
                kind, gas = "front", victim.gas_fee + 1
            else:
                kind, gas = "back", max(victim.gas_fee - 1, 0)
            mev = 0
            if rng.random() < cfg.mev_probability:
                mev = sample(cfg.mev_dist, rng)
            return Transaction(
                tx_id=tx_id, creator_id=profile.agent_id, created_at=created_at,
                gas_fee=gas, mev_potential=mev,
                target=victim.tx_id, attack_kind=kind,
            )
    return make_benign_tx(tx_id, profile.agent_id, created_at, cfg, rng)


# -- block construction -------------------------------------------------

@dataclass(frozen=True)
class PlannedAttack:
    """Placeholder for a producer's own 0-gas attack transaction.

    It is materialised into a real Transaction only when the block
    settles, because its created_at is the round the block is revealed.
    """

    target: Transaction


@dataclass(frozen=True)
class BlockPlan:
    """Ordered block content plus the producer's valuation of it."""

    builder_id: int
    entries: tuple  # Transaction | PlannedAttack, in block order
    valuation: int

    def planned_targets(self) -> tuple:
        return tuple(e.target.tx_id for e in self.entries if isinstance(e, PlannedAttack))

    def materialize(self, created_at: int, id_alloc) -> tuple:
        """Replace placeholders with real attack transactions."""
        out = []
        for e in self.entries:
            if isinstance(e, PlannedAttack):
                out.append(Transaction(
                    tx_id=next(id_alloc), creator_id=self.builder_id,
                    created_at=created_at, gas_fee=0,
                    target=e.target.tx_id, attack_kind="front",
                ))
            else:
                out.append(e)
        return tuple(out)


def _fee_order(txs):
    return sorted(txs, key=lambda t: (-t.gas_fee, t.created_at, t.tx_id))


def build_block_benign(builder_id: int, pool, capacity: int) -> BlockPlan:
    sel = _fee_order(pool)[:capacity]
    return BlockPlan(builder_id=builder_id, entries=tuple(sel), valuation=sum(t.gas_fee for t in sel))


def build_block_attack(builder_id: int, pool, capacity: int) -> BlockPlan:
    """Greedy attack insertion on top of the benign selection.

    Victims are visited once, by descending value then id. For a victim
    already in the block, the attack transaction needs one slot and is
    committed iff its value strictly exceeds the single displaced fee.
    For a victim outside the block the (attack, victim) pair needs two
    slots and is committed iff value + victim fee strictly exceed the
    displaced fees. Displacement always removes the lowest-fee entries,
    ties broken toward newer then higher id; attack transactions and
    already-committed victims are never displaced.
    """
    entries: list = _fee_order(pool)[:capacity]
    valuation = sum(t.gas_fee for t in entries)
    committed: set = set()
    pairs_end = 0  # inserted (attack, victim) pairs stay at the head, commit order

    def evictable(skip_id):
        # lowest fee first; ties prefer dropping newer, then higher id.
        # Committed victims are protected; anything else, including user
        # attack transactions and not-yet-visited victims, may go.
        cands = [
            e for e in entries
            if isinstance(e, Transaction)
            and e.tx_id not in committed and e.tx_id != skip_id
        ]
        cands.sort(key=lambda t: (t.gas_fee, -t.created_at, -t.tx_id))
        return cands

    victims = sorted(
        (t for t in pool if t.mev_potential > 0),
        key=lambda t: (-t.mev_potential, t.tx_id),
    )
    in_block = {e.tx_id for e in entries}
    for victim in victims:
        if victim.tx_id in in_block:
            free = capacity - len(entries)
            if free >= 1:
                cost, evicted = 0, []
            else:
                cands = evictable(victim.tx_id)
                if not cands:
                    continue
                cost, evicted = cands[0].gas_fee, [cands[0]]
            if victim.mev_potential > cost:
                for e in evicted:
                    entries.remove(e)
                    in_block.discard(e.tx_id)
                entries.insert(entries.index(victim), PlannedAttack(target=victim))
                committed.add(victim.tx_id)
                valuation += victim.mev_potential - cost
        else:
            free = capacity - len(entries)
            need = max(0, 2 - free)
            cands = evictable(victim.tx_id)
            if len(cands) < need or capacity < 2:
                continue
            evicted = cands[:need]
            cost = sum(t.gas_fee for t in evicted)
            if victim.mev_potential + victim.gas_fee > cost:
                for e in evicted:
                    entries.remove(e)
                    in_block.discard(e.tx_id)
                entries.insert(pairs_end, PlannedAttack(target=victim))
                entries.insert(pairs_end + 1, victim)
                pairs_end += 2
                in_block.add(victim.tx_id)
                committed.add(victim.tx_id)
                valuation += victim.mev_potential + victim.gas_fee - cost
    return BlockPlan(builder_id=builder_id, entries=tuple(entries), valuation=valuation)


def plan_block(builder_id: int, tau: str, pool, capacity: int) -> BlockPlan:
    if tau == "attack":
        return build_block_attack(builder_id, pool, capacity)
    return build_block_benign(builder_id, pool, capacity)


def validator_build(validator, pool, capacity: int) -> BlockPlan:
    """Direct block production for the baseline mode."""
    return plan_block(validator.agent_id, validator.tau, pool, capacity)


def block_valuation(txs, builder_id: int) -> int:
    """Gas fees plus the value the producer's own attacks stand to take.

    Counts m_j for every included victim targeted by one of the
    producer's attack transactions whose ordering constraint holds.
    """
    pos = {t.tx_id: i for i, t in enumerate(txs)}
    total = sum(t.gas_fee for t in txs)
    credited = set()
    for a in txs:
        if not a.is_attack or a.creator_id != builder_id:
            continue
        if a.target not in pos or a.target in credited:
            continue
        victim = txs[pos[a.target]]
        if a.attack_kind == "front" and pos[a.tx_id] >= pos[victim.tx_id]:
            continue
        if a.attack_kind == "back" and pos[a.tx_id] <= pos[victim.tx_id]:
            continue
        total += victim.mev_potential
        credited.add(a.target)
    return total


# -- bidding --------------------------------------------------------------

def bid_reactive(valuation: int, history, delta: int) -> int:
    """min(v, max(H) + delta); an empty history opens at min(v, delta).

    history is a collection of bid amounts already visible to the
    bidder. The cap at the own valuation is what makes overbidding
    impossible by construction.
    """
    best = max(history, default=0)
    return min(valuation, best + delta)


def bid_last_minute(valuation: int, history, delta: int, rnd: int, threshold: int) -> Optional[int]:
    """Reactive bidding gated to rounds >= threshold; None before."""
    if rnd < threshold:
        return None
    return bid_reactive(valuation, history, delta)


def bidding_active(strategy: str, rnd: int, threshold: int) -> bool:
    if strategy == "reactive":
        return True
    if strategy == "last_minute":
        return rnd >= threshold
    raise ValidationError(f"unknown strategy {strategy!r}")


@dataclass
class BuilderState:
    """Mutable per-slot builder bookkeeping for the auction engine."""

    profile: AgentProfile
    plan: Optional[BlockPlan] = None

    @property
    def pending_attacks(self) -> tuple:
        if self.plan is None:
            return ()
        return tuple(e for e in self.plan.entries if isinstance(e, PlannedAttack))


# -- adaptive stopping ----------------------------------------------------

@dataclass(frozen=True)
class ProposerStopState:
    """Shared auction-termination state carried from slot to slot."""

    current_stop: int
    last_winning_bid: int = 0
    last_bid_log: tuple = ()

    def __post_init__(self) -> None:
        if not 1 <= self.current_stop <= ROUNDS_PER_SLOT:
            raise ValidationError("stop round must lie in [1, 24]")


def proposer_next_stop(state: ProposerStopState, outcome) -> int:
    """Shift the stop round toward where better bids were left behind.

    A bid after the stop that beat the winner argues for waiting
    longer; one before it argues for stopping earlier. When both
    happened, waiting wins: a missed future bid is unrealized revenue
    while an early one was already on the books. Result clamps to
    [1, 24].
    """
    stop = state.current_stop
    later = any(b.round > stop and b.amount > outcome.winning_bid for b in outcome.all_bids)
    earlier = any(b.round < stop and b.amount > outcome.winning_bid for b in outcome.all_bids)
    if later:
        stop += 1
    elif earlier:
        stop -= 1
    return min(ROUNDS_PER_SLOT, max(1, stop))


# -- capture resolution --------------------------------------------------

def resolve_captures(txs, producer_id: int) -> dict:
    """Decide which attack claims each victim's value after inclusion.

    At most one capture per victim. A front attack must precede its
    victim, a back attack must follow it. Among valid claimants the
    closest wins; ties go to the producer's own transaction, then to
    the lower transaction id. Returns victim tx_id -> winning attack tx.
    """
    pos = {t.tx_id: i for i, t in enumerate(txs)}
    winners: dict = {}
    for victim in txs:
        if victim.mev_potential <= 0:
            continue
        claimants = []
        for a in txs:
            if not a.is_attack or a.target != victim.tx_id:
                continue
            if a.attack_kind == "front" and pos[a.tx_id] >= pos[victim.tx_id]:
                continue
            if a.attack_kind == "back" and pos[a.tx_id] <= pos[victim.tx_id]:
                continue
            dist = abs(pos[a.tx_id] - pos[victim.tx_id])
            claimants.append((dist, 0 if a.creator_id == producer_id else 1, a.tx_id, a))
        if claimants:
            winners[victim.tx_id] = min(claimants)[3]
    return winners
