"""Multi-slot runs: agent setup, per-slot flow, restaking dynamics.

Randomness is consumed in one documented order so results are a pure
function of (config, seed): graph edges first, then agent assignment
(users' attack subset; builders' attack subset and last-minute subset,
or validators' attack subset; reinvestment coins for the staking
roles), then per slot the users' emission rounds in agent-id order
followed by their transaction contents in (round, agent-id) order,
the producer-selection draw, and in PoS the build-round draw. Nothing
else may touch the generator.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import valuation_matrix
from .agents import (
    ProposerStopState,
    make_user_tx,
    plan_block,
    proposer_next_stop,
    validator_build,
)
from .auction import BidderView, run_slot_auction, settle_block
from .core import (
    AgentProfile,
    SettlementRecord,
    SimConfig,
    StakeAccount,
    ValidationError,
)
from .io import AGENTS_HEADER, BIDS_HEADER, SLOTS_HEADER, STAKES_HEADER
from .metrics import inversion_count
from .netlat import LatencyGraph, generate_erdos_renyi, visible_mempool


class ZeroTotalStake(Exception):
    """Stake-weighted selection over a pool with no active stake."""


@dataclass
class RunRecord:
    """Everything a finished run exposes to metrics and serialization."""

    config: SimConfig
    agents: list
    graph: LatencyGraph
    slot_rows: list = field(default_factory=list)
    settlements: list = field(default_factory=list)
    profits: dict = field(default_factory=dict)
    blocks_produced: dict = field(default_factory=dict)
    stake_rows: list = field(default_factory=list)
    bid_rows: list = field(default_factory=list)
    auction_stats: list = field(default_factory=list)


def select_producer(stakes, rng) -> int:
    """Stake-weighted draw over StakeAccounts, exact in integer gwei."""
    total = 0
    for acc in stakes:
        total += acc.active_stake
    if total <= 0:
        raise ZeroTotalStake("no active stake in the pool")
    pick = int(rng.integers(0, total))
    run = 0
    for acc in stakes:
        run += acc.active_stake
        if pick < run:
            return acc.agent_id
    raise AssertionError("cumulative walk fell off the end")


def apply_restake(account: StakeAccount, reward: int, gamma: int) -> StakeAccount:
    """Reinvest a slot reward; active stake requantizes on 32-ETH steps."""
    if reward < 0:
        raise ValidationError("reward must be >= 0")
    if not gamma or not reward:
        return account
    return StakeAccount.from_capital(account.agent_id, account.capital + reward)


def _gamma_draws(cfg, rng, count: int) -> list:
    if cfg.gamma_mode == "coin":
        return [int(g) for g in rng.integers(0, 2, size=count)]
    return [1 if cfg.gamma_mode == "all_one" else 0] * count


def build_agents(cfg: SimConfig, rng) -> list:
    """Profiles in agent-id order: users, then builders and proposers
    (ePBS) or validators (PoS). Each agent owns one graph node, so
    node == agent_id."""
    attack_users = {int(i) for i in rng.permutation(cfg.n_users)[:cfg.attack_user_count]}
    if cfg.mode == "epbs":
        attack_b = {int(i) for i in rng.permutation(cfg.n_builders)[:cfg.attack_builder_count]}
        lm_count = int(math.floor(cfg.n_builders * cfg.last_minute_fraction + 0.5))
        late = {int(i) for i in rng.permutation(cfg.n_builders)[:lm_count]}
        gammas = _gamma_draws(cfg, rng, cfg.n_builders + cfg.n_proposers)
    else:
        attack_v = {int(i) for i in rng.permutation(cfg.n_validators)[:cfg.attack_validator_count]}
        gammas = _gamma_draws(cfg, rng, cfg.n_validators)

    profiles = []
    ids = itertools.count()
    for u in range(cfg.n_users):
        i = next(ids)
        profiles.append(AgentProfile(
            agent_id=i, role="user", tau="attack" if u in attack_users else "benign",
            strategy=None, gamma=0, node=i))
    if cfg.mode == "epbs":
        for b in range(cfg.n_builders):
            i = next(ids)
            profiles.append(AgentProfile(
                agent_id=i, role="builder", tau="attack" if b in attack_b else "benign",
                strategy="last_minute" if b in late else "reactive",
                gamma=gammas[b], node=i))
        for p in range(cfg.n_proposers):
            i = next(ids)
            profiles.append(AgentProfile(
                agent_id=i, role="proposer", tau="benign", strategy=None,
                gamma=gammas[cfg.n_builders + p], node=i))
    else:
        for v in range(cfg.n_validators):
            i = next(ids)
            profiles.append(AgentProfile(
                agent_id=i, role="validator", tau="attack" if v in attack_v else "benign",
                strategy=None, gamma=gammas[v], node=i))
    return profiles


def _initial_stakes(cfg, pool_ids) -> dict:
    """First high_stake_count pool agents (by agent id) start rich, the
    rest at base_stake; an explicit initial_stakes map overrides both."""
    out = {}
    for idx, aid in enumerate(pool_ids):
        cap = cfg.high_stake if idx < cfg.high_stake_count else cfg.base_stake
        if cfg.initial_stakes is not None and aid in cfg.initial_stakes:
            cap = cfg.initial_stakes[aid]
        out[aid] = StakeAccount.from_capital(aid, cap)
    return out


def _creation_slot(created_at: int, rounds: int) -> int:
    # rounds run 1..24, so round 24 still belongs to its own slot
    return (created_at - 1) // rounds


def _emit_user_txs(cfg, rng, users, slot, pool, graph, node_of, own_targets, ids):
    """One transaction per user per slot.

    Emission rounds are drawn first for every user in agent-id order;
    the transactions themselves are then created in (round, agent-id)
    order, so an attacker's victim search covers everything that has
    propagated to its node by its own emission round, same-slot
    transactions included. Round ties resolve in agent-id order.
    """
    base = slot * cfg.rounds_per_slot
    rounds = [int(rng.integers(1, cfg.user_tx_last_round + 1)) for _ in users]
    order = sorted(zip(rounds, users), key=lambda p: (p[0], p[1].agent_id))
    out = []
    for rnd, u in order:
        created = base + rnd
        seen = []
        if u.tau == "attack":
            seen = visible_mempool(u.node, created, pool, graph, node_of)
            seen += visible_mempool(u.node, created, out, graph, node_of)
        tx = make_user_tx(u, next(ids), created, seen, own_targets[u.agent_id], cfg, rng)
        if tx.is_attack:
            own_targets[u.agent_id].add(tx.target)
        out.append(tx)
    return out


def _pool_arrays(mempool, node_of):
    gas = np.array([t.gas_fee for t in mempool], dtype=np.int64)
    mev = np.array([t.mev_potential for t in mempool], dtype=np.int64)
    created = np.array([t.created_at for t in mempool], dtype=np.int64)
    tx_id = np.array([t.tx_id for t in mempool], dtype=np.int64)
    creator_nodes = np.array([node_of[t.creator_id] for t in mempool], dtype=np.intp)
    return gas, mev, created, tx_id, creator_nodes


def run(cfg: SimConfig) -> RunRecord:
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    if cfg.mode == "epbs":
        return run_epbs(cfg, rng)
    return run_pos(cfg, rng)


def run_epbs(cfg: SimConfig, rng=None) -> RunRecord:
    cfg.validate()
    if cfg.mode != "epbs":
        raise ValidationError("run_epbs needs mode='epbs'")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    n_agents = cfg.n_users + cfg.n_builders + cfg.n_proposers
    graph = generate_erdos_renyi(n_agents, cfg.er_p, rng, cfg.edge_weight_rule)
    agents = build_agents(cfg, rng)
    users = [a for a in agents if a.role == "user"]
    builders = [a for a in agents if a.role == "builder"]
    proposers = [a for a in agents if a.role == "proposer"]
    node_of = {a.agent_id: a.node for a in agents}
    tau_of = {a.agent_id: a.tau for a in agents}
    gamma_of = {a.agent_id: a.gamma for a in agents}

    rec = RunRecord(config=cfg, agents=agents, graph=graph)
    rec.profits = {a.agent_id: 0 for a in agents}
    rec.blocks_produced = {a.agent_id: 0 for a in agents}

    # vertical integration: builders and proposers stake in one pool
    pool_ids = [a.agent_id for a in builders] + [a.agent_id for a in proposers]
    stakes = _initial_stakes(cfg, pool_ids) if cfg.restaking_enabled else None
    if cfg.restaking_enabled:
        stake_log = np.empty((cfg.blocks * len(pool_ids), 4), dtype=np.int64)

    bidders = tuple(BidderView(b.agent_id, b.strategy, b.node) for b in builders)
    b_index = {bv.builder_id: k for k, bv in enumerate(bidders)}
    builder_nodes = np.array([b.node for b in builders], dtype=np.intp)
    attack_flags = np.array([b.tau == "attack" for b in builders])

    stop_state = ProposerStopState(cfg.initial_stop_round)
    mempool: list = []
    own_targets = {u.agent_id: set() for u in users}
    ids = itertools.count()
    R = cfg.rounds_per_slot

    for slot in range(cfg.blocks):
        base = slot * R
        mempool = [t for t in mempool
                   if slot < _creation_slot(t.created_at, R) + cfg.expiry_slots]
        mempool.extend(_emit_user_txs(cfg, rng, users, slot, tuple(mempool),
                                      graph, node_of, own_targets, ids))

        if cfg.restaking_enabled:
            producer_pick = select_producer([stakes[i] for i in pool_ids], rng)
        else:
            producer_pick = proposers[int(rng.integers(0, len(proposers)))].agent_id
        # a builder drawn as proposer collects the bid and sits out its own auction
        excluded = frozenset({producer_pick}) if producer_pick in b_index else frozenset()
        proposer_node = node_of[producer_pick]

        gas, mev, created, tx_id, creator_nodes = _pool_arrays(mempool, node_of)
        arrivals = created[None, :] + graph.dist[np.ix_(builder_nodes, creator_nodes)]
        vals = valuation_matrix(gas, mev, created, tx_id, arrivals, cfg.capacity,
                                base, R, attack_flags)

        outcome = run_slot_auction(slot, bidders, stop_state.current_stop, vals,
                                   graph.dist, proposer_node, cfg, excluded)

        if cfg.trace_bids:
            for b in outcome.all_bids:
                rec.bid_rows.append((slot, b.round, b.builder_id, b.amount,
                                     int(vals[b_index[b.builder_id], b.round - 1])))

        elig = [k for k, bv in enumerate(bidders) if bv.builder_id not in excluded]
        at_stop = vals[elig, stop_state.current_stop - 1]
        at_end = vals[elig, R - 1]
        v1_stop = int(at_stop.max()) if elig else 0
        v2_stop = int(np.partition(at_stop, -2)[-2]) if len(elig) >= 2 else 0
        v1_end = int(at_end.max()) if elig else 0
        v2_end = int(np.partition(at_end, -2)[-2]) if len(elig) >= 2 else 0

        if outcome.winner_id is None:
            settlement = SettlementRecord(slot=slot, utilities={}, gas_total=0,
                                          mev_captured_by_users=0,
                                          mev_captured_by_producer=0, mev_uncaptured=0)
            row = dict(slot=slot, mode="epbs", producer_id=-1,
                       stop_round=outcome.stop_round, winning_bid=0, valuation=0,
                       gas_total=0, mev_user=0, mev_producer=0, mev_uncaptured=0,
                       inversions=0, skipped=1)
            winner_val_end = winner_val_stop = 0
        else:
            # The winner reveals the block it holds at the stop round: its
            # utility is v(T) - b, where the accepted bid b was emitted
            # d(proposer, winner) rounds earlier and is therefore stale.
            w = outcome.winner_id
            widx = b_index[w]
            t_stop = stop_state.current_stop
            seen = [t for t, a in zip(mempool, arrivals[widx]) if a <= base + t_stop]
            plan = plan_block(w, tau_of[w], seen, cfg.capacity)
            if plan.valuation != int(vals[widx, t_stop - 1]):
                raise AssertionError(
                    f"slot {slot}: planner valuation {plan.valuation} != "
                    f"kernel {int(vals[widx, t_stop - 1])}")
            txs = plan.materialize(base + t_stop, ids)
            settlement = settle_block(slot, txs, w, plan.valuation,
                                      proposer_id=producer_pick,
                                      winning_bid=outcome.winning_bid)
            included = {t.tx_id for t in txs}
            mempool = [t for t in mempool if t.tx_id not in included]
            rec.blocks_produced[w] += 1
            row = dict(slot=slot, mode="epbs", producer_id=w,
                       stop_round=outcome.stop_round,
                       winning_bid=outcome.winning_bid, valuation=plan.valuation,
                       gas_total=settlement.gas_total,
                       mev_user=settlement.mev_captured_by_users,
                       mev_producer=settlement.mev_captured_by_producer,
                       mev_uncaptured=settlement.mev_uncaptured,
                       inversions=inversion_count(t.created_at for t in txs),
                       skipped=0)
            winner_val_end = int(vals[widx, R - 1])
            winner_val_stop = plan.valuation

        rec.slot_rows.append(row)
        rec.settlements.append(settlement)
        rec.auction_stats.append(dict(
            slot=slot, skipped=row["skipped"], winner_id=outcome.winner_id,
            winning_bid=outcome.winning_bid, stop_round=outcome.stop_round,
            v1_at_stop=v1_stop, v2_at_stop=v2_stop, v1_end=v1_end,
            v2_end=v2_end, winner_val_end=winner_val_end,
            winner_val_stop=winner_val_stop))
        for aid, delta in settlement.utilities.items():
            rec.profits[aid] += delta

        if cfg.restaking_enabled:
            for aid, delta in settlement.utilities.items():
                if aid in stakes and delta > 0:
                    stakes[aid] = apply_restake(stakes[aid], delta, gamma_of[aid])
            lo = slot * len(pool_ids)
            for j, aid in enumerate(pool_ids):
                acc = stakes[aid]
                stake_log[lo + j] = (slot, aid, acc.capital, acc.active_stake)

        stop_state = ProposerStopState(proposer_next_stop(stop_state, outcome),
                                       outcome.winning_bid, outcome.all_bids)

    if cfg.restaking_enabled:
        rec.stake_rows = stake_log
    return rec


def run_pos(cfg: SimConfig, rng=None) -> RunRecord:
    cfg.validate()
    if cfg.mode != "pos":
        raise ValidationError("run_pos needs mode='pos'")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    n_agents = cfg.n_users + cfg.n_validators
    graph = generate_erdos_renyi(n_agents, cfg.er_p, rng, cfg.edge_weight_rule)
    agents = build_agents(cfg, rng)
    users = [a for a in agents if a.role == "user"]
    validators = [a for a in agents if a.role == "validator"]
    node_of = {a.agent_id: a.node for a in agents}
    profile_of = {a.agent_id: a for a in agents}

    rec = RunRecord(config=cfg, agents=agents, graph=graph)
    rec.profits = {a.agent_id: 0 for a in agents}
    rec.blocks_produced = {a.agent_id: 0 for a in agents}

    pool_ids = [a.agent_id for a in validators]
    stakes = _initial_stakes(cfg, pool_ids) if cfg.restaking_enabled else None
    if cfg.restaking_enabled:
        stake_log = np.empty((cfg.blocks * len(pool_ids), 4), dtype=np.int64)

    mempool: list = []
    own_targets = {u.agent_id: set() for u in users}
    ids = itertools.count()
    R = cfg.rounds_per_slot

    for slot in range(cfg.blocks):
        base = slot * R
        mempool = [t for t in mempool
                   if slot < _creation_slot(t.created_at, R) + cfg.expiry_slots]
        mempool.extend(_emit_user_txs(cfg, rng, users, slot, tuple(mempool),
                                      graph, node_of, own_targets, ids))

        if cfg.restaking_enabled:
            producer = select_producer([stakes[i] for i in pool_ids], rng)
        else:
            producer = validators[int(rng.integers(0, len(validators)))].agent_id
        build_round = int(rng.integers(1, R + 1))

        seen = visible_mempool(node_of[producer], base + build_round, mempool,
                               graph, node_of)
        plan = validator_build(profile_of[producer], seen, cfg.capacity)
        txs = plan.materialize(base + build_round, ids)
        settlement = settle_block(slot, txs, producer, plan.valuation)
        included = {t.tx_id for t in txs}
        mempool = [t for t in mempool if t.tx_id not in included]

        rec.blocks_produced[producer] += 1
        rec.slot_rows.append(dict(
            slot=slot, mode="pos", producer_id=producer, stop_round=build_round,
            winning_bid=0, valuation=plan.valuation,
            gas_total=settlement.gas_total,
            mev_user=settlement.mev_captured_by_users,
            mev_producer=settlement.mev_captured_by_producer,
            mev_uncaptured=settlement.mev_uncaptured,
            inversions=inversion_count(t.created_at for t in txs), skipped=0))
        rec.settlements.append(settlement)
        for aid, delta in settlement.utilities.items():
            rec.profits[aid] += delta

        if cfg.restaking_enabled:
            delta = settlement.utilities.get(producer, 0)
            if delta > 0:
                stakes[producer] = apply_restake(stakes[producer], delta,
                                                 profile_of[producer].gamma)
            lo = slot * len(pool_ids)
            for j, aid in enumerate(pool_ids):
                acc = stakes[aid]
                stake_log[lo + j] = (slot, aid, acc.capital, acc.active_stake)

    if cfg.restaking_enabled:
        rec.stake_rows = stake_log
    return rec


# -- CSV table assembly ----------------------------------------------------

def slots_table(rec: RunRecord) -> tuple:
    return SLOTS_HEADER, [tuple(r[k] for k in SLOTS_HEADER) for r in rec.slot_rows]


def agents_table(rec: RunRecord) -> tuple:
    rows = []
    for a in rec.agents:
        rows.append((a.agent_id, a.role, a.tau, a.strategy or "", a.gamma,
                     rec.profits[a.agent_id], rec.blocks_produced[a.agent_id]))
    return AGENTS_HEADER, rows


def stakes_table(rec: RunRecord) -> tuple:
    return STAKES_HEADER, rec.stake_rows


def bids_table(rec: RunRecord) -> tuple:
    return BIDS_HEADER, rec.bid_rows
