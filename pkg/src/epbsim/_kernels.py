"""Compiled per-slot valuation trajectories.

The auction engine needs every builder's block valuation at every round
of a slot. Valuations depend only on which transactions have arrived,
never on bids, so they can be computed for all 24 rounds in one pass
per (builder, slot) and the engine then works with a plain matrix.

The kernel mirrors agents.build_block_attack exactly: same selection
key, same greedy victim order, same eviction key, same strict commit
inequalities. Any divergence is caught by a cross-check against the
Python planner at settlement time.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(fn):
            return fn

        return deco


@njit(cache=True)
def _valuations_one_builder(
    sel_order,  # tx indices sorted by (-gas, created_at, tx_id)
    vic_order,  # indices of txs with mev > 0, sorted by (-mev, tx_id)
    gas,
    mev,
    arrival,  # absolute round each tx becomes visible to this builder
    capacity,
    slot_base,  # absolute round of the slot's round 0
    rounds,
    attacker,  # 0: benign valuation only, 1: greedy attack insertion
):
    n = sel_order.shape[0]
    out = np.zeros(rounds, dtype=np.int64)
    in_cand = np.zeros(n, dtype=np.uint8)  # indexed by position in sel_order
    committed = np.zeros(n, dtype=np.uint8)
    pos_of = np.empty(n, dtype=np.int64)  # tx index -> position in sel_order
    for p in range(n):
        pos_of[sel_order[p]] = p

    for t in range(1, rounds + 1):
        limit = slot_base + t
        # benign base: first `capacity` visible txs in selection-key order
        for p in range(n):
            in_cand[p] = 0
            committed[p] = 0
        total = 0
        size = 0
        placeholders = 0
        for p in range(n):
            if size >= capacity:
                break
            i = sel_order[p]
            if arrival[i] <= limit:
                in_cand[p] = 1
                total += gas[i]
                size += 1
        if attacker == 0:
            out[t - 1] = total
            continue

        for vpos in range(vic_order.shape[0]):
            v = vic_order[vpos]
            if arrival[v] > limit:
                continue
            pv = pos_of[v]
            room = capacity - size - placeholders
            if in_cand[pv] == 1 and committed[pv] == 0:
                # attack transaction needs one slot
                if room >= 1:
                    cost = 0
                    evict_p = -1
                else:
                    evict_p = -1
                    for p in range(n - 1, -1, -1):
                        if in_cand[p] == 1 and committed[p] == 0 and p != pv:
                            evict_p = p
                            break
                    if evict_p < 0:
                        continue
                    cost = gas[sel_order[evict_p]]
                if mev[v] > cost:
                    if evict_p >= 0:
                        in_cand[evict_p] = 0
                        total -= cost
                        size -= 1
                    placeholders += 1
                    committed[pv] = 1
                    total += mev[v]
            elif in_cand[pv] == 0:
                # (attack, victim) pair needs two slots
                if capacity < 2:
                    continue
                need = 2 - room
                if need < 0:
                    need = 0
                cost = 0
                e1 = -1
                e2 = -1
                if need >= 1:
                    for p in range(n - 1, -1, -1):
                        if in_cand[p] == 1 and committed[p] == 0 and p != pv:
                            if e1 < 0:
                                e1 = p
                                if need == 1:
                                    break
                            else:
                                e2 = p
                                break
                    if e1 < 0 or (need == 2 and e2 < 0):
                        continue
                    cost = gas[sel_order[e1]]
                    if need == 2:
                        cost += gas[sel_order[e2]]
                if mev[v] + gas[v] > cost:
                    if e1 >= 0:
                        in_cand[e1] = 0
                        size -= 1
                    if need == 2 and e2 >= 0:
                        in_cand[e2] = 0
                        size -= 1
                    total -= cost
                    in_cand[pv] = 1
                    committed[pv] = 1
                    size += 1
                    placeholders += 1
                    total += mev[v] + gas[v]
        out[t - 1] = total
    return out


def selection_order(gas, created_at, tx_id):
    """Indices sorted by the block-selection key (-gas, created_at, id)."""
    return np.lexsort((tx_id, created_at, -gas)).astype(np.int64)


def victim_order(mev, tx_id):
    """Indices of value-bearing txs sorted by (-mev, id)."""
    idx = np.nonzero(mev > 0)[0]
    if idx.size == 0:
        return idx.astype(np.int64)
    sub = np.lexsort((tx_id[idx], -mev[idx]))
    return idx[sub].astype(np.int64)


def valuation_matrix(gas, mev, created_at, tx_id, arrivals, capacity, slot_base, rounds, attack_flags):
    """Valuation of every builder at every round of one slot.

    arrivals has shape (n_builders, n_txs): the absolute round at which
    each tx becomes visible to each builder. attack_flags marks which
    builders insert attacks. Returns an int64 (n_builders, rounds)
    matrix.
    """
    sel = selection_order(gas, created_at, tx_id)
    vic = victim_order(mev, tx_id)
    n_b = arrivals.shape[0]
    out = np.zeros((n_b, rounds), dtype=np.int64)
    for b in range(n_b):
        out[b] = _valuations_one_builder(
            sel, vic, gas, mev, arrivals[b], capacity, slot_base, rounds,
            1 if attack_flags[b] else 0,
        )
    return out
