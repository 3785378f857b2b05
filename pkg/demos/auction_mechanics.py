"""Walk through one slot of the block auction, bid by bid.

Run it directly:

    python3 demos/auction_mechanics.py

The script runs a handful of slots twice, once on an idealised network
where every bid is visible the moment it is made, and once on a sparse
random graph where bids crawl. It prints the bid log of the last slot
so you can watch the reactive builders leapfrog each other by one
increment at a time, and then shows why the proposer's revenue drops
as soon as latency hides the freshest bids.
"""

import numpy as np

from epbsim import SimConfig, run

# A tiny population keeps the log readable: five builders, one proposer
# pool, no attacking users. delta is the minimum outbid increment.
COMMON = dict(blocks=8, n_users=20, n_builders=5, n_proposers=3,
              attack_builder_count=1, delta=10**8, seed=42, trace_bids=True)


def show(tag, cfg):
    rec = run(cfg)
    last = max(row[0] for row in rec.bid_rows)
    print(f"--- {tag}: bid log of slot {last} ---")
    print("round  builder  bid(gwei)      valuation(gwei)")
    for slot, rnd, builder, bid, val in rec.bid_rows:
        if slot == last:
            print(f"{rnd:5d}  {builder:7d}  {bid:13,d}  {val:15,d}")
    stats = rec.auction_stats[last]
    print(f"slot {last}: stop round {stats['stop_round']}, winner "
          f"{stats['winner_id']} paid {stats['winning_bid']:,} gwei "
          f"(top valuation at stop {stats['v1_at_stop']:,}, runner-up "
          f"{stats['v2_at_stop']:,})")
    # Proposer revenue across the whole run, as a share of block value.
    bids = sum(r["winning_bid"] for r in rec.slot_rows if not r["skipped"])
    vals = sum(r["valuation"] for r in rec.slot_rows if not r["skipped"])
    print(f"proposer take across {cfg.blocks} slots: {bids / vals:.4f} "
          f"of settled block value\n")
    return bids / vals


# Zero-weight edges on a complete graph: every bid lands instantly.
# The reactive builders bid each other up to one increment above the
# runner-up valuation, the textbook second-price outcome.
ideal = show("no latency", SimConfig(
    mode="epbs", er_p=1.0, edge_weight_rule="zero", **COMMON).validate())

# The same population on a sparse unit-weight graph. Bids are stale by
# the graph distance between builder and proposer, so the winner is
# whoever looked best a few rounds ago, and pays yesterday's price.
real = show("sparse graph", SimConfig(
    mode="epbs", er_p=0.3, edge_weight_rule="unit", **COMMON).validate())

print(f"latency shaved the proposer's share from {ideal:.4f} to {real:.4f}.")
print("The gap is the winning builder's structural profit: it reveals the")
print("block it holds at the stop round, not the one its stale bid priced.")
