"""Agent-based simulator of block production with builder auctions.

The package models two production modes over the same latency-limited
mempool: direct validator production ("pos") and a per-slot first-price
auction between specialised builders ("epbs"). It tracks transaction
level utility transfers, extraction attacks, auction dynamics, and the
long-run stake distribution under restaking.
"""

from .core import (
    AgentProfile,
    AuctionOutcome,
    Bid,
    BlockCandidate,
    SettlementRecord,
    SimConfig,
    StakeAccount,
    Transaction,
    ValidationError,
    quantize_stake,
)
from .metrics import (
    auction_efficiency,
    blocks_to_target,
    gini,
    growth_rate,
    inversion_count,
    mev_breakdown,
    phi_epbs,
    phi_pos,
    proposer_share,
)
from .netlat import LatencyGraph, build_graph, generate_erdos_renyi
from .sim import RunRecord, run

__all__ = [
    "AgentProfile",
    "AuctionOutcome",
    "Bid",
    "BlockCandidate",
    "SettlementRecord",
    "SimConfig",
    "StakeAccount",
    "Transaction",
    "ValidationError",
    "quantize_stake",
    "LatencyGraph",
    "build_graph",
    "generate_erdos_renyi",
    "RunRecord",
    "run",
    "auction_efficiency",
    "blocks_to_target",
    "gini",
    "growth_rate",
    "inversion_count",
    "mev_breakdown",
    "phi_epbs",
    "phi_pos",
    "proposer_share",
]

__version__ = "0.1.0"
