"""Domain types shared across the simulator.

All monetary quantities are integers in gwei; no floats ever touch a
balance, a bid, or a stake. Time is measured in discrete rounds, 24 per
slot, so a transaction created in slot s at in-slot round r carries
created_at = s * 24 + r.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Any, Optional

GWEI_PER_ETH = 10**9
STAKE_UNIT = 32 * GWEI_PER_ETH  # one validator's worth of stake
ROUNDS_PER_SLOT = 24

ROLES = ("user", "builder", "proposer", "validator")
TAUS = ("benign", "attack")
STRATEGIES = ("reactive", "last_minute")
ATTACK_KINDS = ("none", "front", "back")


class ValidationError(ValueError):
    """Raised when a config or domain value violates its contract."""


@dataclass(frozen=True)
class Transaction:
    """A mempool transaction.

    mev_potential is the value extractable by whoever successfully
    attacks this transaction. Any user transaction may carry it, attack
    transactions included (an attack names its victim in `target` and
    can in turn be somebody else's prey). Producer-inserted attacks are
    the exception: they are created at block-reveal time, priced at zero
    gas, and carry nothing worth chasing.
    """

    tx_id: int
    creator_id: int
    created_at: int
    gas_fee: int
    mev_potential: int = 0
    target: Optional[int] = None
    attack_kind: str = "none"

    def __post_init__(self) -> None:
        if self.gas_fee < 0 or self.mev_potential < 0:
            raise ValidationError("gas_fee and mev_potential must be >= 0")
        if self.created_at < 0:
            raise ValidationError("created_at must be >= 0")
        if self.attack_kind not in ATTACK_KINDS:
            raise ValidationError(f"unknown attack_kind {self.attack_kind!r}")
        if (self.target is not None) != (self.attack_kind != "none"):
            raise ValidationError("target must be set iff attack_kind is front/back")

    @property
    def is_attack(self) -> bool:
        return self.attack_kind != "none"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Transaction":
        return cls(**d)


@dataclass(frozen=True)
class AgentProfile:
    """Static description of one agent: role, type, strategy, node."""

    agent_id: int
    role: str
    tau: str = "benign"
    strategy: Optional[str] = None
    gamma: int = 0
    node: int = 0

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValidationError(f"unknown role {self.role!r}")
        if self.tau not in TAUS:
            raise ValidationError(f"unknown tau {self.tau!r}")
        if self.gamma not in (0, 1):
            raise ValidationError("gamma must be 0 or 1")
        if self.role == "builder":
            if self.strategy not in STRATEGIES:
                raise ValidationError("builders need a bidding strategy")
        elif self.strategy is not None:
            raise ValidationError("only builders carry a bidding strategy")
        if self.role == "proposer" and self.tau != "benign":
            raise ValidationError("proposers do not build payloads")


@dataclass(frozen=True)
class BlockCandidate:
    """An ordered list of transactions plus the builder's valuation."""

    builder_id: int
    slot: int
    round: int
    txs: tuple
    valuation: int

    def __post_init__(self) -> None:
        ids = [t.tx_id for t in self.txs]
        if len(ids) != len(set(ids)):
            raise ValidationError("duplicate tx_id in block candidate")
        if self.valuation < 0:
            raise ValidationError("valuation must be >= 0")


@dataclass(frozen=True)
class Bid:
    builder_id: int
    slot: int
    round: int
    amount: int

    def __post_init__(self) -> None:
        if self.amount < 0:
            raise ValidationError("bid amount must be >= 0")
        if self.round < 1:
            raise ValidationError("bid round starts at 1")


@dataclass(frozen=True)
class AuctionOutcome:
    """Result of one slot's auction.

    winner_id is None for a skipped slot (no bid visible to the
    proposer at the stop round); the full bid log is retained either
    way because the stopping rule reads bids the proposer never saw.
    """

    slot: int
    stop_round: int
    winner_id: Optional[int]
    winning_bid: int
    block: Optional[BlockCandidate]
    all_bids: tuple


@dataclass(frozen=True)
class SettlementRecord:
    """Utility deltas and the MEV split for one settled block."""

    slot: int
    utilities: dict  # agent_id -> gwei delta, only touched agents
    gas_total: int
    mev_captured_by_users: int
    mev_captured_by_producer: int
    mev_uncaptured: int

    def total_mev(self) -> int:
        return (
            self.mev_captured_by_users
            + self.mev_captured_by_producer
            + self.mev_uncaptured
        )


def quantize_stake(capital: int) -> int:
    """Active stake is capital rounded down to whole 32-ETH units."""
    if capital < 0:
        raise ValidationError("capital must be >= 0")
    return STAKE_UNIT * (capital // STAKE_UNIT)


@dataclass(frozen=True)
class StakeAccount:
    """Continuous capital and its quantized active stake."""

    agent_id: int
    capital: int
    active_stake: int

    def __post_init__(self) -> None:
        if self.active_stake != quantize_stake(self.capital):
            raise ValidationError("active_stake must equal quantized capital")

    @classmethod
    def from_capital(cls, agent_id: int, capital: int) -> "StakeAccount":
        return cls(agent_id, capital, quantize_stake(capital))


_DEF_GAS = {"kind": "lognormal", "mu": 21.41641094921429, "sigma": 1.0}
# mu above is ln(2e9): median gas fee 2 gwei * 1e9
_DEF_MEV = {"kind": "gamma", "shape": 0.5, "scale": 4.0e9}


@dataclass
class SimConfig:
    """Full run configuration. JSON keys match these field names."""

    mode: str = "epbs"  # "epbs" | "pos"
    seed: int = 0
    blocks: int = 1000
    n_users: int = 100
    n_builders: int = 50
    n_proposers: int = 50
    n_validators: int = 50
    attack_user_count: int = 0
    attack_builder_count: int = 0
    attack_validator_count: int = 0
    capacity: int = 100
    rounds_per_slot: int = ROUNDS_PER_SLOT
    delta: int = 10**8
    last_minute_fraction: float = 0.25
    last_minute_threshold: int = 20
    er_p: float = 0.1
    edge_weight_rule: str = "unit"  # "unit" | "uniform012" | "zero"
    gas_fee_dist: dict = field(default_factory=lambda: dict(_DEF_GAS))
    mev_dist: dict = field(default_factory=lambda: dict(_DEF_MEV))
    mev_probability: float = 0.2
    initial_stop_round: int = 24
    expiry_slots: int = 5
    user_tx_last_round: int = ROUNDS_PER_SLOT
    gamma_mode: str = "coin"  # "coin" | "all_zero" | "all_one"
    restaking_enabled: bool = False
    base_stake: int = STAKE_UNIT
    high_stake: int = 8 * STAKE_UNIT
    high_stake_count: int = 5
    initial_stakes: Optional[dict] = None  # agent_id -> gwei, overrides the above
    trace_bids: bool = False

    def validate(self) -> "SimConfig":
        if self.mode not in ("epbs", "pos"):
            raise ValidationError(f"mode must be 'epbs' or 'pos', got {self.mode!r}")
        if self.rounds_per_slot != ROUNDS_PER_SLOT:
            raise ValidationError("rounds_per_slot is fixed at 24")
        if self.blocks < 1:
            raise ValidationError("blocks must be >= 1")
        if self.capacity < 1:
            raise ValidationError("capacity must be >= 1")
        if self.delta <= 0:
            raise ValidationError("delta must be a positive gwei amount")
        for name in ("n_users", "n_builders", "n_proposers", "n_validators"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")
        if not 0 <= self.attack_user_count <= self.n_users:
            raise ValidationError("attack_user_count out of range")
        if not 0 <= self.attack_builder_count <= self.n_builders:
            raise ValidationError("attack_builder_count out of range")
        if not 0 <= self.attack_validator_count <= self.n_validators:
            raise ValidationError("attack_validator_count out of range")
        if not 0.0 <= self.er_p <= 1.0:
            raise ValidationError("er_p must lie in [0, 1]")
        if not 0.0 <= self.last_minute_fraction <= 1.0:
            raise ValidationError("last_minute_fraction must lie in [0, 1]")
        if not 1 <= self.last_minute_threshold <= self.rounds_per_slot:
            raise ValidationError("last_minute_threshold must lie in [1, 24]")
        if not 1 <= self.initial_stop_round <= self.rounds_per_slot:
            raise ValidationError("initial_stop_round must lie in [1, 24]")
        if not 0.0 <= self.mev_probability <= 1.0:
            raise ValidationError("mev_probability must lie in [0, 1]")
        if self.expiry_slots < 1:
            raise ValidationError("expiry_slots must be >= 1")
        if not 1 <= self.user_tx_last_round <= self.rounds_per_slot:
            raise ValidationError("user_tx_last_round must lie in [1, 24]")
        if self.gamma_mode not in ("coin", "all_zero", "all_one"):
            raise ValidationError("gamma_mode must be coin, all_zero or all_one")
        if self.edge_weight_rule not in ("unit", "uniform012", "zero"):
            raise ValidationError(
                "edge_weight_rule must be unit, uniform012 or zero")
        if self.base_stake < 0 or self.high_stake < 0 or self.high_stake_count < 0:
            raise ValidationError("stake settings must be >= 0")
        if self.mode == "epbs" and self.n_builders < 1:
            raise ValidationError("epbs mode needs at least one builder")
        if self.mode == "epbs" and self.n_proposers < 1:
            raise ValidationError("epbs mode needs at least one proposer")
        if self.mode == "pos" and self.n_validators < 1:
            raise ValidationError("pos mode needs at least one validator")
        for key in ("gas_fee_dist", "mev_dist"):
            d = getattr(self, key)
            if not isinstance(d, dict) or "kind" not in d:
                raise ValidationError(f"{key} must be a distribution spec dict")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**d)
        if cfg.initial_stakes is not None:
            cfg.initial_stakes = {int(k): int(v) for k, v in cfg.initial_stakes.items()}
        return cfg.validate()
