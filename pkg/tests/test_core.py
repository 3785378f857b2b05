"""Domain type validation and config round-trips."""

import pytest

from epbsim.core import (
    STAKE_UNIT,
    AgentProfile,
    Bid,
    BlockCandidate,
    SimConfig,
    StakeAccount,
    Transaction,
    ValidationError,
    quantize_stake,
)


def tx(**kw):
    base = dict(tx_id=1, creator_id=2, created_at=30, gas_fee=100)
    base.update(kw)
    return Transaction(**base)


class TestTransaction:
    def test_benign_roundtrip(self):
        t = tx(mev_potential=7)
        assert Transaction.from_dict(t.to_dict()) == t
        assert not t.is_attack

    def test_attack_needs_target(self):
        with pytest.raises(ValidationError):
            tx(attack_kind="front")

    def test_target_needs_attack_kind(self):
        with pytest.raises(ValidationError):
            tx(target=9)

    def test_attack_may_carry_mev(self):
        t = tx(attack_kind="back", target=9, mev_potential=5)
        assert t.is_attack and t.mev_potential == 5

    def test_negative_fee_rejected(self):
        with pytest.raises(ValidationError):
            tx(gas_fee=-1)


class TestAgentProfile:
    def test_builder_requires_strategy(self):
        with pytest.raises(ValidationError):
            AgentProfile(agent_id=0, role="builder", tau="benign")

    def test_non_builder_rejects_strategy(self):
        with pytest.raises(ValidationError):
            AgentProfile(agent_id=0, role="user", strategy="reactive")

    def test_proposer_always_benign(self):
        with pytest.raises(ValidationError):
            AgentProfile(agent_id=0, role="proposer", tau="attack")

    def test_valid_builder(self):
        a = AgentProfile(agent_id=3, role="builder", tau="attack", strategy="last_minute")
        assert a.strategy == "last_minute"


class TestBlockAndBid:
    def test_duplicate_tx_rejected(self):
        t = tx()
        with pytest.raises(ValidationError):
            BlockCandidate(builder_id=0, slot=0, round=1, txs=(t, t), valuation=0)

    def test_bid_round_positive(self):
        with pytest.raises(ValidationError):
            Bid(builder_id=0, slot=0, round=0, amount=5)
        Bid(builder_id=0, slot=0, round=1, amount=0)


class TestStake:
    def test_quantize_floors_to_unit(self):
        assert quantize_stake(0) == 0
        assert quantize_stake(STAKE_UNIT - 1) == 0
        assert quantize_stake(STAKE_UNIT) == STAKE_UNIT
        assert quantize_stake(3 * STAKE_UNIT + 17) == 3 * STAKE_UNIT

    def test_account_invariant(self):
        acct = StakeAccount.from_capital(agent_id=1, capital=2 * STAKE_UNIT + 5)
        assert acct.active_stake == 2 * STAKE_UNIT
        with pytest.raises(ValidationError):
            StakeAccount(agent_id=1, capital=10, active_stake=STAKE_UNIT)


class TestSimConfig:
    def test_defaults_validate(self):
        SimConfig().validate()

    def test_roundtrip(self):
        cfg = SimConfig(mode="pos", seed=9, blocks=10, attack_validator_count=3)
        assert SimConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError):
            SimConfig.from_dict({"mode": "epbs", "bogus": 1})

    def test_attack_count_bounds(self):
        with pytest.raises(ValidationError):
            SimConfig(attack_builder_count=99, n_builders=50).validate()

    def test_rounds_pinned(self):
        with pytest.raises(ValidationError):
            SimConfig(rounds_per_slot=12).validate()

    def test_mode_checked(self):
        with pytest.raises(ValidationError):
            SimConfig(mode="hybrid").validate()
