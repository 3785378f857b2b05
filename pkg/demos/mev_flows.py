"""Where extractable value goes as user attackers multiply.

    python3 demos/mev_flows.py

Every user transaction may carry extractable value; whoever lands an
attack adjacent to it captures that value at settlement. This script
sweeps the number of attacking users in both consensus modes and
prints how the captured value splits between users and the block
producer, and how much is left on the table.
"""

from epbsim import SimConfig, mev_breakdown, run

print(f"{'mode':6s} {'attack users':>12s} {'user-captured %':>16s} "
      f"{'producer %':>11s} {'uncaptured %':>13s}")

for mode, producer_kw in (("pos", dict(attack_validator_count=25)),
                          ("epbs", dict(attack_builder_count=25))):
    for attack_users in (0, 25, 50):
        cfg = SimConfig(mode=mode, seed=515, blocks=400,
                        attack_user_count=attack_users,
                        **producer_kw).validate()
        rec = run(cfg)
        user, producer, uncaptured = mev_breakdown(rec)
        print(f"{mode:6s} {attack_users:12d} {float(user):16.2f} "
              f"{float(producer):11.2f} {float(uncaptured):13.2f}")
    print()

# Reading the table: in the baseline mode the producer only extracts
# when the randomly chosen validator happens to be an attacker, so
# users steadily eat into its share as their numbers grow. Under the
# auction an attacking builder nearly always wins the slot (its private
# captures raise its valuation, hence its bid), inserts its own attacks
# adjacent to every victim, and the closest-wins settlement rule then
# beats user attacks on the same victim. Producer dominance persists at
# every level of user aggression.
