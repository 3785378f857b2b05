"""How much does value extraction scramble transaction order?

    python3 demos/reordering.py

A block built purely by fee priority has zero inversions: every
transaction's fee is at least the next one's. Sandwich attacks break
that on purpose. A front-run must land immediately before its victim,
so it overpays by one increment; a back-run lands after, underpaying
by one. Each insertion leaves a small monotonicity violation in the
final sequence, and counting violated pairs gives a single scalar for
how far a block is from honest ordering.

The script sweeps attacking users joining a fixed 40-user crowd
(0, 20, 40 extra attackers) against attacking builders drawn from a
10-builder pool (0, 5, 10) and prints the mean inversions per settled
block for each cell. Both axes push the count up, and the auction
amplifies the effect relative to random validator selection because
the builders with extraction plans outbid everyone else for the slot.
"""

from epbsim import SimConfig, run

USER_COUNTS = (0, 20, 40)
BUILDER_COUNTS = (0, 5, 10)


def mean_inversions(mode, attack_users, attack_producers):
    producers = (dict(attack_builder_count=attack_producers) if mode == "epbs"
                 else dict(attack_validator_count=attack_producers))
    cfg = SimConfig(mode=mode, seed=707, blocks=200,
                    n_users=40 + attack_users, attack_user_count=attack_users,
                    n_builders=10, n_proposers=10, n_validators=10,
                    capacity=120, mev_probability=0.3, **producers).validate()
    rec = run(cfg)
    rows = [row for row in rec.slot_rows if not row["skipped"]]
    return sum(row["inversions"] for row in rows) / len(rows)


print("mean inversions per settled block (auction mode, 200 slots per cell)\n")
header = "attack users \\ attack builders"
print(f"{header:>32s}" + "".join(f"{b:>9d}" for b in BUILDER_COUNTS))
for au in USER_COUNTS:
    cells = [mean_inversions("epbs", au, ab) for ab in BUILDER_COUNTS]
    print(f"{au:>32d}" + "".join(f"{c:9.1f}" for c in cells))

# The centre cell again, but with producers chosen at random instead of
# by auction. Half the slots go to builders with no extraction plan, so
# the producer axis only bites half the time.
pos_centre = mean_inversions("pos", 20, 5)
print(f"\nsame centre cell under random validator selection: {pos_centre:.1f}")
