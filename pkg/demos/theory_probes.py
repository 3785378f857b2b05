"""Closed-form corner of the model, checked against brute force.

    python3 demos/theory_probes.py

Two small formulas do a lot of work elsewhere in the package, and both
fall out of one-line derivations that are easy to get subtly wrong.
This script evaluates them and then re-derives each numerically.

1. Inclusion bias. If a fraction theta of blocks carries an extraction
   opportunity before selection, and carrying one makes a block omega
   times as likely to be selected, the selected-block fraction is
   omega*theta / (1 + theta*(omega - 1)). Random validator selection
   is the omega = 1 special case.

2. Stake growth. Per-slot expected relative stake growth under full
   restaking: validators and proposers earn in proportion to their
   share of total stake, while a builder that wins with probability f
   and keeps margin pi earns the kept part on its own stake, not on
   the pool - that term is what lets skilled builders detach from the
   crowd.
"""

from fractions import Fraction

import numpy as np

from epbsim import growth_rate, phi_epbs, phi_pos

# -- inclusion bias -----------------------------------------------------------

print("selected-block opportunity rate phi(theta, omega)\n")
print("   theta   omega=1   omega=2   omega=4   omega=8")
for theta in (0.1, 0.3, 0.5, 0.7, 0.9):
    row = [phi_epbs(theta, w) for w in (1, 2, 4, 8)]
    print(f"  {theta:6.1f}" + "".join(f"{v:10.4f}" for v in row))
assert phi_epbs(0.5, 1.0) == phi_pos(0.5)

# Urn check: draw blocks with an opportunity w.p. theta, then accept
# opportunity blocks always and plain blocks w.p. 1/omega. Conditioning
# on acceptance reproduces the selection tilt exactly.
theta, omega = 0.3, 4.0
rng = np.random.default_rng(2024)
has_opp = rng.random(2_000_000) < theta
accepted = has_opp | (rng.random(2_000_000) < 1.0 / omega)
frac = has_opp[accepted][:1_000_000].mean()
print(f"\nurn experiment at theta={theta}, omega={omega}: "
      f"empirical {frac:.4f} vs formula {phi_epbs(theta, omega):.4f}")

# -- stake growth -------------------------------------------------------------

ETH = 10**9
s, total = 32 * ETH, 3_200 * ETH  # one agent holding 1% of stake
v, b = 2 * ETH, int(1.9 * ETH)    # block value and the bid it fetches

print("\nper-slot growth factors, 32 ETH of 3,200 ETH total:")
print(f"  validator (earns v on its slots)        "
      f"{growth_rate('validator', s, total, v=v):.6f}")
print(f"  proposer  (earns the winning bid)       "
      f"{growth_rate('proposer', s, total, b=b):.6f}")
for f, pi in ((0.1, 0.05), (0.5, 0.05), (0.5, 0.5)):
    g = growth_rate("builder", s, total, v=v, f=f, pi=pi)
    print(f"  builder   (f={f:.1f}, margin pi={pi:.2f})       {g:.6f}")

# The builder line exact, in rationals: the kept margin scales with
# 1/s instead of 1/total, a factor of total/s = 100 here.
f, pi = 0.5, 0.5
exact = 1 + Fraction(v, total) * (1 - Fraction(1, 2) * Fraction(1, 2)) \
          + Fraction(1, 4) * Fraction(v, s)
print(f"\nexact builder rate at f=pi=0.5: {exact} "
      f"= {float(exact):.6f} (float path matches: "
      f"{abs(float(exact) - growth_rate('builder', s, total, v=v, f=f, pi=pi)) < 1e-12})")
