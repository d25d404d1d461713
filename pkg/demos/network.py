"""The anonymous network cannot tell apart instances with equal iterated degrees.

Run: python3 demos/network.py
"""

from pvcsp.distsim import simulate
from pvcsp.generate import equiv_pairs
from pvcsp.model import template
from pvcsp.relax import opt_sa1
from pvcsp.wl import equiv1

SIG = [("R", 2)]
# two twists of one random base, built with different variable orders
(I, J), = equiv_pairs(1, 1)
A = template(SIG, ["0", "1"], {"R": {("0", "0"): 2, ("0", "1"): 1, ("1", "0"): 1, ("1", "1"): 3}})

print(f"|I| = {len(I.universe)}, I != J: {I != J}, equiv1(I, J): {equiv1(I, J)}")
s = opt_sa1(I, A)
print("centralised SA1 optimum:", s)
for threshold in (s - 1, s, s + 1):
    a, b = simulate(I, A, A, threshold), simulate(J, A, A, threshold)
    print(f"threshold={threshold}: I -> {a.verdict} in {a.rounds} rounds, J -> {b.verdict} in {b.rounds} rounds")
