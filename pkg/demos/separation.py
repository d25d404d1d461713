"""BLP versus SA1 on the shipped single-loop fixture.

Run: python3 demos/separation.py
"""

from pvcsp import data_path, load_structure, serialize_structure
from pvcsp.morph import blp_power_consistency, frac_hom, sym_frac_polymorphism
from pvcsp.relax import BLP, SA1, decide, opt_blp, opt_sa1, solve_relaxation
from pvcsp.model import opt

A, B, I = (load_structure(data_path(f"ex1_{x}.vcsp")) for x in "ABI")

print("instance: one variable v with the loop R(v,v), weight 1, threshold 2")
print("Opt(I, A) =", opt(I, A)[0], "  Opt(I, B) =", opt(I, B)[0])

sol = solve_relaxation(I, A, BLP)
print("\nBLP optimum", opt_blp(I, A), "splits the loop across the off-diagonal:")
for t in (("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")):
    print(f"  mass on R{t}: {sol.con('R(v,v)', t)}")
print("SA1 optimum", opt_sa1(I, A), "since a repeated variable must read the same value twice")
print("decide at threshold 2:  BLP ->", decide(A, B, I, 2, BLP), "  SA1 ->", decide(A, B, I, 2, SA1))

print("\nA -> B:", [(f, str(p)) for f, p in frac_hom(A, B).named_support()])
cx = frac_hom(B, A)
print("B -> A fails; separating instance with Opt over B =", cx.opt_source, "and over A =", cx.opt_target)
print(serialize_structure(cx.instance))

print("symmetric binary polymorphism:")
out = sym_frac_polymorphism(A, B, 2)
print(f"  none; Opt over the square power = {out.opt_source} < Opt over B = {out.opt_target}")
rep = blp_power_consistency(I, A)
print(f"  BLP = {rep.opt_blp} is reached by the power structure at m_star = {rep.m_star}:",
      {m: str(v) for m, v in rep.opt_power.items()})
