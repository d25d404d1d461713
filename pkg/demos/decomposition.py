"""Reading an SA1 optimum back as an integral solution of a twisted cover.

Run: python3 demos/decomposition.py
"""

from pvcsp.decomp import decompose, verify_decomposition
from pvcsp.model import components, instance, serialize_structure, template, val

SIG = [("R", 2)]
I = instance(SIG, ["a", "b", "c"], {"R": {("a", "b"): 1, ("b", "c"): 1, ("c", "a"): 1}})
A = template(SIG, ["0", "1"], {"R": {("0", "0"): 1, ("0", "1"): 0, ("1", "0"): 0, ("1", "1"): 1}})

d = decompose(I, A)
print("triangle, cost 1 on equal endpoints; SA1 optimum", d.sa1_value, "with denominator m =", d.m)
print("columns p_v:", d.columns)
print("the copies have", len(components(d.copies)), "components; the twisted cover has", len(components(d.twisted)))
print(serialize_structure(d.twisted))
h = dict(zip(d.twisted.universe, (A.universe[b] for b in d.assignment)))
print("assignment:", h, " its value:", val(d.twisted, A, d.assignment))
print("checks:", verify_decomposition(I, A, d).to_json())
