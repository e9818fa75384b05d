"""
Root-of-unity branches on a radial tree
=======================================

On a tree the seeds found by joint diagonalization span the same space
as the classical root-of-unity vectors on the children of each vertex.
Lifting one of them to the edges gives the familiar omega pattern.
"""

import numpy as np

from fpgraph import decompose_discrete, radial_tree
from fpgraph.generators import ns_reference_vector
from fpgraph.reduction import lift_vector

np.set_printoptions(precision=4, suppress=True)

g, _ = radial_tree((1, 3, 2))
dec = decompose_discrete(g)
seeds = np.array([b.seed.values for b in dec.branches if b.n_r == 2])
refs = np.array([ns_reference_vector(g, (1, 0), s).values for s in (1, 2)])

q, _ = np.linalg.qr(seeds.T)
resid = np.linalg.norm(refs.T - q @ (q.conj().T @ refs.T))
print("seeds on S_2:", len(seeds), " projection residual of the reference vectors:", f"{resid:.1e}")

for s in (1, 2):
    w = lift_vector(g, ns_reference_vector(g, (1, 0), s))
    print(f"\ns={s}")
    print("  generation 1 times sqrt(3):", w.values[1] * np.sqrt(3))
    print("  generation 2 times sqrt(6):", w.values[2] * np.sqrt(6))
