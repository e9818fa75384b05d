"""
Branch census of an antitree
============================

After balancing, new branches start at sphere 1 and on every inserted
sphere.  The radial branch sees jumps sqrt(s_{j+1}/s_{j-1}) at each
sphere of the original antitree.
"""

import math
from collections import Counter

from fpgraph import antitree, balance, decompose_discrete
from fpgraph.reduction import jump_data

sizes = (1, 2, 3, 2, 4)
g, m = antitree(sizes)

root = decompose_discrete(g).branches[0]
print("radial branch jumps on the antitree itself:")
for jp in jump_data(g, root):
    print(f"  j={jp.j}: d={jp.d:.6f}  expected {math.sqrt(sizes[jp.j + 1] / sizes[jp.j - 1]):.6f}  d*c={jp.d * jp.c:.1f}")

res = balance(g, m)
print("\nbalanced spheres:", res.graph.sphere_sizes)
print("origin of each sphere:", res.sphere_origin)

dec = decompose_discrete(res.graph)
census = Counter((b.n_r, len(b)) for b in dec.branches)
print("\n(start sphere, chain length): count")
for key in sorted(census):
    print(f"  {key}: {census[key]}")
print("total chain length:", sum(len(b) for b in dec.branches), "=", res.graph.num_vertices, "vertices")
