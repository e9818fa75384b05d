"""
Finite differences against the secular solver
=============================================

The lumped-mass finite-difference scheme is second order: halving the
mesh width divides the eigenvalue error by about four.
"""

import math

import numpy as np

from fpgraph import gamma_tilde
from fpgraph.spectral import full_spectrum_fd, full_spectrum_secular

g, m = gamma_tilde(5)
exact = full_spectrum_secular(g, m, 10.0).expanded()[:6] ** 2
print("exact lambda:", np.round(exact, 8))

prev = None
for cells in (4, 8, 16, 32, 64):
    fd = full_spectrum_fd(g, m, 1 / cells, 6).expanded() ** 2
    err = float(np.abs(fd - exact).max())
    order = "" if prev is None else f"  observed order {math.log2(prev / err):.2f}"
    print(f"h=1/{cells:<3d} max error {err:.3e}{order}")
    prev = err
