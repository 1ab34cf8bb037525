#!/usr/bin/env python3
# Godunov sweeps against the exact Riemann solution of A(u) = u^2 on the
# torus: shock + wrap rarefaction, first-order convergence table.

import numpy as np

from sscl import (Field, burgers, cell_centers, exact_riemann_burgers,
                  exact_riemann_burgers_periodic, sweep_1d)

comp = burgers().components[0]

print("pointwise oracle: shock (1,0) at x=0.5, t=1 ->",
      exact_riemann_burgers(1.0, 0.0, 0.5, 1.0))
print("pointwise oracle: fan (0,1) at x=1, t=1   ->",
      exact_riemann_burgers(0.0, 1.0, 1.0, 1.0))

print("\ncells    L1 error   ratio")
prev = None
for m in (256, 512, 1024, 2048, 4096):
    x = cell_centers(m)
    u0 = Field(np.where(x < 0.5, 1.0, 0.0))
    out, _ = sweep_1d(u0, 0, comp, +1, 0.1)
    err = float(np.mean(np.abs(out.data
                               - exact_riemann_burgers_periodic(1, 0, x, 0.1))))
    print(f"{m:5d}  {err:.3e}  " + ("" if prev is None else f"{err/prev:.3f}"))
    prev = err
