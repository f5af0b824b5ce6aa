"""Recycle an augmentation subspace between restart cycles and families.

The recycled solver obliquely projects each shifted residual against the
retained subspace at the start of every cycle, searches the augmented
space span(U) + block Krylov space, and refreshes U with Ritz vectors at
cycle end.  A space learned on one family then accelerates the next
(related) family.
"""

import numpy as np

from shiftkrylov import (ShiftedFamily, SolverConfig,
                         generate_convection_diffusion, rsbgmres, sbgmres)

a = generate_convection_diffusion(grid_m=14, convection=0.0)
n = a.n_rows
lam_min = float(np.linalg.eigvalsh(a.to_dense()).min())
base = -0.9 * lam_min
shifts = np.array([base + d * lam_min for d in (1e-4, 2e-4, 1e-2, 2e-2)])
cfg = SolverConfig(cycle_length=15, tolerance=1e-8, max_cycles=300, seed=5)

rng = np.random.default_rng(33)
b1 = rng.standard_normal((n, 4))
fam1 = ShiftedFamily(a, shifts, b1, None)

_, rep_plain = sbgmres(fam1, cfg)
print(f"block, no recycling:     {rep_plain.matvecs} matvecs")

x, rep_rec, space = rsbgmres(fam1, cfg, k=8, mode="ritz-largest")
print(f"block, Ritz recycling:   {rep_rec.matvecs} matvecs "
      f"(returned a {space.k}-dimensional space, {space.provenance})")

# a second family with new right-hand sides reuses the learned space
b2 = rng.standard_normal((n, 4))
fam2 = ShiftedFamily(a, shifts, b2, None)
_, rep_cold = sbgmres(fam2, cfg)
_, rep_warm, _ = rsbgmres(fam2, cfg, space)
print(f"\nsecond family cold:      {rep_cold.matvecs} matvecs")
print(f"second family recycled:  {rep_warm.matvecs} matvecs")
