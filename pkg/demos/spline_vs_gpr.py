"""
Splines versus a Gaussian process on a smooth 1D function
==========================================================

Fits f(mu) = 1 + sin(mu)/mu on [-pi, 3pi] with an SE-kernel GP, a natural
cubic spline and linear interpolation, on uniform grids and on a
scattered grid.
"""

from pevgp.baselines import BenchCase, spline_vs_gpr_experiment

for case, steps in ((BenchCase.UNIFORM_I, (1.0, 0.5)), (BenchCase.NONUNIFORM_II, ())):
    for row in spline_vs_gpr_experiment(case, steps):
        print(f"case {row.case:2s} grid {row.grid:4s} {row.method:12s} "
              f"MSE={row.mse:.2e} max={row.max_err:.2e} left out={row.excluded}")
