"""Refinement studies: measured convergence rates.

Two studies run here. The disk benchmark has an exact solution, so its
errors are true errors; the L-shaped patch has none, so each level is
measured against the solution two levels finer (self convergence). The
rate is the least-squares slope of log(error) against log(h), which is
robust to the level-to-level oscillations that re-entrant corners
produce. Expect close to first order in L2 for the piecewise-linear
background field and about half order in H1; these are the sharp rates
for an interface cutting through background cells.
"""

from fddlm.runner import ERROR_COLUMNS, run_study


def show(res):
    print(f"example {res.example}, case {res.case}, {res.element}, "
          f"immersed base {res.immersed_base}")
    header = "  level       h        h2   " + "".join(f"{c:>11s}" for c in ERROR_COLUMNS)
    print(header)
    for i, lvl in enumerate(res.levels):
        row = f"  {lvl:5d}  {res.h[i]:.4f}  {res.h2[i]:.4f}   "
        row += "".join(f"{res.errors[c][i]:11.3e}" for c in ERROR_COLUMNS)
        print(row)
    print("  rate                     " + "".join(f"{res.rates[c]:11.3f}" for c in ERROR_COLUMNS))
    print()


# exact-solution study on the disk (errors against the closed form)
show(run_study(3, 1, "elm1", levels=3, base_cells=16))

# self-convergence study on the L-shaped patch (no exact solution)
show(run_study(2, 1, "elm1", levels=3, base_cells=8))
