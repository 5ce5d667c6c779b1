"""Build each immersed geometry, refine it, and export VTK files.

The solver pairs a background box mesh with an independently built
immersed mesh. Four immersed shapes are supported: an axis-aligned
square patch, an L-shaped patch, a disk (five transfinite blocks with
boundary nodes projected onto the circle), and a five-lobed flower. This
script prints the quality numbers that the mesh generator guarantees
under refinement and writes every level as a legacy VTK file you can
open in ParaView.
"""

import os

import numpy as np

from fddlm.mesh import DomainSpec, build_mesh, refine_uniform
from fddlm.vtk_io import write_vtk

OUT = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(OUT, exist_ok=True)

SPECS = {
    "square_patch": DomainSpec(
        "square_patch", bounds=(np.e, 1 + np.pi, np.e, 1 + np.pi), base_cells=4
    ),
    "lshape": DomainSpec("lshape", bounds=(1, 3, 1, 3), base_cells=4),
    "disk": DomainSpec("disk", center=(0.0, 0.0), radius=1.0, base_cells=2),
    "flower": DomainSpec(
        "flower", center=(0.0, 0.0), radius=1.0, amplitude=0.1, lobes=5, base_cells=4
    ),
}

for name, spec in SPECS.items():
    m = build_mesh(spec, 0)
    print(f"{name}:")
    for lvl in range(4):
        if lvl > 0:
            m = refine_uniform(m)
        areas = m.cell_areas()
        print(
            f"  level {lvl}: {m.num_cells:5d} cells, h = {m.h:.4f}, "
            f"area = {areas.sum():.6f}, min/max cell area ratio = "
            f"{areas.min() / areas.max():.3f}"
        )
        write_vtk(os.path.join(OUT, f"mesh_{name}_level{lvl}.vtk"), m)
    print(f"  -> {OUT}/mesh_{name}_level*.vtk")

# the disk and flower areas converge to the exact values as the
# polygonal boundary resolves the curve
print(f"\nexact disk area   = {np.pi:.6f}")
print(f"exact flower area = {np.pi * (1 + 0.1**2 / 2):.6f}")
