"""Coupling between the background and immersed spaces.

The multiplier pairing restricted to the background space needs integrals
of background basis functions over immersed cells. Each immersed cell is
clipped against the background cells it overlaps (exact convex polygon
intersection), the pieces are fan-triangulated, and a symmetric triangle
rule of degree >= 4 is mapped to every triangle. No quadrature on cut
cells is approximated by sampling; the clipped geometry is exact up to
floating point rounding.
"""

import numpy as np
import scipy.sparse as sp

from . import element as el
from .geometry import clip_convex, fan_triangulate, signed_area, triangle_areas
from .mesh import CellLocator

__all__ = [
    "Fragment",
    "CouplingTable",
    "CoverageError",
    "build_intersections",
    "assemble_C1",
    "assemble_C2",
]


class CoverageError(RuntimeError):
    """Raised when an immersed cell is not fully covered by the background mesh."""


class Fragment:
    """One clipped piece: immersed cell x background cell.

    Attributes
    ----------
    bg_cell : int
    polygon : (k, 2) ndarray, counterclockwise
    points, weights : physical quadrature on the piece; weights sum to
        the piece area.
    """

    __slots__ = ("bg_cell", "polygon", "points", "weights")

    def __init__(self, bg_cell, polygon, points, weights):
        self.bg_cell = bg_cell
        self.polygon = polygon
        self.points = points
        self.weights = weights

    @property
    def area(self):
        return float(np.sum(self.weights))


class CouplingTable:
    """Intersection fragments per immersed cell.

    fragments[i] lists the Fragment objects of immersed cell i, ordered
    by background cell index (deterministic).
    """

    def __init__(self, t2, t, fragments, tri_degree):
        self.t2 = t2
        self.t = t
        self.fragments = fragments
        self.tri_degree = tri_degree

    @property
    def num_fragments(self):
        return sum(len(f) for f in self.fragments)

    def __repr__(self):
        return (
            f"CouplingTable(cells={len(self.fragments)}, "
            f"fragments={self.num_fragments}, tri_degree={self.tri_degree})"
        )


def _triangle_quadrature(polygon, rule):
    """Map a reference triangle rule onto the fan triangles of a polygon."""
    tris = fan_triangulate(polygon)
    areas = triangle_areas(tris)
    npts = rule.npoints
    pts = np.empty((tris.shape[0] * npts, 2))
    wts = np.empty(tris.shape[0] * npts)
    xh = rule.points[:, 0]
    yh = rule.points[:, 1]
    for k in range(tris.shape[0]):
        a, b, c = tris[k]
        pts[k * npts : (k + 1) * npts, 0] = a[0] + xh * (b[0] - a[0]) + yh * (c[0] - a[0])
        pts[k * npts : (k + 1) * npts, 1] = a[1] + xh * (b[1] - a[1]) + yh * (c[1] - a[1])
        # reference measure is 1/2, so the affine scale factor is 2*area
        wts[k * npts : (k + 1) * npts] = rule.weights * (2.0 * areas[k])
    return pts, wts


def build_intersections(t2, t, tri_degree=4, coverage_rtol=1e-10):
    """Clip every immersed cell against the background mesh.

    Parameters
    ----------
    t2, t : QuadMesh
        Immersed and background meshes. Every immersed cell must be
        covered by the background mesh.
    tri_degree : int
        Exactness degree of the per-triangle rule (>= 4 keeps products of
        a biquadratic background basis with the constant multiplier exact
        on straight background cells).

    Returns
    -------
    CouplingTable

    Raises
    ------
    CoverageError
        When the fragment areas of a cell do not sum to the cell area
        within ``coverage_rtol`` (relative), naming the offending cell.
    """
    rule = el.gauss_triangle(tri_degree)
    locator = CellLocator(t)
    fragments = []
    for i in range(t2.num_cells):
        poly = t2.cell_polygon(i)
        target = abs(signed_area(poly))
        xmin, ymin = poly.min(axis=0)
        xmax, ymax = poly.max(axis=0)
        pieces = []
        covered = 0.0
        for c in locator.candidates(xmin, ymin, xmax, ymax):
            piece = clip_convex(poly, t.cell_polygon(c))
            if piece is None:
                continue
            pts, wts = _triangle_quadrature(piece, rule)
            pieces.append(Fragment(c, piece, pts, wts))
            covered += float(np.sum(wts))
        if abs(covered - target) > coverage_rtol * target:
            raise CoverageError(
                f"immersed cell {i} not covered by the background mesh: "
                f"fragment area {covered:.15e} vs cell area {target:.15e}"
            )
        fragments.append(pieces)
    return CouplingTable(t2, t, fragments, tri_degree)


def assemble_C1(table, lambda_space, vh_space):
    """Multiplier pairing with the background space.

    Entry (i, j) = integral over (immersed cell i) of the background
    basis function j, accumulated fragment by fragment. The multiplier is
    piecewise constant with basis value 1 on its cell.

    Returns an (m, n) CSR matrix, m = dim(Lambda_h), n = dim(V_h).
    """
    if lambda_space.family.tag != "p0":
        raise ValueError("lambda_space must be p0")
    if lambda_space.mesh is not table.t2 or vh_space.mesh is not table.t:
        raise ValueError("coupling table does not match the given spaces")
    fam = vh_space.family
    rows = []
    cols = []
    vals = []
    for i, pieces in enumerate(table.fragments):
        for frag in pieces:
            cm = el.CellMap(table.t.cell_polygon(frag.bg_cell))
            refs = cm.inverse(frag.points)
            phi = el.basis_matrix(fam, refs)
            contrib = frag.weights @ phi
            rows.extend([i] * fam.ndofs)
            cols.extend(vh_space.dof_map[frag.bg_cell])
            vals.extend(contrib)
    mat = sp.coo_matrix(
        (vals, (rows, cols)), shape=(lambda_space.ndofs, vh_space.ndofs)
    )
    return mat.tocsr()


def assemble_C2(lambda_space, v2_space, quad=None):
    """Multiplier pairing with the immersed space (same mesh, no clipping).

    Entry (i, j) = integral over cell i of immersed basis function j.
    Returns an (m, n2) CSR matrix.
    """
    if lambda_space.family.tag != "p0":
        raise ValueError("lambda_space must be p0")
    if lambda_space.mesh is not v2_space.mesh:
        raise ValueError("lambda and immersed spaces must share a mesh")
    if quad is None:
        quad = el.gauss_square(3)
    mesh = v2_space.mesh
    fam = v2_space.family
    phi = el.basis_matrix(fam, quad.points)
    dN = el.grad_matrix(el.Q1, quad.points)
    X = mesh.nodes[mesh.cells]
    J = np.einsum("mla,qlb->mqab", X, dN)
    det = J[:, :, 0, 0] * J[:, :, 1, 1] - J[:, :, 0, 1] * J[:, :, 1, 0]
    vals = np.einsum("q,mq,qj->mj", quad.weights, det, phi)
    rows = np.repeat(np.arange(mesh.num_cells), fam.ndofs)
    mat = sp.coo_matrix(
        (vals.ravel(), (rows, v2_space.dof_map.ravel())),
        shape=(lambda_space.ndofs, v2_space.ndofs),
    )
    return mat.tocsr()
