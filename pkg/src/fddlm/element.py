"""Reference elements on the unit square, quadrature rules, cell maps.

Families
--------
q1   : bilinear, 4 corner nodes
q2   : biquadratic, 9 nodes on the tensor lattice {0, 0.5, 1}^2
q1b  : q1 enriched with the interior bubble 16 x (1-x) y (1-y)
p0   : piecewise constant, one dof per cell

Corner ordering is counterclockwise: (0,0), (1,0), (1,1), (0,1). The q2
edge dofs follow the corresponding edges (bottom, right, top, left) and
the cell dof comes last.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "ElementFamily",
    "Q1",
    "Q2",
    "Q1B",
    "P0",
    "family",
    "basis_matrix",
    "grad_matrix",
    "eval_basis",
    "eval_grad",
    "QuadratureRule",
    "gauss_square",
    "gauss_triangle",
    "CellMap",
]


@dataclass(frozen=True)
class ElementFamily:
    """Tag and dof count of a reference element family."""

    tag: str
    ndofs: int

    def __repr__(self):
        return f"ElementFamily({self.tag!r})"


Q1 = ElementFamily("q1", 4)
Q2 = ElementFamily("q2", 9)
Q1B = ElementFamily("q1b", 5)
P0 = ElementFamily("p0", 1)

_FAMILIES = {f.tag: f for f in (Q1, Q2, Q1B, P0)}


def family(tag):
    """Look up an element family by tag."""
    if isinstance(tag, ElementFamily):
        return tag
    try:
        return _FAMILIES[tag]
    except KeyError:
        raise ValueError(
            f"unknown element family {tag!r}; valid tags: {sorted(_FAMILIES)}"
        ) from None


# q2 tensor indices (ix, iy) into the 1d lattice {0, 0.5, 1}, dof order:
# 4 corners, 4 edge midpoints (bottom, right, top, left), center.
_Q2_IDX = [(0, 0), (2, 0), (2, 2), (0, 2), (1, 0), (2, 1), (1, 2), (0, 1), (1, 1)]


def _lag3(t):
    """Quadratic Lagrange values on nodes {0, 0.5, 1}; shape (..., 3)."""
    t = np.asarray(t, dtype=float)
    return np.stack(
        [2.0 * t * t - 3.0 * t + 1.0, 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0)],
        axis=-1,
    )


def _lag3_d(t):
    """Derivatives of _lag3."""
    t = np.asarray(t, dtype=float)
    return np.stack([4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0], axis=-1)


def basis_matrix(fam, pts):
    """Evaluate all reference basis functions at points.

    Parameters
    ----------
    fam : ElementFamily or str
    pts : (k, 2) array_like of reference coordinates in [0, 1]^2

    Returns
    -------
    (k, ndofs) ndarray
    """
    fam = family(fam)
    p = np.atleast_2d(np.asarray(pts, dtype=float))
    x = p[:, 0]
    y = p[:, 1]
    if fam.tag == "p0":
        return np.ones((p.shape[0], 1))
    if fam.tag in ("q1", "q1b"):
        vals = np.stack(
            [(1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y], axis=1
        )
        if fam.tag == "q1b":
            bub = 16.0 * x * (1 - x) * y * (1 - y)
            vals = np.hstack([vals, bub[:, None]])
        return vals
    if fam.tag == "q2":
        lx = _lag3(x)
        ly = _lag3(y)
        vals = np.empty((p.shape[0], 9))
        for k, (ix, iy) in enumerate(_Q2_IDX):
            vals[:, k] = lx[:, ix] * ly[:, iy]
        return vals
    raise ValueError(f"unhandled family {fam.tag}")


def grad_matrix(fam, pts):
    """Reference gradients of all basis functions at points; (k, ndofs, 2)."""
    fam = family(fam)
    p = np.atleast_2d(np.asarray(pts, dtype=float))
    x = p[:, 0]
    y = p[:, 1]
    if fam.tag == "p0":
        return np.zeros((p.shape[0], 1, 2))
    if fam.tag in ("q1", "q1b"):
        g = np.empty((p.shape[0], fam.ndofs, 2))
        g[:, 0, 0] = -(1 - y)
        g[:, 0, 1] = -(1 - x)
        g[:, 1, 0] = 1 - y
        g[:, 1, 1] = -x
        g[:, 2, 0] = y
        g[:, 2, 1] = x
        g[:, 3, 0] = -y
        g[:, 3, 1] = 1 - x
        if fam.tag == "q1b":
            g[:, 4, 0] = 16.0 * (1 - 2 * x) * y * (1 - y)
            g[:, 4, 1] = 16.0 * x * (1 - x) * (1 - 2 * y)
        return g
    if fam.tag == "q2":
        lx = _lag3(x)
        ly = _lag3(y)
        dx = _lag3_d(x)
        dy = _lag3_d(y)
        g = np.empty((p.shape[0], 9, 2))
        for k, (ix, iy) in enumerate(_Q2_IDX):
            g[:, k, 0] = dx[:, ix] * ly[:, iy]
            g[:, k, 1] = lx[:, ix] * dy[:, iy]
        return g
    raise ValueError(f"unhandled family {fam.tag}")


def eval_basis(fam, i, p):
    """Value of basis function i at a single reference point."""
    return float(basis_matrix(fam, [p])[0, i])


def eval_grad(fam, i, p):
    """Reference gradient of basis function i at a single point."""
    g = grad_matrix(fam, [p])[0, i]
    return (float(g[0]), float(g[1]))


@dataclass(frozen=True)
class QuadratureRule:
    """Points (k, 2), positive weights (k,) and nominal exactness degree."""

    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def npoints(self):
        return self.points.shape[0]


def gauss_square(n):
    """Tensor Gauss-Legendre rule on [0, 1]^2.

    n points per direction (1 <= n <= 6), exact for polynomials of degree
    2n - 1 per variable. Weights sum to 1.
    """
    if not 1 <= int(n) <= 6:
        raise ValueError(f"gauss_square: n must be in 1..6, got {n}")
    n = int(n)
    x, w = leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    return QuadratureRule(pts, W.ravel(), 2 * n - 1)


# Symmetric rules on the reference triangle (0,0), (1,0), (0,1); weights
# sum to the measure 1/2 and are all positive. The classical 4-point
# degree-3 rule has a negative weight, so degree-3 requests get the
# 6-point degree-4 rule.
_TRI_D4_A1 = 0.445948490915965
_TRI_D4_W1 = 0.223381589678011
_TRI_D4_A2 = 0.091576213509771
_TRI_D4_W2 = 0.109951743655322
_TRI_D5_A1 = 0.470142064105115
_TRI_D5_W1 = 0.132394152788506
_TRI_D5_A2 = 0.101286507323456
_TRI_D5_W2 = 0.125939180544827


def _tri_orbit(a):
    """The three permutation points of barycentric (1-2a, a, a) in xy."""
    return [(a, a), (1.0 - 2.0 * a, a), (a, 1.0 - 2.0 * a)]


def gauss_triangle(degree):
    """Symmetric positive-weight rule on the unit reference triangle.

    Exact for total degree <= degree, 1 <= degree <= 5.
    """
    d = int(degree)
    if not 1 <= d <= 5:
        raise ValueError(f"gauss_triangle: degree must be in 1..5, got {degree}")
    if d == 1:
        pts = [(1.0 / 3.0, 1.0 / 3.0)]
        wts = [0.5]
    elif d == 2:
        pts = [(1.0 / 6.0, 1.0 / 6.0), (2.0 / 3.0, 1.0 / 6.0), (1.0 / 6.0, 2.0 / 3.0)]
        wts = [1.0 / 6.0] * 3
    elif d in (3, 4):
        pts = _tri_orbit(_TRI_D4_A1) + _tri_orbit(_TRI_D4_A2)
        wts = [0.5 * _TRI_D4_W1] * 3 + [0.5 * _TRI_D4_W2] * 3
        d = 4
    else:
        pts = [(1.0 / 3.0, 1.0 / 3.0)]
        pts += _tri_orbit(_TRI_D5_A1) + _tri_orbit(_TRI_D5_A2)
        wts = [0.5 * 0.225] + [0.5 * _TRI_D5_W1] * 3 + [0.5 * _TRI_D5_W2] * 3
    return QuadratureRule(np.asarray(pts, dtype=float), np.asarray(wts), d)


class CellMap:
    """Bilinear map from the unit square onto a straight-edged quad.

    Parameters
    ----------
    quad : (4, 2) array_like
        Physical corner coordinates in counterclockwise order.
    """

    def __init__(self, quad):
        self.quad = np.asarray(quad, dtype=float)
        if self.quad.shape != (4, 2):
            raise ValueError("CellMap expects four corner points")

    def forward(self, pts):
        """Map reference points (k, 2) to physical coordinates."""
        N = basis_matrix(Q1, pts)
        return N @ self.quad

    def jacobian(self, pts):
        """Jacobian dF/dxhat at reference points; (k, 2, 2)."""
        dN = grad_matrix(Q1, pts)
        # J[a, b] = sum_l quad[l, a] * dN[l, b]
        return np.einsum("la,klb->kab", self.quad, dN)

    def inverse(self, x, tol=1e-13, maxit=25):
        """Invert the map by Newton iteration.

        Parameters
        ----------
        x : (k, 2) array_like of physical points.

        Returns
        -------
        (k, 2) ndarray of reference coordinates. Points outside the cell
        produce reference coordinates outside [0, 1]^2; no clamping.
        """
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ref = np.full_like(x, 0.5)
        scale = max(np.abs(self.quad).max(), 1.0)
        for _ in range(maxit):
            r = x - self.forward(ref)
            if np.abs(r).max() < tol * scale:
                break
            J = self.jacobian(ref)
            det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
            ref[:, 0] += (J[:, 1, 1] * r[:, 0] - J[:, 0, 1] * r[:, 1]) / det
            ref[:, 1] += (-J[:, 1, 0] * r[:, 0] + J[:, 0, 0] * r[:, 1]) / det
        return ref
