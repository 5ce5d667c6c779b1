"""Mesh construction, uniform refinement and point location."""

import numpy as np
import pytest

from fddlm.mesh import CellLocator, DomainSpec, build_mesh, refine_uniform

RECT6 = DomainSpec("rectangle", bounds=(0.0, 6.0, 0.0, 6.0), base_cells=6)


def all_cells_ccw_convex(m):
    p = m.nodes[m.cells]
    d = np.roll(p, -1, axis=1) - p
    dn = np.roll(d, -1, axis=1)
    cross = d[..., 0] * dn[..., 1] - d[..., 1] * dn[..., 0]
    return bool(np.all(cross > 0))


def mesh_chain(spec, levels):
    seq = [build_mesh(spec, 0)]
    for _ in range(levels - 1):
        seq.append(refine_uniform(seq[-1]))
    return seq


def test_rectangle_counts_and_h():
    m = build_mesh(RECT6)
    assert (m.num_cells, m.num_nodes, m.num_edges) == (36, 49, 84)
    assert m.h == pytest.approx(np.sqrt(2.0), rel=1e-14)
    assert m.cell_areas() == pytest.approx(np.ones(36), abs=1e-13)
    assert m.boundary_nodes.size == 24
    assert int(m.boundary_edge_mask.sum()) == 24
    assert np.all(np.isfinite(m.nodes))


def test_rectangle_aspect_keeps_cells_square():
    m = build_mesh(DomainSpec("rectangle", bounds=(0, 6, 0, 3), base_cells=6))
    assert m.num_cells == 18
    assert m.cell_areas() == pytest.approx(np.ones(18), abs=1e-13)


def test_lshape_area_and_counts():
    m = build_mesh(DomainSpec("lshape", bounds=(1, 3, 1, 3), base_cells=4))
    assert m.num_cells == 12
    assert m.cell_areas().sum() == pytest.approx(3.0, abs=1e-13)
    # notch corner (2, 2) stays, removed quadrant nodes are gone
    d = np.linalg.norm(m.nodes - [2.0, 2.0], axis=1)
    assert d.min() < 1e-14
    assert not np.any((m.nodes[:, 0] > 2 + 1e-9) & (m.nodes[:, 1] > 2 + 1e-9))
    with pytest.raises(ValueError, match="even"):
        build_mesh(DomainSpec("lshape", bounds=(1, 3, 1, 3), base_cells=3))


def test_disk_mesh_geometry():
    spec = DomainSpec("disk", center=(0.5, -0.25), radius=2.0, base_cells=4)
    seq = mesh_chain(spec, 4)
    m0 = seq[0]
    assert m0.num_cells == 5 * 16
    # every boundary node sits on the circle, also after refinement
    for m in (m0, seq[2]):
        r = np.linalg.norm(m.nodes[m.boundary_nodes] - [0.5, -0.25], axis=1)
        assert np.abs(r - 2.0).max() < 1e-12
    errs = [abs(m.cell_areas().sum() - np.pi * 4.0) for m in seq]
    for a, b in zip(errs, errs[1:]):
        assert b < a
        assert 3.0 < a / b < 5.0  # straight edges: quadratic area defect


def test_flower_mesh_geometry():
    spec = DomainSpec("flower", radius=1.0, amplitude=0.1, lobes=5, base_cells=8)
    seq = mesh_chain(spec, 4)
    # area of r(t) = 1 + a cos(5 t): pi (1 + a^2 / 2)
    target = np.pi * (1.0 + 0.005)
    errs = [abs(m.cell_areas().sum() - target) for m in seq]
    assert errs[-1] < errs[0] / 20
    m = seq[2]
    bn = m.nodes[m.boundary_nodes]
    th = np.arctan2(bn[:, 1], bn[:, 0])
    rho = np.linalg.norm(bn, axis=1)
    assert np.abs(rho - (1.0 + 0.1 * np.cos(5 * th))).max() < 1e-12


def test_refine_uniform_nesting():
    m0 = build_mesh(RECT6)
    m1 = refine_uniform(m0)
    assert m1.num_cells == 4 * m0.num_cells
    assert m1.level == m0.level + 1
    # original nodes keep their indices
    assert np.array_equal(m1.nodes[: m0.num_nodes], m0.nodes)
    # children 4c..4c+3 tile their parent (straight cells partition exactly)
    child_sum = m1.cell_areas().reshape(-1, 4).sum(axis=1)
    assert child_sum == pytest.approx(m0.cell_areas(), rel=1e-13)
    # child 4c contains the parent's first vertex
    assert np.array_equal(m1.cells[0::4, 0], m0.cells[:, 0])


def test_build_mesh_level_equals_refine_chain():
    spec = DomainSpec("disk", base_cells=2)
    direct = build_mesh(spec, 2)
    chained = refine_uniform(refine_uniform(build_mesh(spec, 0)))
    assert np.array_equal(direct.cells, chained.cells)
    assert direct.nodes == pytest.approx(chained.nodes, abs=1e-15)


@pytest.mark.parametrize(
    "spec",
    [
        RECT6,
        DomainSpec("lshape", bounds=(1, 3, 1, 3), base_cells=4),
        DomainSpec("disk", base_cells=7),
        DomainSpec("flower", base_cells=12),
    ],
    ids=["rectangle", "lshape", "disk", "flower"],
)
def test_refinement_invariants(spec):
    seq = mesh_chain(spec, 5)
    hs = [m.h for m in seq]
    ratios = [m.cell_areas().min() / m.cell_areas().max() for m in seq]
    for m in seq:
        assert np.all(np.isfinite(m.nodes))
        assert all_cells_ccw_convex(m)
    for k in range(4):
        assert 0.45 <= hs[k + 1] / hs[k] <= 0.55
        # shape regularity cannot collapse under refinement
        assert ratios[k + 1] >= 0.8 * ratios[k]


def test_locator_on_curved_mesh():
    m = build_mesh(DomainSpec("disk", base_cells=4), 1)
    loc = CellLocator(m)
    rng = np.random.default_rng(8)
    r = 0.95 * np.sqrt(rng.uniform(0, 1, 200))
    th = rng.uniform(0, 2 * np.pi, 200)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    cells, refs = loc.locate(pts)
    assert np.all((refs >= 0) & (refs <= 1))
    from fddlm.element import CellMap

    for k in range(0, 200, 17):
        cm = CellMap(m.cell_polygon(cells[k]))
        assert cm.forward(refs[k : k + 1])[0] == pytest.approx(pts[k], abs=1e-9)
    with pytest.raises(ValueError, match="not inside"):
        loc.locate([[2.0, 0.0]])


def test_locator_candidates_cover_query():
    m = build_mesh(RECT6)
    loc = CellLocator(m)
    cand = loc.candidates(2.2, 3.1, 2.4, 3.3)
    # query box sits inside cell (ix=2, iy=3) of the 6x6 grid
    assert 3 * 6 + 2 in cand
    assert cand == sorted(cand)


def test_domain_spec_validation():
    with pytest.raises(ValueError, match="unknown domain kind"):
        build_mesh(DomainSpec("hexagon"))
    with pytest.raises(ValueError, match="level"):
        build_mesh(RECT6, -1)
    with pytest.raises(ValueError, match="bounds"):
        build_mesh(DomainSpec("rectangle"))
    with pytest.raises(ValueError, match="bounds"):
        build_mesh(DomainSpec("rectangle", bounds=(1, 0, 0, 1)))
    with pytest.raises(ValueError, match="base_cells"):
        build_mesh(DomainSpec("rectangle", bounds=(0, 1, 0, 1), base_cells=0))
    with pytest.raises(ValueError, match="radius"):
        build_mesh(DomainSpec("disk", radius=-1.0))
    with pytest.raises(ValueError, match="amplitude"):
        build_mesh(DomainSpec("flower", amplitude=1.5))
