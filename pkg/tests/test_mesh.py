"""Mesh builders: counts, orientation, facet topology, labelling, dumps."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtdarcy.errors import ConfigurationError
from rtdarcy.geometry import CellGeometry
from rtdarcy.mesh import (
    DIRICHLET,
    INTERIOR,
    NEUMANN,
    build_quarter_annulus_quad,
    build_unit_circle_tri,
    build_unit_square_quad,
    build_unit_square_tri,
    classify_facets,
    write_mesh,
)
from rtdarcy.quadrature import cell_rule


@given(st.integers(1, 12))
@settings(max_examples=8, deadline=None)
def test_square_tri_counts(n):
    mesh = build_unit_square_tri(n)
    assert len(mesh.cells) == 2 * n * n
    assert len(mesh.points) == (n + 1) ** 2
    assert len(mesh.facets) == 3 * n * n + 2 * n
    assert len(mesh.boundary_facets) == 4 * n
    # Euler formula on a disk-like domain: V - E + F = 1
    assert len(mesh.points) - len(mesh.facets) + len(mesh.cells) == 1


@given(st.integers(1, 12))
@settings(max_examples=8, deadline=None)
def test_square_quad_counts(n):
    mesh = build_unit_square_quad(n)
    assert len(mesh.cells) == n * n
    assert len(mesh.points) == (n + 1) ** 2
    assert len(mesh.facets) == 2 * n * (n + 1)
    assert len(mesh.points) - len(mesh.facets) + len(mesh.cells) == 1


@pytest.mark.parametrize("build,arg", [
    (build_unit_square_tri, 3),
    (build_unit_square_quad, 3),
    (build_unit_circle_tri, 2),
    (build_quarter_annulus_quad, 3),
])
def test_cells_positively_oriented(build, arg):
    mesh = build(arg)
    kind = mesh.cells[0].kind
    rule = cell_rule(kind, 2)
    geom = CellGeometry(mesh)
    _, det = geom.jacobians(rule.points)  # raises DegenerateCellError if <= 0
    assert np.all(det > 0)


def test_facet_owner_convention():
    mesh = build_unit_square_tri(4)
    for f in mesh.facets:
        if f.neighbor is not None:
            assert f.owner < f.neighbor
            assert f.label == INTERIOR
        # stored direction follows the owner's counterclockwise edge
        cell = mesh.cells[f.owner]
        edges = [(cell.vertex_ids[i], cell.vertex_ids[(i + 1) % 3])
                 for i in range(3)]
        assert tuple(f.vertex_ids) == edges[f.owner_edge]


def test_cell_facets_consistent():
    mesh = build_unit_square_quad(3)
    for cid, fids in enumerate(mesh.cell_facets):
        assert len(fids) == 4
        for fid in fids:
            f = mesh.facets[fid]
            assert cid in (f.owner, f.neighbor)


def test_h_scaling():
    h = [build_unit_square_tri(n).h_max for n in (4, 8, 16)]
    assert h[0] / h[1] == pytest.approx(2.0)
    assert h[1] / h[2] == pytest.approx(2.0)


def test_circle_mesh():
    for level in (1, 2, 3):
        mesh = build_unit_circle_tri(level)
        assert len(mesh.points) - len(mesh.facets) + len(mesh.cells) == 1
        bnd = mesh.boundary_facets
        for fid in bnd:
            for vid in mesh.facets[fid].vertex_ids:
                assert np.linalg.norm(mesh.points[vid]) == pytest.approx(1.0)
    h2 = build_unit_circle_tri(2).h_max
    h3 = build_unit_circle_tri(3).h_max
    assert h2 / h3 == pytest.approx(2.0, rel=0.2)


def test_annulus_isoparametric():
    mesh = build_quarter_annulus_quad(4, geom_degree=2)
    assert mesh.geom_degree == 2
    r = np.linalg.norm(mesh.points, axis=1)
    assert r.min() == pytest.approx(1.0)
    assert r.max() == pytest.approx(2.0)
    assert np.all(mesh.points >= -1e-12)


def test_classify_and_labels():
    mesh = build_unit_square_quad(2)
    classify_facets(mesh, lambda x, y: "dirichlet" if y < 1e-12 else "neumann")
    dir_f = mesh.facets_with_label(DIRICHLET)
    assert len(dir_f) == 2
    assert len(mesh.facets_with_label(NEUMANN)) == 6
    assert not mesh.pure_neumann
    classify_facets(mesh, lambda x, y: "neumann")
    assert mesh.pure_neumann


def test_classify_rejects_unknown_label():
    mesh = build_unit_square_quad(2)
    with pytest.raises(ConfigurationError):
        classify_facets(mesh, lambda x, y: "robin")


def test_write_mesh(tmp_path):
    mesh = build_unit_square_tri(2)
    classify_facets(mesh, lambda x, y: "neumann")
    path = tmp_path / "mesh.txt"
    write_mesh(mesh, path)
    text = path.read_text().splitlines()
    assert text[0] == "POINTS"
    assert "CELLS" in text and "FACETS" in text
    ncells = text.index("FACETS") - text.index("CELLS") - 1
    assert ncells == len(mesh.cells)
    npoints = text.index("CELLS") - 1
    assert npoints == len(mesh.points)
