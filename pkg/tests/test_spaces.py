"""DOF maps, H(div) conformity, Piola mapping, tabulation consistency."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtdarcy.errors import InvalidParameterError
from rtdarcy.mesh import (
    build_quarter_annulus_quad,
    build_unit_square_quad,
    build_unit_square_tri,
)
from rtdarcy.spaces import CellTabulation, FeFunction, build_dofmap, facet_trace

BUILDERS = {
    "tri": build_unit_square_tri,
    "quad": build_unit_square_quad,
    "annulus": build_quarter_annulus_quad,
}


def test_dof_counts_lowest_order():
    dm = build_dofmap(build_unit_square_quad(1), 0)
    assert (dm.n_velocity, dm.n_pressure) == (4, 1)
    dm = build_dofmap(build_unit_square_tri(1), 0)
    assert (dm.n_velocity, dm.n_pressure) == (5, 2)
    dm = build_dofmap(build_unit_square_quad(2), 1)
    assert (dm.n_velocity, dm.n_pressure) == (40, 16)


@pytest.mark.parametrize("family", ["tri", "quad", "annulus"])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_hdiv_conformity(family, k):
    """Normal traces agree across every interior facet for arbitrary
    coefficient vectors (exact conformity, even on curved cells)."""
    mesh = BUILDERS[family](3)
    dm = build_dofmap(mesh, k)
    rng = np.random.default_rng(k)
    fn = FeFunction("velocity", mesh, dm, rng.standard_normal(dm.n_velocity))
    t = np.linspace(0.05, 0.95, 6)
    fids = mesh.interior_facets
    owner = facet_trace(mesh, dm, fn, fids, t)
    neighbor = facet_trace(mesh, dm, fn, fids, t, side="neighbor")
    assert np.abs(owner - neighbor).max() < 1e-11


@given(st.integers(0, 2), st.integers(1, 4))
@settings(max_examples=10, deadline=None)
def test_dof_count_formula(k, n):
    mesh = build_unit_square_tri(n)
    dm = build_dofmap(mesh, k)
    n_int = {0: 0, 1: 2, 2: 6}[k]
    assert dm.n_velocity == (k + 1) * len(mesh.facets) + n_int * len(mesh.cells)
    assert dm.n_pressure == (k + 1) * (k + 2) // 2 * len(mesh.cells)


def test_neighbor_sign_pattern():
    mesh = build_unit_square_quad(2)
    dm = build_dofmap(mesh, 2)
    for cid, fids in enumerate(mesh.cell_facets):
        for e, fid in enumerate(fids):
            sl = slice(e * 3, (e + 1) * 3)
            if mesh.facets[fid].owner == cid:
                assert np.all(dm.cell_sign[cid, sl] == 1.0)
            else:
                assert list(dm.cell_sign[cid, sl]) == [-1.0, 1.0, -1.0]


@pytest.mark.parametrize("family", ["tri", "quad"])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_divergence_in_pressure_space_affine(family, k):
    """On affine cells div V_h is contained in Q_h pointwise."""
    mesh = BUILDERS[family](2)
    dm = build_dofmap(mesh, k)
    rng = np.random.default_rng(7)
    fn = FeFunction("velocity", mesh, dm, rng.standard_normal(dm.n_velocity))
    tab = CellTabulation(mesh, dm, 2 * k + 2)
    _, div = tab.velocity_values(fn)
    w = np.sqrt(tab.wdet)
    scale = max(np.abs(div).max(), 1.0)
    for c in range(len(mesh.cells)):
        basis = tab.press * w[c][:, None]
        q_mat, _ = np.linalg.qr(basis)
        proj = q_mat @ (q_mat.T @ (div[c] * w[c]))
        assert np.abs(proj - div[c] * w[c]).max() / scale < 1e-12


def test_piola_identity_on_reference_square():
    """On the 1x1 quad mesh the physical basis equals the reference one."""
    from rtdarcy.reference import reference_element

    mesh = build_unit_square_quad(1)
    dm = build_dofmap(mesh, 1)
    tab = CellTabulation(mesh, dm, 4)
    ref_v, ref_d = reference_element("Quad", 1).tabulate_velocity(tab.rule.points)
    assert np.abs(tab.vel[0] - ref_v).max() < 1e-13
    assert np.abs(tab.div[0] - ref_d).max() < 1e-13


def test_velocity_values_linear_in_coeffs():
    mesh = build_unit_square_tri(2)
    dm = build_dofmap(mesh, 1)
    tab = CellTabulation(mesh, dm, 3)
    rng = np.random.default_rng(0)
    a = rng.standard_normal(dm.n_velocity)
    b = rng.standard_normal(dm.n_velocity)
    va, _ = tab.velocity_values(FeFunction("velocity", mesh, dm, a))
    vb, _ = tab.velocity_values(FeFunction("velocity", mesh, dm, b))
    vab, _ = tab.velocity_values(FeFunction("velocity", mesh, dm, a + 2 * b))
    assert np.allclose(vab, va + 2 * vb)


def test_fefunction_length_checked():
    mesh = build_unit_square_tri(2)
    dm = build_dofmap(mesh, 0)
    with pytest.raises(InvalidParameterError):
        FeFunction("velocity", mesh, dm, np.zeros(dm.n_velocity + 1))


def test_boundary_neighbor_trace_rejected():
    mesh = build_unit_square_tri(2)
    dm = build_dofmap(mesh, 0)
    fn = FeFunction("velocity", mesh, dm, np.zeros(dm.n_velocity))
    with pytest.raises(InvalidParameterError):
        facet_trace(mesh, dm, fn, mesh.boundary_facets, [0.5], side="neighbor")
