"""Canonical interpolant: reproduction, commuting diagram, orthogonality,
projection, and the inf-sup witness identity."""

import numpy as np
import pytest

from rtdarcy.assembly import assemble_divergence, norm_pressure_1h
from rtdarcy.interpolation import (
    boundary_flux_defect,
    commuting_defect,
    infsup_witness,
    interpolate_rt,
    project_pressure,
)
from rtdarcy.mesh import (
    build_quarter_annulus_quad,
    build_unit_square_quad,
    build_unit_square_tri,
)
from rtdarcy.spaces import CellTabulation, FeFunction, build_dofmap

BUILDERS = {
    "tri": build_unit_square_tri,
    "quad": build_unit_square_quad,
    "annulus": build_quarter_annulus_quad,
}


def smooth_u(x):
    return np.stack([np.sin(x[..., 0]) * np.cos(x[..., 1]),
                     x[..., 0] ** 2 * x[..., 1]], axis=-1)


def smooth_div(x):
    return np.cos(x[..., 0]) * np.cos(x[..., 1]) + x[..., 0] ** 2


@pytest.mark.parametrize("family", ["tri", "quad"])
def test_interpolation_reproduces_rt0_member(family):
    """v = (x, y) lies in RT_0 on affine meshes, so I_h v = v exactly."""
    mesh = BUILDERS[family](3)
    dm = build_dofmap(mesh, 0)
    u_h = interpolate_rt(mesh, dm, lambda x: x)
    tab = CellTabulation(mesh, dm, 4)
    vals, divs = tab.velocity_values(u_h)
    assert np.abs(vals - tab.x).max() < 1e-12
    assert np.abs(divs - 2.0).max() < 1e-12


@pytest.mark.parametrize("family", ["tri", "quad"])
def test_constant_field_reproduced_all_orders(family):
    mesh = BUILDERS[family](2)
    const = lambda x: np.broadcast_to(np.array([1.0, 0.0]), x.shape).copy()
    for k in (0, 1, 2):
        dm = build_dofmap(mesh, k)
        u_h = interpolate_rt(mesh, dm, const)
        tab = CellTabulation(mesh, dm, 3)
        vals, _ = tab.velocity_values(u_h)
        assert np.abs(vals - [1.0, 0.0]).max() < 1e-12


def test_interpolation_error_positive_for_smooth_field():
    mesh = build_unit_square_tri(4)
    dm = build_dofmap(mesh, 0)
    u_h = interpolate_rt(mesh, dm, smooth_u)
    tab = CellTabulation(mesh, dm, 6)
    vals, _ = tab.velocity_values(u_h)
    err = np.sqrt(np.einsum("cqd,cqd,cq->", vals - smooth_u(tab.x),
                            vals - smooth_u(tab.x), tab.wdet))
    assert err > 1e-4


@pytest.mark.parametrize("family", ["tri", "quad", "annulus"])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_commuting_diagram(family, k):
    mesh = BUILDERS[family](3)
    dm = build_dofmap(mesh, k)
    assert commuting_defect(mesh, dm, smooth_u, smooth_div) < 1e-10


@pytest.mark.parametrize("family", ["tri", "quad"])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_boundary_orthogonality(family, k):
    mesh = BUILDERS[family](3)
    dm = build_dofmap(mesh, k)
    defect = boundary_flux_defect(mesh, dm, smooth_u, mesh.boundary_facets)
    assert defect < 1e-10


@pytest.mark.parametrize("family", ["tri", "quad"])
@pytest.mark.parametrize("k", [0, 1, 2])
def test_pressure_projection_reproduces_space_members(family, k):
    """Global polynomials of degree <= k lie in Q_h and are reproduced."""
    mesh = BUILDERS[family](2)
    dm = build_dofmap(mesh, k)
    if k == 0:
        target = lambda x: np.full(x.shape[:-1], 1.5)
    else:
        target = lambda x: 2.0 + 3.0 * x[..., 0] - x[..., 1]
    proj = project_pressure(mesh, dm, target)
    tab = CellTabulation(mesh, dm, 2 * k + 2)
    vals = tab.pressure_values(proj)
    assert np.abs(vals - target(tab.x)).max() < 1e-12


def test_pressure_projection_is_best_approximation():
    """The projection error is orthogonal to Q_h cellwise."""
    mesh = build_unit_square_tri(3)
    dm = build_dofmap(mesh, 1)
    f = lambda x: np.sin(3 * x[..., 0]) * x[..., 1] ** 3
    proj = project_pressure(mesh, dm, f)
    tab = CellTabulation(mesh, dm, 10)
    resid = tab.pressure_values(proj) - f(tab.x)
    moments = np.einsum("qp,cq->cp", tab.press, resid * tab.wdet)
    assert np.abs(moments).max() < 1e-14


@pytest.mark.parametrize("family", ["tri", "quad"])
@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("include_neumann", [False, True])
def test_infsup_witness_identity(family, k, include_neumann):
    """b_m(v_q, q) equals the squared mesh-dependent pressure norm."""
    from rtdarcy.cases import get_case

    case = get_case("square-tri" if family == "tri" else "square-quad")
    mesh = case.build_mesh(3)
    dm = build_dofmap(mesh, k)
    rng = np.random.default_rng(11)
    q = FeFunction("pressure", mesh, dm, rng.standard_normal(dm.n_pressure))
    m = 0 if include_neumann else 1
    b_mat = assemble_divergence(mesh, dm, m)
    w = infsup_witness(mesh, dm, q, include_neumann=include_neumann)
    val = float(q.coeffs @ (b_mat @ w.coeffs))
    nrm = norm_pressure_1h(mesh, dm, q, include_neumann=include_neumann) ** 2
    assert abs(val - nrm) / nrm < 1e-9
