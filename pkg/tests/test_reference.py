"""Reference Raviart-Thomas elements: dimensions, unisolvence, spans."""

import numpy as np
import pytest

from rtdarcy.errors import InvalidParameterError
from rtdarcy.quadrature import cell_rule
from rtdarcy.reference import reference_element, shifted_legendre

KINDS_ORDERS = [(kind, k) for kind in ("Triangle", "Quad") for k in (0, 1, 2)]


@pytest.mark.parametrize("kind,k", KINDS_ORDERS)
def test_dimensions(kind, k):
    ref = reference_element(kind, k)
    if kind == "Triangle":
        assert ref.velocity_dim == (k + 1) * (k + 3)
        assert ref.pressure_dim == (k + 1) * (k + 2) // 2
        assert ref.n_edges == 3
    else:
        assert ref.velocity_dim == 2 * (k + 1) * (k + 2)
        assert ref.pressure_dim == (k + 1) ** 2
        assert ref.n_edges == 4
    assert ref.n_facet_dofs == k + 1
    assert (ref.n_edges * ref.n_facet_dofs + ref.n_interior_dofs
            == ref.velocity_dim)


@pytest.mark.parametrize("kind,k", KINDS_ORDERS)
def test_unisolvence(kind, k):
    """DOF functionals applied to the basis give the identity matrix."""
    ref = reference_element(kind, k)
    ident = np.empty((ref.velocity_dim, ref.velocity_dim))
    for j in range(ref.velocity_dim):
        def basis_j(pts, j=j):
            vals, _ = ref.tabulate_velocity(pts)
            return vals[:, j, :]
        ident[:, j] = ref.dof_functionals(basis_j)
    assert np.abs(ident - np.eye(ref.velocity_dim)).max() < 1e-12


@pytest.mark.parametrize("kind", ["Triangle", "Quad"])
def test_rt0_contains_linear_field(kind):
    """v = (x, y) lies in RT_0, so its DOF vector reproduces it."""
    ref = reference_element(kind, 0)
    dofs = ref.dof_functionals(lambda pts: pts)
    pts = cell_rule(kind, 3).points
    vals, divs = ref.tabulate_velocity(pts)
    rec = np.einsum("qvd,v->qd", vals, dofs)
    assert np.abs(rec - pts).max() < 1e-13
    assert np.abs(np.einsum("qv,v->q", divs, dofs) - 2.0).max() < 1e-13


@pytest.mark.parametrize("kind,k", KINDS_ORDERS)
def test_divergence_lies_in_pressure_space(kind, k):
    """div RT_k is contained in the reference pressure space."""
    ref = reference_element(kind, k)
    rule = cell_rule(kind, 2 * k + 2)
    _, divs = ref.tabulate_velocity(rule.points)
    press, _ = ref.tabulate_pressure(rule.points)
    # L2-project each basis divergence on P_k/Q_k via a weighted QR (the
    # raw monomial mass matrix is too ill-conditioned for a direct solve)
    w = np.sqrt(rule.weights)[:, None]
    q_mat, _ = np.linalg.qr(press * w)
    proj = q_mat @ (q_mat.T @ (divs * w)) / w
    scale = max(np.abs(divs).max(), 1.0)
    assert np.abs(proj - divs).max() / scale < 1e-12


@pytest.mark.parametrize("kind,k", KINDS_ORDERS)
def test_pressure_basis_spans_monomials(kind, k):
    ref = reference_element(kind, k)
    pts = cell_rule(kind, 2).points
    vals, grads = ref.tabulate_pressure(pts)
    assert vals.shape == (len(pts), ref.pressure_dim)
    # constant is the first basis function with zero gradient
    assert np.allclose(vals[:, 0], 1.0)
    assert np.allclose(grads[:, 0, :], 0.0)


def test_shifted_legendre_orthogonality():
    t = np.polynomial.legendre.leggauss(12)[0] * 0.5 + 0.5
    w = np.polynomial.legendre.leggauss(12)[1] * 0.5
    for i in range(4):
        for j in range(4):
            val = np.sum(w * shifted_legendre(i, t) * shifted_legendre(j, t))
            expect = 1.0 / (2 * i + 1) if i == j else 0.0
            assert val == pytest.approx(expect, abs=1e-14)


def test_invalid_order_rejected():
    with pytest.raises(InvalidParameterError):
        reference_element("Triangle", 3)
    with pytest.raises(InvalidParameterError):
        reference_element("Hex", 1)
