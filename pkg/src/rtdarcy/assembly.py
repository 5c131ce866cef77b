"""Assembly of the mixed systems and the mesh-dependent norms.

Both formulations share the block layout

    [ A + w * N    C^T ] [u]   [rhs_v]
    [     B         0  ] [p] = [rhs_q]

with A the velocity mass matrix, N the flux-penalty facet matrix on the
flux boundary, C = B_{m1} and B = B_{m2} where

    B_m(v, q) = (q, div v) - m <q, v . n>_{flux boundary}.

The one-parameter family uses w = gamma/h, C = B_1 and B = B_m with
m in {0, 1}; the perturbed (penalty) variant uses w = 1/eps and
C = B = B_0. On a pure flux-boundary problem a mean-value constraint row
is appended to fix the pressure.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError
from .mesh import DIRICHLET, NEUMANN
from .spaces import CellTabulation, FacetTabulation, FeFunction


def _scatter(local, rows, cols, shape):
    """Accumulate batched local matrices (nc, nr, nl) into a CSR matrix."""
    nc, nr, nl = local.shape
    r = np.repeat(rows[:, :, None], nl, axis=2).ravel()
    c = np.repeat(cols[:, None, :], nr, axis=1).ravel()
    return sp.coo_matrix((local.ravel(), (r, c)), shape=shape).tocsr()


def assemble_mass(mesh, dofmap, degree=None):
    """Velocity mass matrix (u, v)."""
    if degree is None:
        degree = 2 * dofmap.k + 2
    tab = CellTabulation(mesh, dofmap, degree)
    n = dofmap.n_velocity
    return _scatter(tab.local_mass(), tab.vel_dofs, tab.vel_dofs, (n, n))


def assemble_flux_penalty(mesh, dofmap, degree=None):
    """Facet matrix <u . n, v . n> over the flux boundary (unweighted)."""
    if degree is None:
        degree = 2 * dofmap.k + 2
    n = dofmap.n_velocity
    fids = mesh.facets_with_label(NEUMANN)
    if not fids:
        return sp.csr_matrix((n, n))
    ft = FacetTabulation(mesh, dofmap, fids, degree)
    local = np.einsum("fqi,fqj,fq->fij", ft.flux, ft.flux, ft.wspeed)
    return _scatter(local, ft.vel_dofs, ft.vel_dofs, (n, n))


def assemble_divergence(mesh, dofmap, m, degree=None):
    """B_m(v, q) = (q, div v) - m <q, v . n>_{flux boundary}, (np x nv)."""
    if degree is None:
        degree = 2 * dofmap.k + 2
    tab = CellTabulation(mesh, dofmap, degree)
    shape = (dofmap.n_pressure, dofmap.n_velocity)
    mat = _scatter(tab.local_mixed(), tab.press_dofs, tab.vel_dofs, shape)
    if m:
        fids = mesh.facets_with_label(NEUMANN)
        if fids:
            ft = FacetTabulation(mesh, dofmap, fids, degree)
            local = -m * np.einsum("fqp,fqv,fq->fpv", ft.press, ft.flux, ft.wspeed)
            mat = mat + _scatter(local, ft.press_dofs, ft.vel_dofs, shape)
    return mat


def assemble_mean_row(mesh, dofmap, degree=None):
    """Row vector of pressure means, int_Omega psi_j dx."""
    if degree is None:
        degree = 2 * dofmap.k + 2
    tab = CellTabulation(mesh, dofmap, degree)
    row = np.zeros(dofmap.n_pressure)
    np.add.at(row, tab.press_dofs, np.einsum("qp,cq->cp", tab.press, tab.wdet))
    return row


def _rhs_cell(mesh, dofmap, case, degree):
    tab = CellTabulation(mesh, dofmap, degree)
    rhs_v = np.zeros(dofmap.n_velocity)
    fx = case.f(tab.x)
    np.add.at(rhs_v, tab.vel_dofs,
              np.einsum("cqvd,cqd,cq->cv", tab.vel, fx, tab.wdet))
    rhs_q = np.zeros(dofmap.n_pressure)
    np.add.at(rhs_q, tab.press_dofs,
              np.einsum("qp,cq->cp", tab.press, case.g(tab.x) * tab.wdet))
    return rhs_v, rhs_q


def _boundary_data(mesh, dofmap, case, label, degree):
    """Facet tabulation plus exact boundary data on the labelled facets."""
    fids = mesh.facets_with_label(label)
    if not fids:
        return None, None, None
    ft = FacetTabulation(mesh, dofmap, fids, degree)
    normals = ft.geom.scaled_normals / ft.geom.speeds[..., None]
    if label == NEUMANN:
        data = np.einsum("fqd,fqd->fq", case.u(ft.geom.points), normals)
    else:
        data = case.p(ft.geom.points)
    return fids, ft, data


@dataclass
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    mesh: object
    dofmap: object
    has_multiplier: bool

    @property
    def n_velocity(self):
        return self.dofmap.n_velocity

    @property
    def n_pressure(self):
        return self.dofmap.n_pressure

    def split(self, solution):
        nv, npp = self.n_velocity, self.n_pressure
        u = FeFunction("velocity", self.mesh, self.dofmap, solution[:nv])
        p = FeFunction("pressure", self.mesh, self.dofmap, solution[nv:nv + npp])
        lam = float(solution[-1]) if self.has_multiplier else 0.0
        return u, p, lam


def check_compatibility(mesh, dofmap, case, degree=None):
    """Relative mismatch of int_Gamma u . n ds against int_Omega g dx."""
    if degree is None:
        # the divergence theorem holds exactly on the meshed domain, so
        # any mismatch beyond quadrature error is a data inconsistency
        degree = 12
    tab = CellTabulation(mesh, dofmap, degree)
    vol = float(np.sum(case.g(tab.x) * tab.wdet))
    ft = FacetTabulation(mesh, dofmap, mesh.boundary_facets, degree)
    flux = np.einsum("fqd,fqd->", case.u(ft.geom.points),
                     ft.geom.scaled_normals * ft.weights[None, :, None])
    scale = max(abs(vol), abs(flux), 1.0)
    return abs(flux - vol) / scale


def assemble_system(mesh, dofmap, case, m_row1, m_row2, weight, degree=None,
                    rhs_degree=None):
    """Assemble the full saddle-point system for either formulation."""
    k = dofmap.k
    if degree is None:
        degree = 2 * k + 2
    if rhs_degree is None:
        rhs_degree = 2 * k + 5
    if m_row1 not in (0, 1) or m_row2 not in (0, 1):
        raise ConfigurationError("coupling parameters must be 0 or 1")
    if weight <= 0.0:
        raise ConfigurationError("boundary penalty weight must be positive")

    a_mat = assemble_mass(mesh, dofmap, degree) + weight * assemble_flux_penalty(
        mesh, dofmap, degree)
    b_row1 = assemble_divergence(mesh, dofmap, m_row1, degree)
    if m_row2 == m_row1:
        b_row2 = b_row1
    else:
        b_row2 = assemble_divergence(mesh, dofmap, m_row2, degree)

    rhs_v, rhs_q = _rhs_cell(mesh, dofmap, case, rhs_degree)
    fids, ft, u_n = _boundary_data(mesh, dofmap, case, NEUMANN, rhs_degree)
    if fids:
        np.add.at(rhs_v, ft.vel_dofs,
                  weight * np.einsum("fqv,fq,fq->fv", ft.flux, u_n, ft.wspeed))
        if m_row2:
            np.add.at(rhs_q, ft.press_dofs,
                      -m_row2 * np.einsum("fqp,fq,fq->fp", ft.press, u_n, ft.wspeed))
    fids, ft, p_d = _boundary_data(mesh, dofmap, case, DIRICHLET, rhs_degree)
    if fids:
        np.add.at(rhs_v, ft.vel_dofs,
                  np.einsum("fqv,fq,fq->fv", ft.flux, p_d, ft.wspeed))

    pure_neumann = mesh.pure_neumann
    if pure_neumann:
        mismatch = check_compatibility(mesh, dofmap, case)
        if mismatch > 1e-8:
            warnings.warn(
                f"boundary flux and source are incompatible (relative "
                f"mismatch {mismatch:.2e}); the mean-constrained solution "
                f"balances the defect", stacklevel=2)
        mean = assemble_mean_row(mesh, dofmap, degree)
        zc = sp.csr_matrix((dofmap.n_velocity, 1))
        mat = sp.bmat(
            [[a_mat, b_row1.T, zc],
             [b_row2, None, sp.csr_matrix(mean[:, None])],
             [zc.T, sp.csr_matrix(mean[None, :]), None]],
            format="csr")
        rhs = np.concatenate([rhs_v, rhs_q, [0.0]])
    else:
        mat = sp.bmat([[a_mat, b_row1.T], [b_row2, None]], format="csr")
        rhs = np.concatenate([rhs_v, rhs_q])
    return LinearSystem(mat, rhs, mesh, dofmap, pure_neumann)


def assemble_nitsche(mesh, dofmap, case, m, gamma_exp=1.0, **kw):
    """One-parameter formulation: row-1 coupling B_1, row-2 coupling B_m,
    boundary weight h^(-gamma_exp)."""
    weight = mesh.h_max ** (-gamma_exp)
    return assemble_system(mesh, dofmap, case, 1, m, weight, **kw)


def assemble_penalty(mesh, dofmap, case, eps=None, gamma_exp=None, **kw):
    """Perturbed formulation: B_0 in both rows, weight 1/eps with the
    default eps = h^(k+1)."""
    if eps is None:
        exp = dofmap.k + 1 if gamma_exp is None else gamma_exp
        eps = mesh.h_max ** exp
    return assemble_system(mesh, dofmap, case, 0, 0, 1.0 / eps, **kw)


def norm_velocity_0h(mesh, dofmap, u_h, weight=None, degree=None):
    """Mesh-dependent velocity norm: ||v||^2 + w ||v . n||^2 on the flux
    boundary, w = 1/h by default (pass 1/eps for the perturbed variant)."""
    if degree is None:
        degree = 2 * dofmap.k + 2
    if weight is None:
        weight = 1.0 / mesh.h_max
    tab = CellTabulation(mesh, dofmap, degree)
    vals, _ = tab.velocity_values(u_h)
    total = float(np.einsum("cqd,cqd,cq->", vals, vals, tab.wdet))
    fids = mesh.facets_with_label(NEUMANN)
    if fids:
        ft = FacetTabulation(mesh, dofmap, fids, degree)
        c = u_h.coeffs[ft.vel_dofs]
        tr = np.einsum("fqv,fv->fq", ft.flux, c)
        total += weight * float(np.einsum("fq,fq->", tr**2, ft.wspeed))
    return np.sqrt(total)


def norm_pressure_1h(mesh, dofmap, p_h, include_neumann=False, degree=None):
    """Broken H1-type pressure norm: cell gradients plus 1/h-weighted
    interior jumps and pressure-boundary traces (all boundary traces when
    include_neumann is set, matching the perturbed variant)."""
    from .spaces import facet_trace
    from .quadrature import facet_rule
    from .geometry import FacetGeometry

    if degree is None:
        degree = 2 * dofmap.k + 2
    inv_h = 1.0 / mesh.h_max
    tab = CellTabulation(mesh, dofmap, degree)
    grad = tab.pressure_gradients(p_h)
    total = float(np.einsum("cqd,cqd,cq->", grad, grad, tab.wdet))
    rule = facet_rule(degree)
    t, w = rule.points[:, 0], rule.weights

    def trace_sq(fids, vals):
        fg = FacetGeometry(mesh, fids, t)
        return float(np.einsum("fq,fq,q->", vals**2, fg.speeds, w))

    interior = mesh.interior_facets
    if interior:
        jump = facet_trace(mesh, dofmap, p_h, interior, t) - facet_trace(
            mesh, dofmap, p_h, interior, t, side="neighbor")
        total += inv_h * trace_sq(interior, jump)
    labels = [DIRICHLET] + ([NEUMANN] if include_neumann else [])
    for label in labels:
        fids = mesh.facets_with_label(label)
        if fids:
            total += inv_h * trace_sq(fids, facet_trace(mesh, dofmap, p_h, fids, t))
    return np.sqrt(total)
