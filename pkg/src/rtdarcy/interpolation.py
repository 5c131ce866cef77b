"""Canonical interpolation, local projection and the inf-sup witness field.

The velocity interpolant assigns the facet flux moments and the interior
moments of the (inverse Piola) pullback; both are preserved exactly by the
Piola map, so the interpolant is H(div)-conforming on any cell geometry.
"""

import numpy as np

from .geometry import CellGeometry, FacetGeometry, edge_ref_points
from .quadrature import MAX_DEGREE, cell_rule, facet_rule
from .reference import reference_element, shifted_legendre
from .spaces import CellTabulation, FeFunction, facet_trace


def _legendre_table(k, t):
    return np.array([shifted_legendre(q, t) for q in range(k + 1)])  # (k+1, nq)


def interpolate_rt(mesh, dofmap, fn, degree=None):
    """Canonical RT interpolant of a vector field fn(x) -> (..., 2)."""
    k = dofmap.k
    if degree is None:
        degree = min(2 * k + 8, MAX_DEGREE)
    kind = mesh.cells[0].kind
    ref = reference_element(kind, k)
    coeffs = np.zeros(dofmap.n_velocity)

    # facet moments of the flux density v(x(t)) . (x'_y, -x'_x)
    rule = facet_rule(degree)
    t, w = rule.points[:, 0], rule.weights
    all_facets = list(range(len(mesh.facets)))
    fg = FacetGeometry(mesh, all_facets, t)
    flux = np.einsum("fqd,fqd->fq", fn(fg.points), fg.scaled_normals)
    leg = _legendre_table(k, t)
    moments = np.einsum("fq,lq,q->fl", flux, leg, w)
    coeffs[dofmap.facet_vel] = moments

    if ref.n_interior_dofs:
        crule = cell_rule(kind, degree)
        geom = CellGeometry(mesh)
        x = geom.map_points(crule.points)
        jac, det = geom.jacobians(crule.points)
        inv = np.linalg.inv(jac)
        pullback = np.einsum("cqab,cqb,cq->cqa", inv, fn(x), det)
        psi = ref.tabulate_interior_moments(crule.points)
        vals = np.einsum("cqa,qja,q->cj", pullback, psi, crule.weights)
        nfd = ref.n_edges * ref.n_facet_dofs
        coeffs[dofmap.cell_vel[:, nfd:]] = vals
    return FeFunction("velocity", mesh, dofmap, coeffs)


def project_pressure(mesh, dofmap, fn, degree=None):
    """Cellwise L2 projection of a scalar field onto the pressure space."""
    if degree is None:
        degree = min(2 * dofmap.k + 8, MAX_DEGREE)
    tab = CellTabulation(mesh, dofmap, degree)
    mass = np.einsum("qi,qj,cq->cij", tab.press, tab.press, tab.wdet)
    rhs = np.einsum("qi,cq->ci", tab.press, fn(tab.x) * tab.wdet)
    sol = np.linalg.solve(mass, rhs[..., None])[..., 0]
    coeffs = np.zeros(dofmap.n_pressure)
    coeffs[tab.press_dofs] = sol
    return FeFunction("pressure", mesh, dofmap, coeffs)


def commuting_defect(mesh, dofmap, fn, div_fn, degree=None):
    """Largest pressure-space moment of div(I_h v) - div v over all cells.

    Zero (up to quadrature) on any cell geometry: the divergence of the
    interpolant reproduces the moments of the exact divergence.
    """
    if degree is None:
        degree = MAX_DEGREE
    u_h = interpolate_rt(mesh, dofmap, fn, degree=degree)
    tab = CellTabulation(mesh, dofmap, degree)
    _, div_h = tab.velocity_values(u_h)
    defect = np.einsum("qp,cq->cp", tab.press, (div_h - div_fn(tab.x)) * tab.wdet)
    return float(np.abs(defect).max())


def boundary_flux_defect(mesh, dofmap, fn, facet_ids, degree=None):
    """max over w_h of <(v - I_h v).n, w_h.n>_F for each listed facet.

    w_h ranges over the velocity basis; on straight facets the traces
    w_h.n span the polynomials of degree <= k, against which the
    interpolation error flux is orthogonal.
    """
    k = dofmap.k
    if degree is None:
        degree = MAX_DEGREE
    u_h = interpolate_rt(mesh, dofmap, fn, degree=degree)
    rule = facet_rule(degree)
    t, w = rule.points[:, 0], rule.weights
    fg = FacetGeometry(mesh, facet_ids, t)
    exact = np.einsum("fqd,fqd->fq", fn(fg.points), fg.scaled_normals) / fg.speeds
    approx = facet_trace(mesh, dofmap, u_h, facet_ids, t)
    leg = _legendre_table(k, t)
    # test against the normal-trace basis L_q(t) (straight-facet span)
    vals = np.einsum("fq,lq,fq,q->fl", exact - approx, leg, fg.speeds, w)
    return float(np.abs(vals).max())


def infsup_witness(mesh, dofmap, p_h, include_neumann=False, degree=None):
    """Velocity field pairing with p_h to produce its mesh-dependent norm.

    Facet flux moments are weighted pressure jumps (interior), traces
    (pressure-boundary facets, and flux-boundary facets when
    include_neumann is set); interior moments cancel the cell gradient
    term. The weight is 1/h with the global mesh size h.
    """
    from .mesh import DIRICHLET, NEUMANN

    k = dofmap.k
    if degree is None:
        degree = 2 * k + 4
    kind = mesh.cells[0].kind
    ref = reference_element(kind, k)
    inv_h = 1.0 / mesh.h_max
    coeffs = np.zeros(dofmap.n_velocity)

    rule = facet_rule(degree)
    t, w = rule.points[:, 0], rule.weights
    leg = _legendre_table(k, t)

    def facet_moments(fids, jump):
        fg = FacetGeometry(mesh, fids, t)
        return inv_h * np.einsum("fq,lq,fq,q->fl", jump, leg, fg.speeds, w)

    interior = mesh.interior_facets
    if interior:
        jump = facet_trace(mesh, dofmap, p_h, interior, t) - facet_trace(
            mesh, dofmap, p_h, interior, t, side="neighbor"
        )
        coeffs[dofmap.facet_vel[interior]] = facet_moments(interior, jump)
    labels = [DIRICHLET] + ([NEUMANN] if include_neumann else [])
    for label in labels:
        fids = mesh.facets_with_label(label)
        if fids:
            trace = facet_trace(mesh, dofmap, p_h, fids, t)
            coeffs[dofmap.facet_vel[fids]] = facet_moments(fids, trace)

    if ref.n_interior_dofs:
        # interior moments: (v, J^{-T} psi)_K = -(grad p_h, J^{-T} psi)_K,
        # which reduces to assigning the reference moment dofs directly
        tab = CellTabulation(mesh, dofmap, degree)
        grad = tab.pressure_gradients(p_h)
        inv_t = np.linalg.inv(tab.jac).transpose(0, 1, 3, 2)
        psi = ref.tabulate_interior_moments(tab.rule.points)
        psi_phys = np.einsum("cqab,qjb->cqja", inv_t, psi)
        vals = -np.einsum("cqa,cqja,cq->cj", grad, psi_phys, tab.wdet)
        nfd = ref.n_edges * ref.n_facet_dofs
        coeffs[dofmap.cell_vel[:, nfd:]] = vals
    return FeFunction("velocity", mesh, dofmap, coeffs)
