"""Global DOF numbering, discrete fields and batched basis tabulation.

Velocity DOFs: (k+1) flux moments per facet (numbered facet-major), then
the interior moments cell by cell. A facet DOF is shared by the two
adjacent cells; on the non-owner side the local coefficient is the global
one times (-1)^(q+1) for the moment of degree q (direction reversal flips
odd Legendre moments, the normal flips the overall sign). Pressure DOFs
are cell-local monomial coefficients.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidParameterError
from .geometry import CellGeometry, FacetGeometry, edge_ref_points, piola_push
from .quadrature import cell_rule, facet_rule
from .reference import reference_element, shifted_legendre


@dataclass(frozen=True)
class DofMap:
    k: int
    n_velocity: int
    n_pressure: int
    cell_vel: np.ndarray  # (nc, nv) global velocity dof per local dof
    cell_sign: np.ndarray  # (nc, nv) +-1
    cell_press: np.ndarray  # (nc, np)
    facet_vel: np.ndarray  # (n_facets, k+1) global dof of each facet moment


def build_dofmap(mesh, k):
    kinds = {c.kind for c in mesh.cells}
    if len(kinds) != 1:
        raise InvalidParameterError("mixed-kind meshes are not supported")
    ref = reference_element(kinds.pop(), k)
    nfd = ref.n_facet_dofs
    nid = ref.n_interior_dofs
    nc, nf = len(mesh.cells), len(mesh.facets)
    n_vel = nf * nfd + nc * nid
    facet_vel = np.arange(nf * nfd).reshape(nf, nfd)
    cell_vel = np.empty((nc, ref.velocity_dim), dtype=np.int64)
    cell_sign = np.ones((nc, ref.velocity_dim))
    neighbor_sign = np.array([(-1.0) ** (q + 1) for q in range(nfd)])
    for cid in range(nc):
        for e, fid in enumerate(mesh.cell_facets[cid]):
            sl = slice(e * nfd, (e + 1) * nfd)
            cell_vel[cid, sl] = facet_vel[fid]
            if mesh.facets[fid].owner != cid:
                cell_sign[cid, sl] = neighbor_sign
        base = nf * nfd + cid * nid
        cell_vel[cid, ref.n_edges * nfd:] = np.arange(base, base + nid)
    npp = ref.pressure_dim
    cell_press = (np.arange(nc)[:, None] * npp + np.arange(npp)[None, :]).astype(np.int64)
    return DofMap(
        k=k,
        n_velocity=n_vel,
        n_pressure=nc * npp,
        cell_vel=cell_vel,
        cell_sign=cell_sign,
        cell_press=cell_press,
        facet_vel=facet_vel,
    )


@dataclass
class FeFunction:
    space: str  # "velocity" or "pressure"
    mesh: object
    dofmap: DofMap
    coeffs: np.ndarray

    def __post_init__(self):
        n = self.dofmap.n_velocity if self.space == "velocity" else self.dofmap.n_pressure
        if len(self.coeffs) != n:
            raise InvalidParameterError(
                f"{self.space} coefficient vector has length {len(self.coeffs)}, expected {n}"
            )


class CellTabulation:
    """Physical basis data at a volume quadrature rule, batched over cells.

    Attributes: rule, ref, geom, x (nc,nq,2), jac, det, wdet (nc,nq),
    vel (nc,nq,nv,2) with DOF signs applied, div (nc,nq,nv),
    press (nq,np) reference values, press_grad (nc,nq,np,2) physical.
    """

    def __init__(self, mesh, dofmap, degree, cell_ids=None):
        self.mesh = mesh
        self.dofmap = dofmap
        kind = mesh.cells[0].kind
        self.ref = reference_element(kind, dofmap.k)
        self.rule = cell_rule(kind, degree)
        self.geom = CellGeometry(mesh, cell_ids)
        self.cell_ids = np.asarray(self.geom.cell_ids, dtype=np.int64)
        pts = self.rule.points
        self.x = self.geom.map_points(pts)
        self.jac, self.det = self.geom.jacobians(pts)
        self.wdet = self.rule.weights[None, :] * self.det
        ref_v, ref_d = self.ref.tabulate_velocity(pts)
        vel = np.einsum("cqab,qvb->cqva", self.jac, ref_v) / self.det[..., None, None]
        div = ref_d[None, :, :] / self.det[..., None]
        sign = dofmap.cell_sign[self.cell_ids]
        self.vel = vel * sign[:, None, :, None]
        self.div = div * sign[:, None, :]
        self.press, ref_g = self.ref.tabulate_pressure(pts)
        inv_t = np.linalg.inv(self.jac).transpose(0, 1, 3, 2)
        self.press_grad = np.einsum("cqab,qpb->cqpa", inv_t, ref_g)

    @property
    def vel_dofs(self):
        return self.dofmap.cell_vel[self.cell_ids]

    @property
    def press_dofs(self):
        return self.dofmap.cell_press[self.cell_ids]

    def velocity_values(self, fn):
        """Values (nc, nq, 2) and divergences (nc, nq) of a velocity field."""
        c = fn.coeffs[self.vel_dofs]
        return (
            np.einsum("cqvd,cv->cqd", self.vel, c),
            np.einsum("cqv,cv->cq", self.div, c),
        )

    def pressure_values(self, fn):
        c = fn.coeffs[self.press_dofs]
        return np.einsum("qp,cp->cq", self.press, c)

    def pressure_gradients(self, fn):
        c = fn.coeffs[self.press_dofs]
        return np.einsum("cqpd,cp->cqd", self.press_grad, c)

    def local_mass(self):
        return _kernels.local_mass(
            np.ascontiguousarray(self.vel), np.ascontiguousarray(self.wdet)
        )

    def local_mixed(self):
        """(psi_p, div phi_v)_K local matrices, (nc, np, nv)."""
        return _kernels.local_mixed(
            np.ascontiguousarray(self.press),
            np.ascontiguousarray(self.div),
            np.ascontiguousarray(self.wdet),
        )


class FacetTabulation:
    """Facet-side basis data for a set of facets, from the owner cell.

    normal fluxes `flux` (nf, nq, nv): owner-cell local basis v . n at the
    facet points (signs applied); pressure traces `press` (nf, nq, np) of
    the owner cell; geometry (points, speeds, scaled normals).
    """

    def __init__(self, mesh, dofmap, facet_ids, degree):
        self.mesh = mesh
        self.dofmap = dofmap
        self.facet_ids = list(facet_ids)
        kind = mesh.cells[0].kind
        self.ref = reference_element(kind, dofmap.k)
        self.rule = facet_rule(degree)
        t = self.rule.points[:, 0]
        self.t = t
        self.weights = self.rule.weights
        self.geom = FacetGeometry(mesh, self.facet_ids, t)
        facets = [mesh.facets[i] for i in self.facet_ids]
        self.owners = np.array([f.owner for f in facets], dtype=np.int64)
        nq, nv = len(t), self.ref.velocity_dim
        npp = self.ref.pressure_dim
        self.flux = np.empty((len(facets), nq, nv))
        self.press = np.empty((len(facets), nq, npp))
        speeds = self.geom.speeds
        by_edge = {}
        for i, f in enumerate(facets):
            by_edge.setdefault(f.owner_edge, []).append(i)
        for edge, idx in by_edge.items():
            pts, dref = edge_ref_points(kind, edge, t)
            ref_v, _ = self.ref.tabulate_velocity(pts)
            rot = np.array([dref[1], -dref[0]])
            ref_flux = ref_v @ rot  # (nq, nv), reference flux density
            self.flux[idx] = ref_flux[None, :, :] / speeds[idx][:, :, None]
            self.press[idx] = self.ref.tabulate_pressure(pts)[0][None]
        sign = dofmap.cell_sign[self.owners]
        self.flux *= sign[:, None, :]

    @property
    def vel_dofs(self):
        return self.dofmap.cell_vel[self.owners]

    @property
    def press_dofs(self):
        return self.dofmap.cell_press[self.owners]

    @property
    def wspeed(self):
        """Arclength quadrature weights w |x'| per facet point, (nf, nq)."""
        return self.weights[None, :] * self.geom.speeds


def facet_trace(mesh, dofmap, fn, facet_ids, t, side="owner"):
    """Trace values along facets at parameters `t` of the global facet
    parametrization. For velocity returns v . n_global; for pressure the
    scalar trace from the requested side ("owner" or "neighbor")."""
    t = np.asarray(t, dtype=float)
    kind = mesh.cells[0].kind
    ref = reference_element(kind, dofmap.k)
    facets = [mesh.facets[i] for i in facet_ids]
    if side == "owner":
        cells = [f.owner for f in facets]
        edges = [f.owner_edge for f in facets]
        ts = t
    else:
        cells = [f.neighbor for f in facets]
        edges = [f.neighbor_edge for f in facets]
        if any(c is None for c in cells):
            raise InvalidParameterError("neighbor trace requested on a boundary facet")
        ts = 1.0 - t
    geom_f = FacetGeometry(mesh, facet_ids, t)
    out = None
    for i, (cid, edge) in enumerate(zip(cells, edges)):
        pts, dref = edge_ref_points(kind, edge, ts)
        if fn.space == "pressure":
            vals = ref.tabulate_pressure(pts)[0]
            c = fn.coeffs[dofmap.cell_press[cid]]
            row = vals @ c
        else:
            ref_v, _ = ref.tabulate_velocity(pts)
            rot = np.array([dref[1], -dref[0]])
            ref_flux = ref_v @ rot
            c = fn.coeffs[dofmap.cell_vel[cid]] * dofmap.cell_sign[cid]
            # flux density is orientation-intrinsic: owner and neighbor
            # traversals differ by t -> 1-t AND normal flip, which cancel
            # in v . n_global |x'|.
            sgn = 1.0 if side == "owner" else -1.0
            row = sgn * (ref_flux @ c) / geom_f.speeds[i]
        if out is None:
            out = np.empty((len(facets), len(t)))
        out[i] = row
    return out
