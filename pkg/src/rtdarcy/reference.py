"""Reference Raviart-Thomas elements of order k in {0, 1, 2}.

The velocity basis is computed once per (kind, k) by inverting the matrix
of degree-of-freedom functionals applied to a monomial spanning set, and
cached. DOFs are, in local order:

  * for each edge (CCW), moments of the reference flux density
    v . n |edge| against shifted Legendre polynomials of degree 0..k,
  * interior moments against the matching moment space (vector P_{k-1}
    on triangles, Q_{k-1,k} x Q_{k,k-1} on quads).

The pressure basis is the plain monomial basis of P_k / Q_k.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameterError
from .geometry import edge_ref_points
from .mesh import local_edges
from .quadrature import cell_rule, facet_rule

MAX_ORDER = 2


def shifted_legendre(q, t):
    """Legendre polynomial of degree q mapped to [0, 1]."""
    coeffs = np.zeros(q + 1)
    coeffs[q] = 1.0
    return np.polynomial.legendre.legval(2.0 * np.asarray(t) - 1.0, coeffs)


def _shifted_legendre_deriv(q, t):
    coeffs = np.zeros(q + 1)
    coeffs[q] = 1.0
    der = np.polynomial.legendre.legder(coeffs)
    return 2.0 * np.polynomial.legendre.legval(2.0 * np.asarray(t) - 1.0, der)


def _p_monomials(k):
    return [(a, b) for tot in range(k + 1) for a in range(tot, -1, -1) for b in [tot - a]]


def _q_monomials(r, s):
    return [(a, b) for b in range(s + 1) for a in range(r + 1)]


def _mono_vals(exps, pts):
    x, y = pts[:, 0], pts[:, 1]
    return np.stack([x ** a * y ** b for a, b in exps], axis=1)


def _mono_grads(exps, pts):
    x, y = pts[:, 0], pts[:, 1]
    gx = np.stack(
        [a * x ** max(a - 1, 0) * y ** b if a else np.zeros_like(x) for a, b in exps],
        axis=1,
    )
    gy = np.stack(
        [b * x ** a * y ** max(b - 1, 0) if b else np.zeros_like(x) for a, b in exps],
        axis=1,
    )
    return np.stack([gx, gy], axis=2)


def _velocity_generators(kind, k):
    """Spanning set of RT_k as (tag, data) descriptors."""
    gens = []
    if kind == "Triangle":
        for c in (0, 1):
            gens += [("comp", c, a, b) for a, b in _p_monomials(k)]
        gens += [("radial", a, k - a) for a in range(k + 1)]
    else:
        gens += [("comp", 0, a, b) for a, b in _q_monomials(k + 1, k)]
        gens += [("comp", 1, a, b) for a, b in _q_monomials(k, k + 1)]
    return gens


def _generator_tabulate(gens, pts):
    """Evaluate the generators; "comp" entries use shifted-Legendre
    products L_a(x) L_b(y) for conditioning of the DOF matrix."""
    x, y = pts[:, 0], pts[:, 1]
    n = len(pts)
    vals = np.zeros((n, len(gens), 2))
    divs = np.zeros((n, len(gens)))
    for i, gen in enumerate(gens):
        if gen[0] == "comp":
            _, c, a, b = gen
            la, lb = shifted_legendre(a, x), shifted_legendre(b, y)
            vals[:, i, c] = la * lb
            if c == 0:
                divs[:, i] = _shifted_legendre_deriv(a, x) * lb
            else:
                divs[:, i] = la * _shifted_legendre_deriv(b, y)
        else:
            _, a, b = gen  # (x^{a+1} y^b, x^a y^{b+1}), a + b = k
            vals[:, i, 0] = x ** (a + 1) * y ** b
            vals[:, i, 1] = x ** a * y ** (b + 1)
            divs[:, i] = (a + b + 2) * x ** a * y ** b
    return vals, divs


def interior_moment_exps(kind, k):
    """Monomial exponents per component of the interior moment space."""
    if k == 0:
        return [], []
    if kind == "Triangle":
        return _p_monomials(k - 1), _p_monomials(k - 1)
    return _q_monomials(k - 1, k), _q_monomials(k, k - 1)


@dataclass(frozen=True)
class ReferenceElement:
    kind: str
    order: int
    velocity_dim: int
    pressure_dim: int
    n_edges: int
    coeffs: np.ndarray  # (n_generators, velocity_dim), column j = basis phi_j

    @property
    def n_facet_dofs(self):
        return self.order + 1

    @property
    def n_interior_dofs(self):
        return self.velocity_dim - self.n_edges * self.n_facet_dofs

    def tabulate_velocity(self, pts):
        """Reference values (n, nv, 2) and divergences (n, nv)."""
        pts = np.asarray(pts, dtype=float)
        gv, gd = _generator_tabulate(_velocity_generators(self.kind, self.order), pts)
        return np.einsum("ngd,gv->nvd", gv, self.coeffs), gd @ self.coeffs

    def tabulate_pressure(self, pts):
        """Reference values (n, np) and gradients (n, np, 2)."""
        pts = np.asarray(pts, dtype=float)
        exps = _pressure_exps(self.kind, self.order)
        return _mono_vals(exps, pts), _mono_grads(exps, pts)

    def tabulate_interior_moments(self, pts):
        """Values (n, n_moments, 2) of the interior moment space basis."""
        pts = np.asarray(pts, dtype=float)
        e0, e1 = interior_moment_exps(self.kind, self.order)
        out = np.zeros((len(pts), len(e0) + len(e1), 2))
        if e0:
            out[:, : len(e0), 0] = _mono_vals(e0, pts)
            out[:, len(e0):, 1] = _mono_vals(e1, pts)
        return out

    def dof_functionals(self, vec_fn):
        """Apply every reference DOF to a vector field callable pts -> (n, 2)."""
        out = np.empty(self.velocity_dim)
        rule = facet_rule(2 * self.order + 2)
        t, w = rule.points[:, 0], rule.weights
        leg = np.stack([shifted_legendre(q, t) for q in range(self.order + 1)], axis=1)
        i = 0
        for e in range(self.n_edges):
            pts, dref = edge_ref_points(self.kind, e, t)
            flux = np.asarray(vec_fn(pts)) @ np.array([dref[1], -dref[0]])
            for q in range(self.order + 1):
                out[i] = np.sum(w * flux * leg[:, q])
                i += 1
        if self.n_interior_dofs:
            crule = cell_rule(self.kind, 2 * self.order + 2)
            mom = self.tabulate_interior_moments(crule.points)
            vals = np.asarray(vec_fn(crule.points))
            out[i:] = np.einsum("n,nd,nmd->m", crule.weights, vals, mom)
        return out


def _pressure_exps(kind, k):
    return _p_monomials(k) if kind == "Triangle" else _q_monomials(k, k)


@lru_cache(maxsize=None)
def reference_element(kind, k):
    if kind not in ("Triangle", "Quad"):
        raise InvalidParameterError(f"unknown cell kind {kind!r}")
    if not 0 <= k <= MAX_ORDER:
        raise InvalidParameterError(f"order k={k} not in 0..{MAX_ORDER}")
    gens = _velocity_generators(kind, k)
    nv = len(gens)
    n_edges = len(local_edges(kind))
    # DOF matrix M[i, g] = dof_i(generator_g)
    M = np.empty((nv, nv))
    rule = facet_rule(2 * k + 2)
    t, w = rule.points[:, 0], rule.weights
    leg = np.stack([shifted_legendre(q, t) for q in range(k + 1)], axis=1)
    row = 0
    for e in range(n_edges):
        pts, dref = edge_ref_points(kind, e, t)
        gv, _ = _generator_tabulate(gens, pts)
        flux = gv @ np.array([dref[1], -dref[0]])  # (nq, ngen)
        for q in range(k + 1):
            M[row] = np.einsum("n,n,ng->g", w, leg[:, q], flux)
            row += 1
    if row < nv:
        crule = cell_rule(kind, 2 * k + 2)
        gv, _ = _generator_tabulate(gens, crule.points)
        e0, e1 = interior_moment_exps(kind, k)
        mom = np.zeros((len(crule.points), len(e0) + len(e1), 2))
        mom[:, : len(e0), 0] = _mono_vals(e0, crule.points)
        mom[:, len(e0):, 1] = _mono_vals(e1, crule.points)
        M[row:] = np.einsum("n,nmd,ngd->mg", crule.weights, mom, gv)
    coeffs = np.linalg.inv(M)
    pressure_dim = len(_pressure_exps(kind, k))
    return ReferenceElement(
        kind=kind,
        order=k,
        velocity_dim=nv,
        pressure_dim=pressure_dim,
        n_edges=n_edges,
        coeffs=coeffs,
    )
