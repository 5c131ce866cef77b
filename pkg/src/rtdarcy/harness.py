"""Study drivers: convergence, penalty sweep, condition number, checks.

Every study writes a CSV whose rows are bitwise-stable for a fixed
configuration and seed; reported rates are least-squares slopes of
log(err) against log(h) over the finest three levels and can be
recomputed from the emitted columns.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .assembly import (
    assemble_nitsche,
    assemble_penalty,
    norm_pressure_1h,
    norm_velocity_0h,
)
from .cases import get_case
from .errors import ConfigurationError, SolverError
from .geometry import FacetGeometry
from .linalg import condition_number_l2, solve
from .mesh import DIRICHLET, NEUMANN
from .quadrature import MAX_DEGREE, facet_rule
from .spaces import CellTabulation, build_dofmap, facet_trace

FORMULATIONS = ("nitsche-sym", "nitsche-nonsym", "penalty")


@dataclass(frozen=True)
class StudyConfig:
    case: str
    formulation: str
    order: int
    levels: tuple
    gamma_exp: float = None  # default 1 for Nitsche, k+1 for penalty
    out: str = None
    seed: int = 0

    def __post_init__(self):
        if self.formulation not in FORMULATIONS:
            raise ConfigurationError(
                f"unknown formulation {self.formulation!r}; pick from {FORMULATIONS}")
        if self.order not in (0, 1, 2):
            raise ConfigurationError("order must be 0, 1 or 2")
        if list(self.levels) != sorted(set(self.levels)) or not self.levels:
            raise ConfigurationError("levels must be strictly increasing and nonempty")
        get_case(self.case)

    @property
    def effective_gamma_exp(self):
        if self.gamma_exp is not None:
            return float(self.gamma_exp)
        return float(self.order + 1) if self.formulation == "penalty" else 1.0


@dataclass
class ConvergenceReport:
    config: StudyConfig
    rows: list = field(default_factory=list)  # dicts keyed by column name
    rates: dict = field(default_factory=dict)


CSV_COLUMNS = ("level", "h", "n_dofs", "err_u_l2", "err_p_l2", "err_u_0h", "err_p_1h")


def assemble_for(mesh, dofmap, case, formulation, gamma_exp):
    if formulation == "penalty":
        return assemble_penalty(mesh, dofmap, case, gamma_exp=gamma_exp)
    m = 1 if formulation == "nitsche-sym" else 0
    return assemble_nitsche(mesh, dofmap, case, m=m, gamma_exp=gamma_exp)


def l2_errors(mesh, dofmap, case, u_h, p_h, degree=None):
    """L2 errors of velocity and pressure against the exact fields."""
    if degree is None:
        degree = min(2 * dofmap.k + 6, MAX_DEGREE)
    tab = CellTabulation(mesh, dofmap, degree)
    du, _ = tab.velocity_values(u_h)
    du = du - case.u(tab.x)
    dp = tab.pressure_values(p_h) - case.p(tab.x)
    err_u = np.sqrt(np.einsum("cqd,cqd,cq->", du, du, tab.wdet))
    err_p = np.sqrt(np.einsum("cq,cq->", dp**2, tab.wdet))
    return float(err_u), float(err_p)


def mesh_dependent_errors(mesh, dofmap, case, u_h, p_h, weight,
                          include_neumann, degree=None):
    """Errors in the mesh-dependent norms: flux-weighted velocity norm and
    broken H1 pressure norm (the exact pressure has no interior jumps, so
    the jump terms come from p_h alone)."""
    if degree is None:
        degree = min(2 * dofmap.k + 6, MAX_DEGREE)
    tab = CellTabulation(mesh, dofmap, degree)
    du, _ = tab.velocity_values(u_h)
    du = du - case.u(tab.x)
    total_u = float(np.einsum("cqd,cqd,cq->", du, du, tab.wdet))
    dg = tab.pressure_gradients(p_h) - case.grad_p(tab.x)
    total_p = float(np.einsum("cqd,cqd,cq->", dg, dg, tab.wdet))

    inv_h = 1.0 / mesh.h_max
    rule = facet_rule(degree)
    t, w = rule.points[:, 0], rule.weights

    def trace_sq(fids, vals):
        fg = FacetGeometry(mesh, fids, t)
        return float(np.einsum("fq,fq,q->", vals**2, fg.speeds, w))

    fids = mesh.facets_with_label(NEUMANN)
    if fids:
        fg = FacetGeometry(mesh, fids, t)
        normals = fg.scaled_normals / fg.speeds[..., None]
        exact = np.einsum("fqd,fqd->fq", case.u(fg.points), normals)
        tr = facet_trace(mesh, dofmap, u_h, fids, t) - exact
        total_u += weight * trace_sq(fids, tr)

    interior = mesh.interior_facets
    if interior:
        jump = facet_trace(mesh, dofmap, p_h, interior, t) - facet_trace(
            mesh, dofmap, p_h, interior, t, side="neighbor")
        total_p += inv_h * trace_sq(interior, jump)
    labels = [DIRICHLET] + ([NEUMANN] if include_neumann else [])
    for label in labels:
        fids = mesh.facets_with_label(label)
        if fids:
            fg = FacetGeometry(mesh, fids, t)
            tr = facet_trace(mesh, dofmap, p_h, fids, t) - case.p(fg.points)
            total_p += inv_h * trace_sq(fids, tr)
    return float(np.sqrt(total_u)), float(np.sqrt(total_p))


def least_squares_rate(hs, errs, n_finest=3):
    """Slope of log err against log h over the finest `n_finest` levels."""
    hs = np.asarray(hs, dtype=float)[-n_finest:]
    errs = np.asarray(errs, dtype=float)[-n_finest:]
    if len(hs) < 2 or np.any(errs <= 0.0):
        return float("nan")
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


def solve_level(case, level, order, formulation, gamma_exp):
    mesh = case.build_mesh(level)
    dofmap = build_dofmap(mesh, order)
    try:
        system = assemble_for(mesh, dofmap, case, formulation, gamma_exp)
        u_h, p_h, lam = solve(system)
    except SolverError as exc:
        raise SolverError(f"level {level}: {exc}") from exc
    return mesh, dofmap, system, u_h, p_h, lam


def run_convergence(config):
    case = get_case(config.case)
    exp = config.effective_gamma_exp
    include_neumann = config.formulation == "penalty"
    report = ConvergenceReport(config)
    for level in config.levels:
        mesh, dm, system, u_h, p_h, _ = solve_level(
            case, level, config.order, config.formulation, exp)
        weight = mesh.h_max ** (-exp)
        err_u, err_p = l2_errors(mesh, dm, case, u_h, p_h)
        err_u0h, err_p1h = mesh_dependent_errors(
            mesh, dm, case, u_h, p_h, weight, include_neumann)
        report.rows.append({
            "level": level, "h": float(mesh.h_max),
            "n_dofs": system.matrix.shape[0],
            "err_u_l2": err_u, "err_p_l2": err_p,
            "err_u_0h": err_u0h, "err_p_1h": err_p1h,
        })
    hs = [r["h"] for r in report.rows]
    for key in ("err_u_l2", "err_p_l2", "err_u_0h", "err_p_1h"):
        report.rates["rate_" + key[4:]] = least_squares_rate(
            hs, [r[key] for r in report.rows])
    if config.out:
        write_convergence_csv(report, config.out)
    return report


def write_convergence_csv(report, path):
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for row in report.rows:
        buf.write(f"{row['level']},{row['h']!r},{row['n_dofs']},"
                  f"{row['err_u_l2']!r},{row['err_p_l2']!r},"
                  f"{row['err_u_0h']!r},{row['err_p_1h']!r}\n")
    buf.write("# " + " ".join(f"{k}={v!r}" for k, v in report.rates.items()) + "\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def default_sweep_exponents(order):
    exps = sorted({0.0, 0.5, 1.0, float(order), float(order + 1), float(order + 2)})
    return exps


def run_penalty_sweep(config, exponents=None):
    """One convergence curve per boundary-weight exponent. Returns
    {exponent: ConvergenceReport} and writes a combined CSV."""
    if exponents is None:
        exponents = default_sweep_exponents(config.order)
    if any(e < 0.0 or e > config.order + 3 for e in exponents):
        raise ConfigurationError("sweep exponents must lie in [0, k+3]")
    curves = {}
    for exp in exponents:
        sub = StudyConfig(config.case, config.formulation, config.order,
                          config.levels, gamma_exp=exp, seed=config.seed)
        curves[float(exp)] = run_convergence(sub)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write("gamma_exp," + ",".join(CSV_COLUMNS) + "\n")
            for exp, rep in curves.items():
                for row in rep.rows:
                    fh.write(f"{exp!r}," + ",".join(
                        repr(row[c]) if isinstance(row[c], float) else str(row[c])
                        for c in CSV_COLUMNS) + "\n")
            for exp, rep in curves.items():
                fh.write(f"# gamma_exp={exp!r} " + " ".join(
                    f"{k}={v!r}" for k, v in rep.rates.items()) + "\n")
    return curves


def run_condition_study(config):
    """Spectral condition number per level plus log-log slope vs h.

    The matrix is expressed in a basis of unit-magnitude functions
    before the condition number is taken: the moment-dual velocity basis
    scales like 1/h, so its DOFs are rescaled by h (a symmetric diagonal
    congruence). Without this normalization every slope would be
    steepened by 2, an artifact of the DOF convention rather than of the
    discretization.
    """
    import scipy.sparse as sp

    case = get_case(config.case)
    exp = config.effective_gamma_exp
    rows = []
    for level in config.levels:
        mesh = case.build_mesh(level)
        dm = build_dofmap(mesh, config.order)
        system = assemble_for(mesh, dm, case, config.formulation, exp)
        scale = np.ones(system.matrix.shape[0])
        scale[:dm.n_velocity] = mesh.h_max
        diag = sp.diags(scale)
        cond = condition_number_l2(diag @ system.matrix @ diag, seed=config.seed)
        rows.append({"level": level, "h": float(mesh.h_max),
                     "n_dofs": system.matrix.shape[0], "cond": cond})
    slope = least_squares_rate([r["h"] for r in rows], [r["cond"] for r in rows])
    if config.out:
        with open(config.out, "w") as fh:
            fh.write("level,h,n_dofs,cond\n")
            for r in rows:
                fh.write(f"{r['level']},{r['h']!r},{r['n_dofs']},{r['cond']!r}\n")
            fh.write(f"# slope={slope!r}\n")
    return rows, slope


def run_property_battery(seed=0, out=None, flip_facet_sign=False):
    """Structural checks on small meshes. Returns a list of
    (name, passed, detail) triples; `flip_facet_sign` is a debug hook that
    corrupts one facet-DOF sign to prove the conformity check has teeth."""
    from .assembly import assemble_divergence, assemble_mass, assemble_flux_penalty
    from .interpolation import (boundary_flux_defect, commuting_defect,
                                infsup_witness, project_pressure)
    from .spaces import FeFunction

    rng = np.random.default_rng(seed)
    results = []

    def record(name, passed, detail):
        results.append((name, bool(passed), detail))

    smooth_u = lambda x: np.stack(
        [np.sin(x[..., 0]) * np.cos(x[..., 1]), x[..., 0] ** 2 * x[..., 1]], axis=-1)
    smooth_div = lambda x: np.cos(x[..., 0]) * np.cos(x[..., 1]) + x[..., 0] ** 2

    for case_name, k in (("square-tri", 0), ("square-tri", 1), ("square-quad", 1),
                         ("annulus", 1)):
        case = get_case(case_name)
        mesh = case.build_mesh(3)
        dm = build_dofmap(mesh, k)

        coeffs = rng.standard_normal(dm.n_velocity)
        t = np.linspace(0.1, 0.9, 5)
        interior = mesh.interior_facets
        dm_c = dm
        if flip_facet_sign:
            # debug hook: corrupt the owner-side sign of one interior
            # facet DOF; the conformity check must then fail
            fid = interior[0]
            owner = mesh.facets[fid].owner
            local = mesh.cell_facets[owner].index(fid) * (dm.k + 1)
            sign = dm.cell_sign.copy()
            sign[owner, local] = -sign[owner, local]
            dm_c = dm.__class__(dm.k, dm.n_velocity, dm.n_pressure,
                                dm.cell_vel, sign, dm.cell_press, dm.facet_vel)
        fn = FeFunction("velocity", mesh, dm_c, coeffs)
        jump = np.abs(
            facet_trace(mesh, dm_c, fn, interior, t)
            - facet_trace(mesh, dm_c, fn, interior, t, side="neighbor")).max()
        record(f"hdiv-conformity[{case_name},k={k}]", jump < 1e-10,
               f"max interior normal jump {jump:.2e}")

        cd = commuting_defect(mesh, dm, smooth_u, smooth_div)
        record(f"commuting-diagram[{case_name},k={k}]", cd < 1e-10,
               f"max moment defect {cd:.2e}")

        # moment orthogonality needs straight facets; on the annulus only
        # the facets along the axes qualify
        straight = (mesh.facets_with_label(DIRICHLET)
                    if case_name == "annulus" else mesh.boundary_facets)
        bd = boundary_flux_defect(mesh, dm, smooth_u, straight)
        record(f"boundary-orthogonality[{case_name},k={k}]", bd < 1e-10,
               f"max facet moment {bd:.2e}")

        v = rng.standard_normal(dm.n_velocity)
        a_mat = assemble_mass(mesh, dm) + (1.0 / mesh.h_max) * assemble_flux_penalty(
            mesh, dm)
        lhs = float(v @ (a_mat @ v))
        rhs = norm_velocity_0h(mesh, dm, FeFunction("velocity", mesh, dm, v)) ** 2
        rel = abs(lhs - rhs) / rhs
        record(f"coercivity-identity[{case_name},k={k}]", rel < 1e-12,
               f"relative defect {rel:.2e}")

        if case_name == "annulus":
            # the witness construction is exact only with straight facets
            continue
        q = FeFunction("pressure", mesh, dm, rng.standard_normal(dm.n_pressure))
        for m, inc in ((1, False), (0, True)):
            b_mat = assemble_divergence(mesh, dm, m)
            w = infsup_witness(mesh, dm, q, include_neumann=inc)
            val = float(q.coeffs @ (b_mat @ w.coeffs))
            nrm = norm_pressure_1h(mesh, dm, q, include_neumann=inc) ** 2
            rel = abs(val - nrm) / nrm
            record(f"infsup-witness[m={m},{case_name},k={k}]", rel < 1e-9,
                   f"relative defect {rel:.2e}")

    # formulation-level checks on a case with a pressure boundary (no
    # mean constraint, so weak divergence-freedom is exact)
    case = get_case("square-quad")
    mesh = case.build_mesh(4)
    for k in (0, 1):
        dm = build_dofmap(mesh, k)
        sym = assemble_for(mesh, dm, case, "nitsche-sym", 1.0)
        asym = abs(sym.matrix - sym.matrix.T).max()
        record(f"symmetry[m=1,k={k}]", asym < 1e-12, f"max asymmetry {asym:.2e}")
        nonsym = assemble_for(mesh, dm, case, "nitsche-nonsym", 1.0)
        asym = abs(nonsym.matrix - nonsym.matrix.T).max()
        record(f"nonsymmetry[m=0,k={k}]", asym > 1e-8, f"max asymmetry {asym:.2e}")
        for form in ("nitsche-nonsym", "penalty"):
            exp = 1.0 if form == "nitsche-nonsym" else k + 1.0
            mesh_f, dm_f, _, u_h, p_h, _ = solve_level(case, 4, k, form, exp)
            tab = CellTabulation(mesh_f, dm_f, 2 * k + 2)
            _, div = tab.velocity_values(u_h)
            nrm = float(np.sqrt(np.einsum("cq,cq->", div**2, tab.wdet)))
            record(f"weak-divergence-free[{form},k={k}]", nrm < 1e-9,
                   f"||div u_h|| = {nrm:.2e}")

    # exact reproduction of an in-space solution
    case = get_case("inspace")
    mesh_r, dmr, _, u_h, p_h, _ = solve_level(case, 4, 1, "nitsche-sym", 1.0)
    err_u, err_p = l2_errors(mesh_r, dmr, case, u_h, p_h)
    record("exact-reproduction[inspace,k=1]", err_u < 1e-9 and err_p < 1e-9,
           f"err_u {err_u:.2e}, err_p {err_p:.2e}")

    # pure Neumann: zero-mean pressure
    case = get_case("square-tri")
    mesh_n, dm_n, system, u_h, p_h, _ = solve_level(case, 6, 0, "nitsche-sym", 1.0)
    tab = CellTabulation(mesh_n, dm_n, 4)
    mean = float(np.einsum("cq,cq->", tab.pressure_values(p_h), tab.wdet))
    record("zero-mean-pressure[pure-neumann]", abs(mean) < 1e-9,
           f"mean pressure {mean:.2e}")

    if out:
        with open(out, "w") as fh:
            for name, passed, detail in results:
                fh.write(f"{'PASS' if passed else 'FAIL'} {name}: {detail}\n")
    return results
