"""Cell geometry maps and the contravariant Piola transform.

All meshes in a family share one cell kind and geometry degree, so the
maps are tabulated batched over cells: given reference points, we return
physical points, Jacobians and determinants with a leading cell axis.
"""

import numpy as np

from .errors import DegenerateCellError, InvalidParameterError

REF_VERTICES = {
    "Triangle": np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
    "Quad": np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
}


def _lagrange_1d(degree, t):
    t = np.asarray(t, dtype=float)
    if degree == 1:
        vals = np.stack([1.0 - t, t], axis=-1)
        grads = np.stack([-np.ones_like(t), np.ones_like(t)], axis=-1)
    elif degree == 2:
        vals = np.stack(
            [2.0 * (t - 0.5) * (t - 1.0), -4.0 * t * (t - 1.0), 2.0 * t * (t - 0.5)],
            axis=-1,
        )
        grads = np.stack([4.0 * t - 3.0, -8.0 * t + 4.0, 4.0 * t - 1.0], axis=-1)
    else:
        raise InvalidParameterError(f"unsupported geometry degree {degree}")
    return vals, grads


def shape_functions(kind, degree, pts):
    """Geometry shape functions and reference gradients at `pts` (n, 2).

    Returns (vals (n, nn), grads (n, nn, 2)) in the mesh's geometry-node
    ordering (tensor order for quads, vertices for triangles).
    """
    pts = np.asarray(pts, dtype=float)
    if kind == "Triangle":
        x, y = pts[:, 0], pts[:, 1]
        vals = np.stack([1.0 - x - y, x, y], axis=1)
        g = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
        grads = np.broadcast_to(g, (len(pts), 3, 2)).copy()
        return vals, grads
    if kind == "Quad":
        lx, dlx = _lagrange_1d(degree, pts[:, 0])
        ly, dly = _lagrange_1d(degree, pts[:, 1])
        vals = (ly[:, :, None] * lx[:, None, :]).reshape(len(pts), -1)
        gx = (ly[:, :, None] * dlx[:, None, :]).reshape(len(pts), -1)
        gy = (dly[:, :, None] * lx[:, None, :]).reshape(len(pts), -1)
        return vals, np.stack([gx, gy], axis=2)
    raise InvalidParameterError(f"unknown cell kind {kind!r}")


class CellGeometry:
    """Batched geometry maps for a list of cells of one mesh."""

    def __init__(self, mesh, cell_ids=None):
        if cell_ids is None:
            cell_ids = range(len(mesh.cells))
        self.cell_ids = list(cell_ids)
        cells = [mesh.cells[c] for c in self.cell_ids]
        if not cells:
            raise InvalidParameterError("empty cell selection")
        self.kind = cells[0].kind
        self.degree = 1 if self.kind == "Triangle" else mesh.geom_degree
        self.nodes = np.array([mesh.points[list(c.geom_node_ids)] for c in cells])

    def map_points(self, ref_pts):
        vals, _ = shape_functions(self.kind, self.degree, ref_pts)
        return np.einsum("qn,cnd->cqd", vals, self.nodes)

    def jacobians(self, ref_pts):
        """Returns (J (nc, nq, 2, 2), det (nc, nq)); raises if det <= 0."""
        _, grads = shape_functions(self.kind, self.degree, ref_pts)
        J = np.einsum("qnb,cna->cqab", grads, self.nodes)
        det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        if np.any(det <= 0.0):
            bad = int(np.argwhere(det <= 0.0)[0][0])
            raise DegenerateCellError(
                f"non-positive Jacobian determinant in cell {self.cell_ids[bad]}"
            )
        return J, det


def piola_push(J, det, ref_values, ref_divergences):
    """Contravariant Piola push-forward.

    J, det: (..., 2, 2), (...); ref_values: (..., 2); ref_divergences: (...).
    Physical value = J v / det, physical divergence = div / det.
    """
    det = np.asarray(det, dtype=float)
    if np.any(det <= 0.0):
        raise DegenerateCellError("non-positive Jacobian determinant")
    vals = np.einsum("...ab,...b->...a", J, ref_values) / det[..., None]
    divs = np.asarray(ref_divergences, dtype=float) / det
    return vals, divs


def edge_ref_points(kind, edge, t):
    """Reference coordinates along local edge `edge` at parameters t in [0,1],
    traversed in the cell's CCW direction. Also returns the constant
    reference tangent dref/dt."""
    from .mesh import local_edges

    verts = REF_VERTICES[kind]
    a, b = local_edges(kind)[edge]
    t = np.asarray(t, dtype=float)
    pts = verts[a][None, :] + t[:, None] * (verts[b] - verts[a])[None, :]
    return pts, verts[b] - verts[a]


class FacetGeometry:
    """Batched facet parametrizations x_f(t) via the owner cell's map.

    Global facet direction is the owner's CCW edge direction; the scaled
    normal rot(x') = (x'_y, -x'_x) is the outward (global) normal times
    the arclength speed |x'|.
    """

    def __init__(self, mesh, facet_ids, t):
        self.facet_ids = list(facet_ids)
        self.t = np.asarray(t, dtype=float)
        facets = [mesh.facets[i] for i in self.facet_ids]
        owners = [f.owner for f in facets]
        kind = mesh.cells[owners[0]].kind
        nq = len(self.t)
        nf = len(facets)
        self.points = np.empty((nf, nq, 2))
        self.tangents = np.empty((nf, nq, 2))
        geom = CellGeometry(mesh, owners)
        # group facets by owner local edge so the reference points can be
        # tabulated once per edge
        by_edge = {}
        for i, f in enumerate(facets):
            by_edge.setdefault(f.owner_edge, []).append(i)
        for edge, idx in by_edge.items():
            ref_pts, dref = edge_ref_points(kind, edge, self.t)
            sub = CellGeometry(mesh, [owners[i] for i in idx])
            self.points[idx] = sub.map_points(ref_pts)
            J, _ = sub.jacobians(ref_pts)
            self.tangents[idx] = np.einsum("cqab,b->cqa", J, dref)

    @property
    def scaled_normals(self):
        """Outward normal times |x'(t)| (the flux measure)."""
        tx, ty = self.tangents[..., 0], self.tangents[..., 1]
        return np.stack([ty, -tx], axis=-1)

    @property
    def speeds(self):
        return np.linalg.norm(self.tangents, axis=-1)

    def length(self, weights):
        """Arclengths of the facets for a [0,1] rule with `weights`."""
        return self.speeds @ weights
