"""Structured mesh families, facet topology and boundary classification.

Four families are provided: unit-square triangles (uniform same-diagonal
split), unit-square quads, a structured polar triangulation of the unit
disk, and an n x n polar grid of the quarter annulus (optionally with
biquadratic geometry nodes placed on the exact polar image).

A built mesh is immutable apart from facet labels, which are assigned by
`classify_facets`. Facet orientation convention: the owner cell (the one
with the smaller id) defines the facet's global direction (its own CCW
edge direction) and global normal (its outward normal).
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InvalidParameterError

INTERIOR = "Interior"
NEUMANN = "NeumannBdry"
DIRICHLET = "DirichletBdry"

DEFAULT_SIGMA_MAX = 10.0


@dataclass(frozen=True)
class Cell:
    kind: str  # "Triangle" or "Quad"
    vertex_ids: tuple  # CCW
    geom_node_ids: tuple  # tensor-ordered Lagrange nodes (quads) or vertices


@dataclass
class Facet:
    vertex_ids: tuple  # in the owner cell's CCW edge direction
    owner: int
    owner_edge: int
    neighbor: int | None = None
    neighbor_edge: int | None = None
    label: str = NEUMANN

    @property
    def is_boundary(self):
        return self.neighbor is None


@dataclass
class Mesh:
    points: np.ndarray  # (n_points, 2)
    cells: list
    facets: list
    geom_degree: int
    h_max: float
    h_min: float
    shape_regularity: float  # max_K h_K / rho_K
    family: str = ""
    cell_facets: list = field(default_factory=list)  # per cell: facet id per local edge

    @property
    def interior_facets(self):
        return [i for i, f in enumerate(self.facets) if not f.is_boundary]

    @property
    def boundary_facets(self):
        return [i for i, f in enumerate(self.facets) if f.is_boundary]

    @property
    def pure_neumann(self):
        return all(f.label != DIRICHLET for f in self.facets if f.is_boundary)

    def facets_with_label(self, label):
        return [i for i, f in enumerate(self.facets) if f.label == label]


def local_edges(kind):
    if kind == "Triangle":
        return ((0, 1), (1, 2), (2, 0))
    if kind == "Quad":
        return ((0, 1), (1, 2), (2, 3), (3, 0))
    raise InvalidParameterError(f"unknown cell kind {kind!r}")


def _build_facets(cells):
    facets = []
    cell_facets = []
    by_key = {}
    for cid, cell in enumerate(cells):
        ids = []
        for eid, (a, b) in enumerate(local_edges(cell.kind)):
            va, vb = cell.vertex_ids[a], cell.vertex_ids[b]
            key = (min(va, vb), max(va, vb))
            if key in by_key:
                fid = by_key[key]
                f = facets[fid]
                if f.neighbor is not None:
                    raise ConfigurationError(f"facet {key} shared by more than two cells")
                f.neighbor = cid
                f.neighbor_edge = eid
                f.label = INTERIOR
            else:
                fid = len(facets)
                by_key[key] = fid
                facets.append(Facet(vertex_ids=(va, vb), owner=cid, owner_edge=eid))
            ids.append(fid)
        cell_facets.append(tuple(ids))
    return facets, cell_facets


def _cross2(a, b):
    return a[0] * b[1] - a[1] * b[0]


def _tri_quality(pts):
    a = np.linalg.norm(pts[1] - pts[0])
    b = np.linalg.norm(pts[2] - pts[1])
    c = np.linalg.norm(pts[0] - pts[2])
    area = 0.5 * abs(_cross2(pts[1] - pts[0], pts[2] - pts[0]))
    h = max(a, b, c)
    rho = 2.0 * area / (a + b + c)
    return h, rho


def _quad_quality(pts):
    # rho is approximated by 2*area/perimeter (exact for rectangles'
    # ratio check up to a bounded constant).
    per = sum(np.linalg.norm(pts[(i + 1) % 4] - pts[i]) for i in range(4))
    area = 0.5 * abs(
        _cross2(pts[2] - pts[0], pts[3] - pts[1])
    )
    h = max(np.linalg.norm(pts[i] - pts[j]) for i in range(4) for j in range(i))
    rho = 2.0 * area / per
    return h, rho


def _finalize(points, cells, geom_degree, family, sigma_max=DEFAULT_SIGMA_MAX):
    points = np.asarray(points, dtype=float)
    if not np.all(np.isfinite(points)):
        raise ConfigurationError("mesh points contain NaN/Inf")
    facets, cell_facets = _build_facets(cells)
    h_max, h_min, sigma = 0.0, math.inf, 0.0
    for cell in cells:
        pts = points[list(cell.vertex_ids)]
        h, rho = _tri_quality(pts) if cell.kind == "Triangle" else _quad_quality(pts)
        h_max, h_min = max(h_max, h), min(h_min, h)
        sigma = max(sigma, h / rho)
    if sigma > sigma_max:
        warnings.warn(
            f"mesh family {family!r}: shape regularity {sigma:.2f} exceeds {sigma_max}",
            stacklevel=3,
        )
    return Mesh(
        points=points,
        cells=cells,
        facets=facets,
        geom_degree=geom_degree,
        h_max=h_max,
        h_min=h_min,
        shape_regularity=sigma,
        family=family,
        cell_facets=cell_facets,
    )


def build_unit_square_tri(n):
    """Uniform triangulation of (0,1)^2: each grid square split along the
    (i,j)->(i+1,j+1) diagonal."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    xs = np.linspace(0.0, 1.0, n + 1)
    pts = np.array([[x, y] for y in xs for x in xs])
    vid = lambda i, j: j * (n + 1) + i
    cells = []
    for j in range(n):
        for i in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            cells.append(Cell("Triangle", (v00, v10, v11), (v00, v10, v11)))
            cells.append(Cell("Triangle", (v00, v11, v01), (v00, v11, v01)))
    return _finalize(pts, cells, 1, "unit_square_tri")


def build_unit_square_quad(n):
    """Axis-aligned n x n quad mesh of (0,1)^2."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    xs = np.linspace(0.0, 1.0, n + 1)
    pts = np.array([[x, y] for y in xs for x in xs])
    vid = lambda i, j: j * (n + 1) + i
    cells = []
    for j in range(n):
        for i in range(n):
            v = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1))
            # geometry nodes in tensor order (x fastest)
            g = (v[0], v[1], v[3], v[2])
            cells.append(Cell("Quad", v, g))
    return _finalize(pts, cells, 1, "unit_square_quad")


def _strip_triangles(inner, outer):
    """CCW triangles filling the strip between two concentric point rows.

    `inner` / `outer` are global vertex id lists traversed CCW; `inner`
    may be a single point (disk center).
    """
    tris = []
    if len(inner) == 1:
        c = inner[0]
        for j in range(len(outer) - 1):
            tris.append((outer[j], outer[j + 1], c))
        return tris
    a, b = len(inner), len(outer)
    i = j = 0
    while i < a - 1 or j < b - 1:
        ti = (i + 1) / (a - 1) if i < a - 1 else math.inf
        tj = (j + 1) / (b - 1) if j < b - 1 else math.inf
        if tj <= ti:
            tris.append((outer[j], outer[j + 1], inner[i]))
            j += 1
        else:
            tris.append((inner[i], outer[j], inner[i + 1]))
            i += 1
    return tris


def build_unit_circle_tri(level):
    """Structured polar triangulation of the unit disk.

    Ring m (m = 1..M, M = 2^level) holds 8m vertices at radius m/M; the
    outermost ring lies exactly on the unit circle.
    """
    if level < 0:
        raise InvalidParameterError("level must be >= 0")
    M = 2 ** level
    pts = [(0.0, 0.0)]
    rings = [[0]]
    for m in range(1, M + 1):
        r = m / M
        ring = []
        for j in range(8 * m):
            th = 2.0 * math.pi * j / (8 * m)
            ring.append(len(pts))
            pts.append((r * math.cos(th), r * math.sin(th)))
        rings.append(ring)
    cells = []
    for m in range(M):
        inner, outer = rings[m], rings[m + 1]
        for o in range(8):
            if m == 0:
                inn = inner
                out = [outer[(o + s) % 8] for s in range(2)]
            else:
                inn = [inner[(o * m + s) % (8 * m)] for s in range(m + 1)]
                out = [outer[(o * (m + 1) + s) % (8 * (m + 1))] for s in range(m + 2)]
            for tri in _strip_triangles(inn, out):
                cells.append(Cell("Triangle", tri, tri))
    return _finalize(pts, cells, 1, "unit_circle_tri")


def build_quarter_annulus_quad(n, geom_degree=2):
    """Quarter annulus (radii 1 and 2) on an n x n polar grid.

    With geom_degree = 2 the 3 x 3 Lagrange nodes of each cell sit on the
    exact polar image, giving isoparametric curved boundaries.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1")
    if geom_degree not in (1, 2):
        raise InvalidParameterError("geom_degree must be 1 or 2")
    g = geom_degree
    # nodes on the (g n + 1)^2 refined polar grid
    N = g * n
    pts = []
    nid = {}
    for b in range(N + 1):
        for a in range(N + 1):
            r = 1.0 + a / N
            th = (math.pi / 2.0) * b / N
            nid[(a, b)] = len(pts)
            pts.append((r * math.cos(th), r * math.sin(th)))
    cells = []
    for j in range(n):
        for i in range(n):
            corner = lambda a, b: nid[(g * (i + a), g * (j + b))]
            v = (corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1))
            geom = tuple(
                nid[(g * i + a, g * j + b)] for b in range(g + 1) for a in range(g + 1)
            )
            cells.append(Cell("Quad", v, geom))
    if g == 1:
        # drop unused-node bookkeeping: every node is a vertex already
        pass
    return _finalize(pts, cells, g, "quarter_annulus_quad")


def classify_facets(mesh, bc_spec):
    """Label every boundary facet via `bc_spec(x, y) -> 'neumann'|'dirichlet'`
    evaluated at the facet chord midpoint. Returns the mesh."""
    labels = {"neumann": NEUMANN, "dirichlet": DIRICHLET}
    for f in mesh.facets:
        if not f.is_boundary:
            continue
        mid = mesh.points[list(f.vertex_ids)].mean(axis=0)
        raw = bc_spec(mid[0], mid[1])
        if raw not in labels:
            raise ConfigurationError(
                f"boundary facet at {tuple(mid)} got unsupported label {raw!r}"
            )
        f.label = labels[raw]
    return mesh


def write_mesh(mesh, path):
    """Plain-text dump with POINTS / CELLS / FACETS sections."""
    with open(path, "w") as fh:
        fh.write("POINTS\n")
        for p in mesh.points:
            fh.write(f"{p[0]!r} {p[1]!r}\n")
        fh.write("CELLS\n")
        for c in mesh.cells:
            ids = " ".join(map(str, c.vertex_ids))
            fh.write(f"{c.kind} {ids}\n")
        fh.write("FACETS\n")
        for f in mesh.facets:
            nb = -1 if f.neighbor is None else f.neighbor
            fh.write(f"{f.vertex_ids[0]} {f.vertex_ids[1]} {f.owner} {nb} {f.label}\n")
