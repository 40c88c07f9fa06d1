"""Structured triangular meshes of rectangles with Neumann or periodic sides."""
from dataclasses import dataclass, field

import numpy as np

INTERIOR = "interior"
BOUNDARY = "boundary"
PERIODIC = "periodic"

BC_KINDS = ("neumann", "periodic")


@dataclass(frozen=True)
class Edge:
    endpoints: tuple
    h: float
    normal: np.ndarray
    element: tuple
    neighbor: tuple | None
    kind: str
    shift: np.ndarray


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation.

    Edge data are stored as parallel arrays.  ``edge_tri[e] = (K, Ke)`` with
    ``Ke = -1`` on boundary edges; the edge endpoints follow the
    counterclockwise orientation of ``K`` so ``edge_normal`` points out of K.
    ``edge_shift`` translates a point of the edge as seen from K to the same
    point as seen from Ke (nonzero only for periodic pairs).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    bc_kind: str
    domain: tuple
    edge_vertices: np.ndarray
    edge_tri: np.ndarray
    edge_local: np.ndarray
    edge_kind: np.ndarray
    edge_shift: np.ndarray
    shape: tuple = (0, 0)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edge_vertices)

    @property
    def area(self):
        x0, x1, y0, y1 = self.domain
        return (x1 - x0) * (y1 - y0)

    def triangle_areas(self):
        v = self.vertices[self.triangles]
        d1 = v[:, 1] - v[:, 0]
        d2 = v[:, 2] - v[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def edge_vector(self):
        p = self.vertices[self.edge_vertices]
        return p[:, 1] - p[:, 0]

    @property
    def edge_length(self):
        return np.hypot(*self.edge_vector.T)

    @property
    def edge_normal(self):
        d = self.edge_vector
        return np.column_stack([d[:, 1], -d[:, 0]]) / self.edge_length[:, None]

    def coupled_edges(self):
        """Indices of edges that carry two traces (interior and periodic)."""
        return np.flatnonzero(self.edge_tri[:, 1] >= 0)

    def boundary_edges(self):
        return np.flatnonzero(self.edge_tri[:, 1] < 0)

    def edge(self, e: int) -> Edge:
        if not 0 <= e < self.n_edges:
            raise IndexError(f"edge id {e} out of range [0, {self.n_edges})")
        K, Ke = (int(t) for t in self.edge_tri[e])
        lK, lKe = (int(t) for t in self.edge_local[e])
        return Edge(
            endpoints=tuple(int(v) for v in self.edge_vertices[e]),
            h=float(self.edge_length[e]),
            normal=self.edge_normal[e],
            element=(K, lK),
            neighbor=(Ke, lKe) if Ke >= 0 else None,
            kind=str(self.edge_kind[e]),
            shift=self.edge_shift[e],
        )

    @property
    def edges(self):
        return [self.edge(e) for e in range(self.n_edges)]


def edge_geometry(mesh: Mesh, edge_id: int):
    """Return ``(h_E, normal, (K, Ke), (normal_K, normal_Ke))``.

    ``normal_Ke`` is None on boundary edges.
    """
    edge = mesh.edge(edge_id)
    K = edge.element[0]
    Ke = edge.neighbor[0] if edge.neighbor else None
    n = edge.normal
    return edge.h, n, (K, Ke), (n, -n if Ke is not None else None)


def build_rect_mesh(domain, nx: int, ny: int, bc_kind: str = "neumann") -> Mesh:
    """Uniform ``nx`` x ``ny`` grid, each cell cut along its SW-NE diagonal."""
    x0, x1, y0, y1 = (float(v) for v in domain)
    if nx < 1 or ny < 1:
        raise ValueError(f"cell counts must be >= 1, got nx={nx}, ny={ny}")
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate domain {domain}")
    if bc_kind not in BC_KINDS:
        raise ValueError(f"unknown bc_kind {bc_kind!r}; expected one of {BC_KINDS}")

    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (nx + 1) + i

    tris = []
    for j in range(ny):
        for i in range(nx):
            v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    triangles = np.array(tris, dtype=np.int64)

    # local edge k joins local vertices k and k+1
    owners = {}
    order = []
    for t, tri in enumerate(triangles):
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            key = (min(a, b), max(a, b))
            if key not in owners:
                owners[key] = []
                order.append(key)
            owners[key].append((t, k, a, b))

    ev, et, el, kind, shift = [], [], [], [], []
    dangling = []
    for key in order:
        sides = owners[key]
        t, k, a, b = sides[0]
        if len(sides) == 2:
            ev.append((a, b))
            et.append((t, sides[1][0]))
            el.append((k, sides[1][1]))
            kind.append(INTERIOR)
            shift.append((0.0, 0.0))
        elif bc_kind == "neumann":
            ev.append((a, b))
            et.append((t, -1))
            el.append((k, -1))
            kind.append(BOUNDARY)
            shift.append((0.0, 0.0))
        else:
            dangling.append(sides[0])

    if dangling:
        _pair_periodic(vertices, dangling, (x0, x1, y0, y1), ev, et, el, kind, shift)

    return Mesh(
        vertices=vertices,
        triangles=triangles,
        bc_kind=bc_kind,
        domain=(x0, x1, y0, y1),
        edge_vertices=np.array(ev, dtype=np.int64),
        edge_tri=np.array(et, dtype=np.int64),
        edge_local=np.array(el, dtype=np.int64),
        edge_kind=np.array(kind),
        edge_shift=np.array(shift, dtype=float),
        shape=(nx, ny),
    )


def _pair_periodic(vertices, dangling, domain, ev, et, el, kind, shift):
    x0, x1, y0, y1 = domain
    tol = 1e-12 * max(x1 - x0, y1 - y0)
    faces = {"left": [], "right": [], "bottom": [], "top": []}
    for side in dangling:
        t, k, a, b = side
        mid = 0.5 * (vertices[a] + vertices[b])
        if abs(mid[0] - x0) <= tol:
            faces["left"].append((mid[1], side))
        elif abs(mid[0] - x1) <= tol:
            faces["right"].append((mid[1], side))
        elif abs(mid[1] - y0) <= tol:
            faces["bottom"].append((mid[0], side))
        elif abs(mid[1] - y1) <= tol:
            faces["top"].append((mid[0], side))
        else:
            raise ValueError(f"unmatched edge {a}-{b} away from domain boundary")

    for lo, hi, offset in (("left", "right", (x1 - x0, 0.0)), ("bottom", "top", (0.0, y1 - y0))):
        first = sorted(faces[lo], key=lambda s: s[0])
        second = sorted(faces[hi], key=lambda s: s[0])
        if len(first) != len(second):
            raise ValueError(f"cannot pair {lo}/{hi} faces: {len(first)} vs {len(second)} edges")
        for (c1, s1), (c2, s2) in zip(first, second):
            if abs(c1 - c2) > tol:
                raise ValueError(f"periodic faces {lo}/{hi} do not match at {c1} vs {c2}")
            t, k, a, b = s1
            ev.append((a, b))
            et.append((t, s2[0]))
            el.append((k, s2[1]))
            kind.append(PERIODIC)
            shift.append(offset)
