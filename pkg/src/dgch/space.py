"""Discontinuous piecewise-polynomial space on a triangular mesh."""
import numpy as np

from .basis import local_dimension, reference_basis
from .mesh import Mesh
from .quadrature import edge_quadrature, triangle_quadrature


class DgSpace:
    """Broken P^q space with an orthonormal modal basis on every triangle.

    Degrees of freedom are numbered element by element: the coefficient of
    local basis function ``j`` on triangle ``K`` sits at ``K * n_q + j``.

    Parameters
    ----------
    mesh : Mesh
    q : int
        Polynomial degree, 1 to 3.
    sigma : float, optional
        Interior penalty parameter, default ``3 q (q + 1)``.
    volume_degree : int, optional
        Exactness of the volume rule used for every state-dependent volume
        integral (nonlinear vector, mobility, energy).  Default ``4 q``.
    edge_degree : int, optional
        Exactness of the edge rule, default ``2 q + 1``.
    """

    def __init__(self, mesh: Mesh, q: int, sigma=None, volume_degree=None, edge_degree=None):
        self.mesh = mesh
        self._cache = {}
        self.q = q
        self.basis = reference_basis(q)
        self.n_q = local_dimension(q)
        self.N = mesh.n_triangles
        self.sigma = float(3 * q * (q + 1) if sigma is None else sigma)
        self.volume_degree = int(volume_degree if volume_degree is not None else max(2 * q + 2, 4 * q))
        self.edge_degree = int(edge_degree if edge_degree is not None else 2 * q + 1)

        verts = mesh.vertices[mesh.triangles]
        self.v0 = verts[:, 0]
        self.B = np.stack([verts[:, 1] - verts[:, 0], verts[:, 2] - verts[:, 0]], axis=-1)
        self.detJ = np.linalg.det(self.B)
        if np.any(self.detJ <= 0):
            raise ValueError("mesh contains triangles with non-positive orientation")
        self.invB = np.linalg.inv(self.B)

        self.vol_rule = triangle_quadrature(self.volume_degree)
        self.phi_vol = self.basis.values(self.vol_rule.points)
        self.dphi_vol = self._physical_gradients(self.basis.gradients(self.vol_rule.points))
        self.x_vol = self.map_points(self.vol_rule.points)

        self._build_edge_tables()

    @property
    def ndof(self):
        return self.n_q * self.N

    # -- geometry -----------------------------------------------------------

    def map_points(self, ref_pts, elements=None):
        """Physical images of reference points, shape (n_elem, n_pts, 2)."""
        idx = slice(None) if elements is None else elements
        return self.v0[idx, None, :] + np.einsum("kab,pb->kpa", self.B[idx], np.atleast_2d(ref_pts))

    def _physical_gradients(self, dref, elements=None):
        idx = slice(None) if elements is None else elements
        return np.einsum("kba,pjb->kpja", self.invB[idx], dref)

    def _to_reference(self, x, elements):
        return np.einsum("kab,kpb->kpa", self.invB[elements], x - self.v0[elements, None, :])

    def _build_edge_tables(self):
        mesh = self.mesh
        rule = edge_quadrature(self.edge_degree)
        self.edge_rule = rule
        ce = mesh.coupled_edges()
        self.edge_ids = ce
        self.edge_K = mesh.edge_tri[ce, 0]
        self.edge_Ke = mesh.edge_tri[ce, 1]
        self.edge_h = mesh.edge_length[ce]
        self.edge_n = mesh.edge_normal[ce]
        # physical weights include the edge length
        self.edge_w = rule.weights[None, :] * self.edge_h[:, None]

        p = mesh.vertices[mesh.edge_vertices[ce]]
        s = rule.points
        x = p[:, None, 0, :] + s[None, :, None] * (p[:, None, 1, :] - p[:, None, 0, :])
        self.x_edge = x
        refA = self._to_reference(x, self.edge_K)
        refB = self._to_reference(x + mesh.edge_shift[ce][:, None, :], self.edge_Ke)
        self.phi_A, self.dn_A = self._edge_trace_tables(refA, self.edge_K)
        self.phi_B, self.dn_B = self._edge_trace_tables(refB, self.edge_Ke)

    def _edge_trace_tables(self, ref, elements):
        E, P, _ = ref.shape
        flat = ref.reshape(-1, 2)
        phi = self.basis.values(flat).reshape(E, P, self.n_q)
        dref = self.basis.gradients(flat).reshape(E, P, self.n_q, 2)
        grad = np.einsum("eba,epjb->epja", self.invB[elements], dref)
        dn = np.einsum("epja,ea->epj", grad, self.edge_n)
        return phi, dn

    # -- fields -------------------------------------------------------------

    def local(self, coeffs):
        """Reshape a global coefficient vector to (N, n_q)."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.ndof,):
            raise ValueError(f"coefficient vector has shape {coeffs.shape}, expected ({self.ndof},)")
        return coeffs.reshape(self.N, self.n_q)

    def volume_values(self, coeffs):
        """Field values at volume quadrature points, shape (N, n_pts)."""
        return self.local(coeffs) @ self.phi_vol.T

    def volume_gradients(self, coeffs):
        return np.einsum("kj,kpja->kpa", self.local(coeffs), self.dphi_vol)

    def edge_traces(self, coeffs):
        """Traces on coupled edges: (u_K, u_Ke, du/dn_K, du/dn_Ke).

        Normal derivatives use the normal pointing out of K for both sides,
        so the jump is (u_K - u_Ke) n and the normal-flux average is
        (dn_K + dn_Ke) / 2.
        """
        c = self.local(coeffs)
        cA = c[self.edge_K]
        cB = c[self.edge_Ke]
        return (
            np.einsum("epj,ej->ep", self.phi_A, cA),
            np.einsum("epj,ej->ep", self.phi_B, cB),
            np.einsum("epj,ej->ep", self.dn_A, cA),
            np.einsum("epj,ej->ep", self.dn_B, cB),
        )

    def tabulate(self, rule):
        """Basis values and physical points for a volume rule (cached per degree)."""
        key = ("tab", rule.exact_degree, rule.size)
        if key not in self._cache:
            self._cache[key] = (self.basis.values(rule.points), self.map_points(rule.points))
        return self._cache[key]

    def constant(self, c):
        """Coefficients of the constant field ``c``."""
        coeffs = np.zeros((self.N, self.n_q))
        coeffs[:, 0] = c / self.basis.values(np.array([[0.0, 0.0]]))[0, 0]
        return coeffs.ravel()


def eval_field(space: DgSpace, coeffs, triangle: int, ref_point):
    """Value and physical gradient of a DG field at a reference point of one triangle."""
    c = space.local(coeffs)[triangle]
    pt = np.atleast_2d(np.asarray(ref_point, dtype=float))
    value = space.basis.values(pt)[0] @ c
    dref = space.basis.gradients(pt)[0]
    grad = space.invB[triangle].T @ (dref.T @ c)
    return float(value), grad


def project_l2(space: DgSpace, func, degree=None):
    """Elementwise L2 projection of ``func(x, y)`` onto the DG space.

    With an orthonormal reference basis the local mass matrix is
    ``det J * I``, so each coefficient is a single quadrature sum.
    """
    rule = triangle_quadrature(degree if degree is not None else 2 * space.q + 4)
    phi, x = space.tabulate(rule)
    vals = np.broadcast_to(np.asarray(func(x[..., 0], x[..., 1]), dtype=float), x.shape[:2])
    return ((vals * rule.weights) @ phi).ravel()
