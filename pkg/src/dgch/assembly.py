"""Assembly of the SIPG operators and the nonlinear vectors.

All element and edge loops are vectorised with numpy; global matrices are
built in coordinate form (volume blocks first, then edge blocks) and summed
into CSR by scipy.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import MobilitySpec, PotentialSpec, mobility_eval, potential_eval
from .quadrature import triangle_quadrature
from .space import DgSpace


class AssemblyError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CoefficientField:
    """Diffusion coefficient of the SIPG form: a constant, or mu(u_h) for a DG state."""

    value: float = 1.0
    state: np.ndarray | None = None
    mobility: MobilitySpec | None = None

    @classmethod
    def lagged(cls, state, mobility):
        return cls(state=np.asarray(state, dtype=float), mobility=mobility)

    @property
    def is_constant(self):
        return self.state is None

    def volume_values(self, space: DgSpace):
        if self.is_constant:
            return np.full((space.N, space.vol_rule.size), float(self.value))
        return mobility_eval(self.mobility, space.volume_values(self.state))

    def edge_values(self, space: DgSpace):
        """Edge coefficient: average of the two trace evaluations."""
        if self.is_constant:
            return np.full(space.edge_w.shape, float(self.value))
        uA, uB, _, _ = space.edge_traces(self.state)
        return 0.5 * (mobility_eval(self.mobility, uA) + mobility_eval(self.mobility, uB))


def _block_indices(elem_rows, elem_cols, n):
    loc = np.arange(n)
    r = (elem_rows[:, None] * n + loc)[:, :, None]
    c = (elem_cols[:, None] * n + loc)[:, None, :]
    shape = (len(elem_rows), n, n)
    return np.broadcast_to(r, shape).ravel(), np.broadcast_to(c, shape).ravel()


def block_diagonal(space: DgSpace, blocks):
    """CSR matrix from per-element (N, n_q, n_q) blocks."""
    elems = np.arange(space.N)
    r, c = _block_indices(elems, elems, space.n_q)
    return sp.csr_matrix((blocks.ravel(), (r, c)), shape=(space.ndof, space.ndof))


def assemble_mass(space: DgSpace):
    """Mass matrix; with the orthonormal basis it is diag(det J_K) per block."""
    return sp.diags(np.repeat(space.detJ, space.n_q)).tocsr()


def assemble_stiffness(space: DgSpace, coefficient=1.0):
    """SIPG matrix A_ij = a_h(kappa; phi_j, phi_i) on interior and periodic edges."""
    if not isinstance(coefficient, CoefficientField):
        coefficient = CoefficientField(value=float(coefficient))
    n = space.n_q

    kv = coefficient.volume_values(space)
    bad = ~np.isfinite(kv)
    if bad.any():
        raise AssemblyError(f"non-finite coefficient on triangle {int(np.argwhere(bad)[0, 0])}")
    wv = kv * space.vol_rule.weights[None, :] * space.detJ[:, None]
    vol = np.einsum("kp,kpia,kpja->kij", wv, space.dphi_vol, space.dphi_vol)

    ke = coefficient.edge_values(space)
    bad = ~np.isfinite(ke)
    if bad.any():
        e = space.edge_ids[np.argwhere(bad)[0, 0]]
        raise AssemblyError(f"non-finite coefficient on edge {int(e)}")
    we = ke * space.edge_w
    pen = space.sigma / space.edge_h

    sides = ((space.edge_K, space.phi_A, space.dn_A, 1.0), (space.edge_Ke, space.phi_B, space.dn_B, -1.0))
    rows, cols, vals = [], [], []
    elems = np.arange(space.N)
    r, c = _block_indices(elems, elems, n)
    rows.append(r)
    cols.append(c)
    vals.append(vol.ravel())
    for Ka, phi_a, dn_a, sa in sides:
        for Kb, phi_b, dn_b, sb in sides:
            # test function from side a (index i), trial from side b (index j)
            blk = (
                -0.5 * sa * np.einsum("ep,epi,epj->eij", we, phi_a, dn_b)
                - 0.5 * sb * np.einsum("ep,epi,epj->eij", we, dn_a, phi_b)
                + sa * sb * np.einsum("ep,e,epi,epj->eij", we, pen, phi_a, phi_b)
            )
            r, c = _block_indices(Ka, Kb, n)
            rows.append(r)
            cols.append(c)
            vals.append(blk.ravel())
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(space.ndof, space.ndof),
    )


def _weighted(space):
    return space.vol_rule.weights[None, :] * space.detJ[:, None]


def assemble_nonlinear(space: DgSpace, xi, potential: PotentialSpec = PotentialSpec()):
    """b_i = (f(u_h), phi_i)."""
    vals = potential_eval(potential, space.volume_values(xi))
    return ((vals.f * _weighted(space)) @ space.phi_vol).ravel()


def nonlinear_jacobian(space: DgSpace, xi, potential: PotentialSpec = PotentialSpec()):
    vals = potential_eval(potential, space.volume_values(xi))
    blocks = np.einsum("kp,pi,pj->kij", vals.df * _weighted(space), space.phi_vol, space.phi_vol)
    return block_diagonal(space, blocks)


def gauss_tau(points):
    t, w = np.polynomial.legendre.leggauss(points)
    return 0.5 * (t + 1.0), 0.5 * w


def assemble_avf_nonlinear(space: DgSpace, xi_old, xi_new, potential: PotentialSpec = PotentialSpec(), tau_points=2):
    """Tau-averaged nonlinear vector and its Jacobian w.r.t. ``xi_new``.

    Returns ``(b_avg, J_b, clamped)`` with
    ``b_avg = sum_g w_g b(tau_g xi_new + (1 - tau_g) xi_old)`` and
    ``J_b = sum_g w_g tau_g b'(...)`` (Gauss-Legendre in tau).
    """
    u0 = space.volume_values(xi_old)
    u1 = space.volume_values(xi_new)
    taus, ws = gauss_tau(tau_points)
    f_avg = np.zeros_like(u0)
    df_avg = np.zeros_like(u0)
    clamped = 0
    for tau, w in zip(taus, ws):
        vals = potential_eval(potential, tau * u1 + (1.0 - tau) * u0)
        f_avg += w * vals.f
        df_avg += w * tau * vals.df
        clamped += vals.clamped
    wq = _weighted(space)
    b_avg = ((f_avg * wq) @ space.phi_vol).ravel()
    blocks = np.einsum("kp,pi,pj->kij", df_avg * wq, space.phi_vol, space.phi_vol)
    return b_avg, block_diagonal(space, blocks), clamped


def assemble_load(space: DgSpace, source, t, degree=None):
    """Load vector (g(., ., t), phi_i); ``source(x, y, t)`` or None for zero."""
    if source is None:
        return np.zeros(space.ndof)
    rule = triangle_quadrature(degree if degree is not None else 2 * space.q + 4)
    phi, x = space.tabulate(rule)
    g = np.broadcast_to(np.asarray(source(x[..., 0], x[..., 1], t), dtype=float), x.shape[:2])
    return ((g * rule.weights[None, :] * space.detJ[:, None]) @ phi).ravel()
