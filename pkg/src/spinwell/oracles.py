"""Brute-force reference computations.

These deliberately avoid the fast kernels of :mod:`spinwell.spectral`: basis
functions are evaluated with explicit ``cos``/``sin`` at every node, products
are re-projected on a grid with twice as many nodes per axis, and cross
products use :func:`numpy.cross`.  Only the basis *definitions* (lengths, mode
counts, wave vectors, node placement of ``D`` inside ``T``) are shared.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DenseH",
    "dense_h",
    "DenseCoupling",
    "dense_coupling",
    "oracle_maxwell",
    "oracle_dense_projection",
    "oracle_energy",
    "oracle_effective_field",
    "oracle_drift",
    "oracle_fd_gradient",
    "oracle_fd_hessian",
    "oracle_fd_directional",
    "precession_exact",
    "precession_period",
]


def _xcross(a, b):
    return np.cross(a, b, axis=-4)


@dataclass(frozen=True)
class DenseH:
    """Explicit cosine tables for ``H_n`` on a midpoint grid of ``N`` nodes per axis."""

    lengths: tuple
    modes: tuple
    nodes: tuple
    tables: tuple
    dtables: tuple
    weight: float

    def synth(self, c):
        return np.einsum("ia,jb,kc,...abc->...ijk", *self.tables, c, optimize=True)

    def grad(self, c):
        t, d = self.tables, self.dtables
        return np.stack(
            (
                np.einsum("ia,jb,kc,...abc->...ijk", d[0], t[1], t[2], c, optimize=True),
                np.einsum("ia,jb,kc,...abc->...ijk", t[0], d[1], t[2], c, optimize=True),
                np.einsum("ia,jb,kc,...abc->...ijk", t[0], t[1], d[2], c, optimize=True),
            )
        )

    def project(self, f):
        return self.weight * np.einsum("ia,jb,kc,...ijk->...abc", *self.tables, f, optimize=True)

    def integrate(self, f):
        return self.weight * float(np.sum(f))


def dense_h(basis, factor=2):
    """Dense tables for ``basis`` on a midpoint grid with ``factor`` times the nodes."""
    tables, dtables, nodes = [], [], []
    w = 1.0
    for L, n, N in zip(basis.box_lengths, basis.modes_per_axis, basis.quad_nodes_per_axis):
        M = factor * N
        x = (np.arange(M) + 0.5) * L / M
        k = np.arange(n)
        norm = np.where(k == 0, np.sqrt(1.0 / L), np.sqrt(2.0 / L))
        arg = np.pi * np.outer(x, k) / L
        tables.append(norm * np.cos(arg))
        dtables.append(-norm * (np.pi * k / L) * np.sin(arg))
        nodes.append(x)
        w *= L / M
    return DenseH(basis.box_lengths, basis.modes_per_axis, tuple(nodes), tuple(tables), tuple(dtables), w)


@dataclass(frozen=True)
class DenseCoupling:
    """Dense matrices of the ``H_n``/``Y_n`` coupling, by Gauss-Legendre quadrature on ``D``.

    ``C[k, j]`` is ``int_D y_k e_j`` (``j`` runs over flattened cosine modes)
    and ``G[k, l]`` is ``int_D y_k y_l``.  The integrands are entire, so a
    modest number of Legendre nodes integrates them to rounding error.
    """

    C: np.ndarray
    G: np.ndarray
    modes: tuple

    def extension(self, m):
        """``pi^Y Mbar`` for ``H_n`` coefficients ``m``."""
        return m.reshape(3, -1) @ self.C.T

    def restrict(self, c_y):
        """``pi_n[1_D u]`` for ``Y_n`` coefficients."""
        return (c_y @ self.C).reshape((3,) + self.modes)

    def indicator(self, c_y):
        return c_y @ self.G


def dense_coupling(bases, nq=None):
    """Build :class:`DenseCoupling`; only practical for small ``Y_n`` (``K <= 4``)."""
    y, hb = bases.y, bases.h
    if nq is None:
        nq = 8 + 2 * max(max(y.modes_per_axis) * 2, max(hb.modes_per_axis))
    xs, ws, tabs = [], [], []
    for i in range(3):
        L = hb.box_lengths[i]
        t, w = np.polynomial.legendre.leggauss(nq)
        x = 0.5 * L * (t + 1.0)
        xs.append(x)
        ws.append(0.5 * L * w)
        k = np.arange(hb.modes_per_axis[i])
        norm = np.where(k == 0, np.sqrt(1.0 / L), np.sqrt(2.0 / L))
        tabs.append(norm * np.cos(np.pi * np.outer(x, k) / L))
    # torus coordinates of the box: left edge at (offset - 1/2) h
    shift = np.array([(o - 0.5) * h for o, h in zip(bases.offset, y.spacing)])
    X = np.stack(np.meshgrid(*xs, indexing="ij")) + shift[:, None, None, None]
    W = np.einsum("i,j,k->ijk", *ws)
    phase = np.einsum("pi,ixyz->pxyz", y.wave_vectors[1 : 1 + y.n_half], X)
    c = np.sqrt(2.0 / y.volume)
    Y = np.concatenate(
        (np.full((1,) + X.shape[1:], 1.0 / np.sqrt(y.volume)), c * np.cos(phase), c * np.sin(phase))
    )
    YW = Y * W
    C = np.einsum("pxyz,xa,yb,zc->pabc", YW, *tabs, optimize=True).reshape(len(Y), -1)
    G = np.einsum("pxyz,qxyz->pq", YW, Y, optimize=True)
    return DenseCoupling(C, G, hb.modes_per_axis)


def oracle_dense_projection(f_of_x, basis, factor=2):
    """``pi_n f`` for a callable ``f(X) -> (3, ...)`` by dense quadrature at ``factor`` x resolution."""
    d = dense_h(basis, factor)
    X = np.stack(np.meshgrid(*d.nodes, indexing="ij"))
    return d.project(f_of_x(X))


def oracle_energy(state, bases, phi, factor=2, coupling=None):
    """Energy parts with exchange from explicit gradients and products on a finer grid."""
    cp = coupling or dense_coupling(bases)
    pm = cp.extension(state.m)
    d = dense_h(bases.h, factor)
    M = d.synth(state.m)
    G = d.grad(state.m)
    return {
        "anisotropy": d.integrate(phi.value(M)),
        "exchange": 0.5 * d.integrate(G * G),
        "zeeman": 0.5 * float(np.sum((state.b - pm) ** 2)),
        "electric": 0.5 * float(np.sum(state.e**2)),
    }


def oracle_effective_field(state, bases, phi, maxwell=True, factor=2, coupling=None):
    """``rho_n`` with the anisotropy term re-projected at ``factor`` x and dense coupling matrices."""
    d = dense_h(bases.h, factor)
    M = d.synth(state.m)
    rho = -d.project(phi.grad(M))
    if maxwell:
        cp = coupling or dense_coupling(bases)
        rho = rho + cp.restrict(state.b - cp.extension(state.m))
    lam = sum(
        np.meshgrid(
            *[(np.pi * np.arange(n) / L) ** 2 for L, n in zip(bases.h.box_lengths, bases.h.modes_per_axis)],
            indexing="ij",
        )
    )
    return rho - lam * state.m


def oracle_maxwell(state, bases, induction_sign=-1.0, forcing=None, coupling=None):
    """``(de, db)`` from dense coupling matrices and an explicit curl ``i k x``."""
    cp = coupling or dense_coupling(bases)
    y = bases.y
    P = y.n_half
    k = y.wave_vectors[1 : 1 + P]

    def curl(c):
        a, b = c[:, 1 : 1 + P], c[:, 1 + P :]
        out = np.zeros_like(c)
        # curl(a cos(k.x)) = -k x a sin(k.x);  curl(b sin(k.x)) = k x b cos(k.x)
        out[:, 1 + P :] = -np.cross(k, a.T).T
        out[:, 1 : 1 + P] = np.cross(k, b.T).T
        return out

    u = state.b - cp.extension(state.m)
    de = -cp.indicator(state.e) + curl(u)
    if forcing is not None:
        de = de - cp.extension(forcing)
    return de, induction_sign * curl(state.e)


def oracle_drift(state, system, factor=2, coupling=None):
    """Stratonovich drift, diffusions and the chain-rule Ito correction at ``factor`` x resolution.

    Valid where ``psi = 1`` and ``grad psi = 0`` on the fine grid (``|M| < 3``),
    so every product is a trigonometric polynomial re-projected exactly.
    Returns ``(f_strat, g, correction)``.
    """
    bases = system.bases
    l1, l2 = system.lambda1, system.lambda2
    d = dense_h(bases.h, factor)
    rho = oracle_effective_field(state, bases, system.phi, system.maxwell, factor, coupling)
    M = d.synth(state.m)
    if np.max(np.linalg.norm(M, axis=0)) >= 3.0:
        raise ValueError("oracle_drift needs |M| < 3 on the fine grid")
    R = d.synth(rho)
    mxr = _xcross(M, R)
    f = d.project(l1 * mxr - l2 * _xcross(M, mxr))
    H = d.synth(system.noise.coeffs)
    g = d.project(l1 * _xcross(M[None], H) + l2 * _xcross(M[None], _xcross(M[None], H)))
    V = d.synth(g)
    dG = l1 * _xcross(V, H) + l2 * (_xcross(V, _xcross(M[None], H)) + _xcross(M[None], _xcross(V, H)))
    corr = 0.5 * d.project(np.sum(dG, axis=0))
    return f, g, corr


def oracle_fd_gradient(fun, x, direction, h=1e-5):
    """Central difference ``(fun(x + h d) - fun(x - h d)) / 2h``."""
    return (fun(x + h * direction) - fun(x - h * direction)) / (2.0 * h)


def oracle_fd_directional(fun, x, direction, h=1e-5):
    """Central difference of an array-valued map along ``direction``."""
    return (np.asarray(fun(x + h * direction)) - np.asarray(fun(x - h * direction))) / (2.0 * h)


def oracle_fd_hessian(fun, x, u, v, h=1e-4):
    """Mixed central difference for ``D^2 fun(x)(u, v)``."""
    return (
        fun(x + h * u + h * v) - fun(x + h * u - h * v) - fun(x - h * u + h * v) + fun(x - h * u - h * v)
    ) / (4.0 * h * h)


def precession_exact(m0, axis, strength, lambda1, t):
    """Closed-form solution of ``m' = 2 K l1 (m.a) m x a`` (constant mode, no damping).

    ``m.a`` is conserved, so ``m`` rotates about ``a`` with angular velocity
    ``-2 K l1 (m.a)``.
    """
    m0 = np.asarray(m0, dtype=float)
    a = np.asarray(axis, dtype=float)
    w = -2.0 * strength * lambda1 * float(m0 @ a)
    th = w * np.asarray(t, dtype=float)[..., None]
    par = (m0 @ a) * a
    perp = m0 - par
    return par + np.cos(th) * perp + np.sin(th) * np.cross(a, perp)


def precession_period(m0, axis, strength, lambda1):
    w = abs(2.0 * strength * lambda1 * float(np.asarray(m0) @ np.asarray(axis)))
    return np.inf if w == 0 else 2.0 * np.pi / w
