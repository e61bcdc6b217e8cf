"""Noise family, the truncation psi, diffusion maps and the Ito correction.

The diffusion of the Galerkin system is

    G_j(M) = l1 pi[M x h_j] + l2 pi[psi(M) M x (M x h_j)]

and its Stratonovich-to-Ito drift correction is ``1/2 sum_j G_j'(M)[G_j(M)]``.
Two versions of that correction are provided:

* :func:`ito_correction_galerkin`: the directional derivative of the
  projected map ``G_j`` along ``G_j`` (chain rule, including the ``grad psi``
  term).  This is what the Stratonovich system actually implies.
* :func:`ito_correction`: the five-term expression with a projection
  inside the first and last terms.  It coincides with the chain rule only up
  to projection error.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .spectral import MagnetizationBasis, cross, dot

__all__ = [
    "TruncationPsi",
    "NoiseFamily",
    "make_noise_family",
    "constant_noise_family",
    "c_h_constant",
    "diffusion_G",
    "diffusion_all",
    "diffusion_G_psi",
    "ito_correction",
    "ito_correction_galerkin",
    "ito_correction_unprojected",
]


@dataclass(frozen=True)
class TruncationPsi:
    """Radial quintic smoothstep: 1 for ``|x| <= 3``, 0 for ``|x| >= 5``.

    The radial slope peaks at ``15/16`` at ``|x| = 4``.
    """

    inner_radius: float = 3.0
    outer_radius: float = 5.0

    def _radial(self, r):
        w = self.outer_radius - self.inner_radius
        t = np.clip((r - self.inner_radius) / w, 0.0, 1.0)
        s = t * t * t * (t * (6.0 * t - 15.0) + 10.0)
        ds = 30.0 * t * t * (t - 1.0) ** 2
        return 1.0 - s, -ds / w

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return float(self._radial(np.linalg.norm(x))[0])
        return self._radial(np.sqrt(np.sum(x * x, axis=-4)))[0]

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            r = np.linalg.norm(x)
            _, d = self._radial(r)
            return d * x / r if r > 0 else np.zeros(3)
        r = np.sqrt(np.sum(x * x, axis=-4))
        _, d = self._radial(r)
        return (d / np.where(r > 0, r, 1.0)) * x


@dataclass(frozen=True, eq=False)
class NoiseFamily:
    """``J`` band-limited noise modes ``h_j = amplitudes[j] * modes[j]``.

    ``modes`` are coefficient arrays in ``H_n``; ``grid`` caches their samples
    on the quadrature grid of the basis the family was built for.
    """

    modes: np.ndarray
    amplitudes: np.ndarray
    grid: np.ndarray = field(repr=False)

    @property
    def J(self):
        return len(self.amplitudes)

    @property
    def coeffs(self):
        return self.amplitudes[:, None, None, None, None] * self.modes

    @cached_property
    def h_grid(self):
        return self.amplitudes[:, None, None, None, None] * self.grid

    def scaled(self, s):
        return NoiseFamily(self.modes, s * self.amplitudes, self.grid)

    def restricted(self, J):
        return NoiseFamily(self.modes[:J], self.amplitudes[:J], self.grid[:J])


def _unit_cosine_product(basis, k):
    """Coefficients of ``prod_i cos(pi k_i x_i / L_i)`` (sup norm 1) on mode ``k``."""
    scale = 1.0
    for ki, Li in zip(k, basis.box_lengths):
        scale *= np.sqrt(Li) if ki == 0 else np.sqrt(Li / 2.0)
    return scale


def make_noise_family(basis: MagnetizationBasis, J=8, amplitude=0.1, decay=2.0):
    """Low Laplacian eigenmodes, one vector direction each, scaled by ``j^-decay``.

    The scalar modes are taken in order of increasing eigenvalue and each is
    paired with the directions x, y, z in turn.  Mode fields have sup norm 1
    before the amplitude ``amplitude * j**-decay`` is applied.
    """
    if J < 0:
        raise ValueError("J must be nonnegative")
    n = basis.modes_per_axis
    ks = np.stack(np.meshgrid(*[np.arange(v) for v in n], indexing="ij"), -1).reshape(-1, 3)
    lam = basis.eigenvalues.reshape(-1)
    order = np.lexsort((ks[:, 0], ks[:, 1], ks[:, 2], lam))
    modes = np.zeros((J,) + basis.shape)
    picked = 0
    for idx in order:
        k = tuple(ks[idx])
        for comp in range(3):
            if picked == J:
                break
            modes[(picked, comp) + k] = _unit_cosine_product(basis, k)
            picked += 1
        if picked == J:
            break
    if picked < J:
        raise ValueError(f"basis has only {picked} vector modes, cannot build J={J}")
    amps = amplitude * np.arange(1, J + 1, dtype=float) ** (-decay)
    return NoiseFamily(modes, amps, basis.synthesize(modes))


def constant_noise_family(basis: MagnetizationBasis, vectors):
    """Spatially constant noise fields ``h_j(x) = vectors[j]``."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    modes = np.zeros((len(vectors),) + basis.shape)
    s = np.sqrt(basis.volume)
    modes[:, :, 0, 0, 0] = vectors * s
    return NoiseFamily(modes, np.ones(len(vectors)), basis.synthesize(modes))


def _sup_norm(basis, c):
    """Sup of ``|h(x)|`` over a vertex grid of ``4n+1`` points per axis, boundary included."""
    from .spectral import _cosine_table

    tables = [
        _cosine_table(L, n, np.linspace(0.0, L, 4 * n + 1))
        for L, n in zip(basis.box_lengths, basis.modes_per_axis)
    ]
    vals = np.einsum("ia,jb,kc,dabc->dijk", *tables, c)
    return float(np.sqrt(np.max(np.sum(vals * vals, axis=0))))


def c_h_constant(family: NoiseFamily, basis: MagnetizationBasis):
    """``c_h^2 = sum_j |h_j|_Linf + sum_j |h_j|^2_W12``."""
    total = 0.0
    for c in family.coeffs:
        total += _sup_norm(basis, c)
        total += float(np.sum((1.0 + basis.eigenvalues) * c * c))
    return total


def _pointwise_G(m, h, psi_m, l1, l2):
    mxh = cross(m, h)
    mmh = cross(m, mxh)
    return l1 * mxh + l2 * psi_m * mmh, mxh, mmh


def diffusion_G_psi(j, m_grid, family, psi, l1, l2):
    """Unprojected ``G_j^psi(M) = l1 M x h + l2 psi(M) M x (M x h)`` on the grid."""
    _check_index(j, family)
    h = family.h_grid[j]
    return _pointwise_G(m_grid, h, psi.value(m_grid), l1, l2)[0]


def diffusion_all(m_grid, basis, family, psi, l1, l2, psi_m=None):
    """All ``G_jn(M)`` as coefficients, shape ``(J, 3, n1, n2, n3)``."""
    if family.J == 0:
        return np.zeros((0,) + basis.shape)
    if psi_m is None:
        psi_m = psi.value(m_grid)
    g = np.empty(family.h_grid.shape)
    for j, hj in enumerate(family.h_grid):
        mxh = cross(m_grid, hj)
        g[j] = l1 * mxh + (l2 * psi_m) * cross(m_grid, mxh)
    return basis.project(g)


def diffusion_G(j, m, basis, family, psi, l1, l2):
    """``G_jn(M) = l1 pi[M x h_j] + l2 pi[psi(M) M x (M x h_j)]`` for coefficients ``m``."""
    _check_index(j, family)
    m_grid = basis.synthesize(m)
    return basis.project(diffusion_G_psi(j, m_grid, family, psi, l1, l2))


def _check_index(j, family):
    if not 0 <= j < family.J:
        raise IndexError(f"noise index {j} out of range for J={family.J}")


def ito_correction_galerkin(m_grid, basis, family, psi, l1, l2, g_coeffs=None):
    """``1/2 sum_j DG_jn(M)[G_jn(M)]`` with ``DG_jn`` the true derivative of the projected map."""
    if family.J == 0:
        return np.zeros(basis.shape)
    psi_m = psi.value(m_grid)
    dpsi = psi.grad(m_grid)
    if g_coeffs is None:
        g_coeffs = diffusion_all(m_grid, basis, family, psi, l1, l2, psi_m)
    v = basis.synthesize(g_coeffs)
    h = family.h_grid
    # The sums over j are linear, so M x (.) and M x (M x .) are applied once.
    s_vh = np.zeros_like(m_grid)
    s_vmh = np.zeros_like(m_grid)
    w = np.zeros_like(m_grid)
    for vj, hj in zip(v, h):
        s_vh += cross(vj, hj)
        s_vmh += cross(vj, cross(m_grid, hj))
        w += dot(dpsi, vj) * hj
    d = l1 * s_vh + l2 * (cross(m_grid, cross(m_grid, w)) + psi_m * (s_vmh + cross(m_grid, s_vh)))
    return 0.5 * basis.project(d)


def ito_correction(m_grid, basis, family, psi, l1, l2):
    """``1/2 sum_j G'_jn(M)[G_jn(M)]`` as the five-term expression with inner projections.

    Terms, for ``a = M x h`` and ``c = M x (M x h)``::

        l1^2    pi[pi(a) x h]
        l1 l2   pi[psi c x h]
        l2^2    pi[psi M x (c x h)]
        l1 l2   pi[psi M x (a x h)]
        l2^2    pi[pi(psi c) x a]
    """
    if family.J == 0:
        return np.zeros(basis.shape)
    psi_m = psi.value(m_grid)[None, None]
    h = family.h_grid
    m = m_grid[None]
    a = cross(m, h)
    c = cross(m, a)
    pa = basis.synthesize(basis.project(a))
    pc = basis.synthesize(basis.project(psi_m * c))
    terms = (
        l1 * l1 * cross(pa, h)
        + l1 * l2 * psi_m * cross(c, h)
        + l2 * l2 * psi_m * cross(m, cross(c, h))
        + l1 * l2 * psi_m * cross(m, cross(a, h))
        + l2 * l2 * cross(pc, a)
    )
    return 0.5 * basis.project(np.sum(terms, axis=0))


def ito_correction_unprojected(m_grid, family, psi, l1, l2, j=None):
    """Grid values of ``1/2 sum_j (G_j^psi)'(M)[G_j^psi(M)]`` (all five terms, no projection).

    With ``j`` given, returns the single-``j`` term without the factor 1/2.
    """
    psi_m = psi.value(m_grid)[None, None]
    h = family.h_grid if j is None else family.h_grid[j : j + 1]
    m = m_grid[None]
    a = cross(m, h)
    c = cross(m, a)
    terms = (
        l1 * l1 * cross(a, h)
        + l1 * l2 * psi_m * cross(c, h)
        + l2 * l2 * psi_m * cross(m, cross(c, h))
        + l1 * l2 * psi_m * cross(m, cross(a, h))
        + l2 * l2 * psi_m * cross(c, a)
    )
    if j is not None:
        return terms[0]
    return 0.5 * np.sum(terms, axis=0)
