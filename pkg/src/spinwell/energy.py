"""Restricted energy functional, anisotropy potential and effective field."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralBases

__all__ = [
    "AnisotropyPotential",
    "EnergyBreakdown",
    "total_energy",
    "effective_field",
    "energy_grad_B",
    "energy_grad_E",
    "energy_hessian_form",
    "energy_hessian_form_continuum",
    "zeeman_unprojected",
]


def _smoothstep(t):
    """Quintic ``6t^5 - 15t^4 + 10t^3`` and its first two derivatives, clamped to [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    s = t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    ds = 30.0 * t * t * (t - 1.0) ** 2
    d2s = 60.0 * t * (2.0 * t - 1.0) * (t - 1.0)
    return s, ds, d2s


def _as_field(m):
    """View a bare triple as a one-node field; returns (array, was_triple)."""
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        return m.reshape(3, 1, 1, 1), True
    return m, False


@dataclass(frozen=True)
class AnisotropyPotential:
    """Uniaxial anisotropy ``K (1 - (m.a)^2)`` with a C2 radial cutoff.

    The uniaxial form holds exactly for ``|m| <= R_c/2`` and is blended to
    zero on ``R_c/2 <= |m| <= R_c`` by a quintic in ``|m|``, so the potential
    and its first two derivatives have compact support.

    The potential is nonnegative wherever ``|m.a| <= 1``, in particular on the
    unit ball.  Beyond that the uniaxial form is negative; no nonnegative C1
    function can agree with it on a neighbourhood of ``m = a``.
    """

    easy_axis: tuple = (0.0, 0.0, 1.0)
    strength: float = 0.0
    cutoff_radius: float = 10.0

    def __post_init__(self):
        a = np.asarray(self.easy_axis, dtype=float)
        if a.shape != (3,) or not np.isclose(np.linalg.norm(a), 1.0, atol=1e-12):
            raise ValueError(f"easy axis must be a unit triple, got {self.easy_axis}")
        if self.strength < 0:
            raise ValueError("anisotropy strength must be nonnegative")
        if self.cutoff_radius <= np.sqrt(3.0):
            raise ValueError("cutoff radius must exceed sqrt(3)")
        object.__setattr__(self, "easy_axis", tuple(float(v) for v in a))

    def _blend(self, r):
        half = 0.5 * self.cutoff_radius
        s, ds, d2s = _smoothstep((r - half) / half)
        return 1.0 - s, -ds / half, -d2s / half**2

    def _parts(self, m):
        a = np.asarray(self.easy_axis).reshape(3, 1, 1, 1)
        ma = np.sum(m * a, axis=-4)
        r = np.sqrt(np.sum(m * m, axis=-4))
        return a, ma, r

    def value(self, m):
        m, single = _as_field(m)
        _, ma, r = self._parts(m)
        b, _, _ = self._blend(r)
        out = self.strength * (1.0 - ma * ma) * b
        return float(out.ravel()[0]) if single else out

    def grad(self, m):
        m, single = _as_field(m)
        a, ma, r = self._parts(m)
        b, db, _ = self._blend(r)
        rs = np.where(r > 0, r, 1.0)
        core = 1.0 - ma * ma
        g = -2.0 * ma * b * a + (core * db / rs) * m
        g = self.strength * g
        return g.reshape(3) if single else g

    def hess_apply(self, m, u):
        """Pointwise ``phi''(m) u``."""
        m, single = _as_field(m)
        u = np.asarray(u, dtype=float).reshape(m.shape) if single else np.asarray(u, dtype=float)
        a, ma, r = self._parts(m)
        b, db, d2b = self._blend(r)
        rs = np.where(r > 0, r, 1.0)
        mhat = m / rs
        ua = np.sum(u * a, axis=-4)
        um = np.sum(u * mhat, axis=-4)
        core = 1.0 - ma * ma
        out = (
            -2.0 * b * ua * a
            - 2.0 * ma * db * (um * a + ua * mhat)
            + core * (d2b * um * mhat + (db / rs) * (u - um * mhat))
        )
        out = self.strength * out
        return out.reshape(3) if single else out

    def hess(self, m):
        """The 3x3 Hessian at a single point."""
        m = np.asarray(m, dtype=float)
        return np.column_stack([self.hess_apply(m, e) for e in np.eye(3)])


@dataclass(frozen=True)
class EnergyBreakdown:
    anisotropy: float
    exchange: float
    zeeman: float
    electric: float

    @property
    def total(self):
        return self.anisotropy + self.exchange + self.zeeman + self.electric


def _check_state(state, bases):
    if state.m.shape != bases.h.shape:
        raise ValueError(f"magnetization shape {state.m.shape} != {bases.h.shape}")
    if state.b.shape != bases.y.shape or state.e.shape != bases.y.shape:
        raise ValueError("field coefficient shapes do not match the EM basis")


def total_energy(state, bases: SpectralBases, phi: AnisotropyPotential, m_grid=None, pm=None):
    """Energy of a Galerkin state, with the Zeeman term built on ``pi^Y Mbar``."""
    _check_state(state, bases)
    if m_grid is None:
        m_grid = bases.h.synthesize(state.m)
    if pm is None:
        pm = bases.project_extension(state.m)
    hb = bases.h
    return EnergyBreakdown(
        anisotropy=float(np.sum(phi.value(m_grid)) * hb.cell_volume),
        exchange=0.5 * float(np.sum(hb.eigenvalues * state.m * state.m)),
        zeeman=0.5 * float(np.sum((state.b - pm) ** 2)),
        electric=0.5 * float(np.sum(state.e * state.e)),
    )


def zeeman_unprojected(state, bases):
    """``1/2 |B - Mbar|^2`` with ``Mbar`` itself rather than ``pi^Y Mbar``."""
    cross_term = float(np.sum(state.b * bases.project_extension(state.m)))
    return 0.5 * (float(np.sum(state.b**2)) - 2.0 * cross_term + float(np.sum(state.m**2)))


def effective_field(state, bases: SpectralBases, phi: AnisotropyPotential, m_grid=None, pm=None):
    """``rho_n = pi_n[-phi'(M) + 1_D (B - pi^Y Mbar)] + Laplace M`` in coefficients."""
    _check_state(state, bases)
    if m_grid is None:
        m_grid = bases.h.synthesize(state.m)
    if pm is None:
        pm = bases.project_extension(state.m)
    return (
        bases.h.project(-phi.grad(m_grid))
        + bases.restrict_Y_to_H(state.b - pm)
        + bases.h.laplacian(state.m)
    )


def energy_grad_B(state, bases):
    _check_state(state, bases)
    return state.b - bases.project_extension(state.m)


def energy_grad_E(state, bases):
    _check_state(state, bases)
    return np.array(state.e, dtype=float)


def energy_hessian_form(state, bases, phi, u, v):
    """Exact second derivative of the restricted energy in ``M`` along ``(u, v)``.

    The Zeeman term contributes ``<pi^Y ubar, pi^Y vbar>``, which is what the
    projected coupling actually produces.
    """
    m_grid = bases.h.synthesize(state.m)
    ug = bases.h.synthesize(u)
    vg = bases.h.synthesize(v)
    aniso = bases.h.inner(phi.hess_apply(m_grid, ug), vg)
    exch = float(np.sum(bases.h.eigenvalues * u * v))
    zee = float(np.sum(bases.project_extension(u) * bases.project_extension(v)))
    return aniso + exch + zee


def energy_hessian_form_continuum(state, bases, phi, u, v):
    """``int phi''(M)(u, v) + <u, v>_V``: the continuum form, without projection."""
    m_grid = bases.h.synthesize(state.m)
    ug = bases.h.synthesize(u)
    vg = bases.h.synthesize(v)
    aniso = bases.h.inner(phi.hess_apply(m_grid, ug), vg)
    return aniso + float(np.sum((1.0 + bases.h.eigenvalues) * u * v))
