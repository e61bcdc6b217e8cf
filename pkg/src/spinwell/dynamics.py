"""Drift and diffusion of the coupled Galerkin system.

State ``X = (M, B, E)`` in ``H_n x Y_n x Y_n`` evolves by

    dM = F(M, B, E) dt + sum_j G_j(M) dW_j                      (Ito)
    dE = -pi^Y[1_D (E + fbar)] dt + curl(B - pi^Y Mbar) dt
    dB = -curl(E) dt

with ``F = l1 pi[M x rho] - l2 pi[M x (M x rho)] + 1/2 sum_j G_j'[G_j]``.
Products of fields are formed on the quadrature grid and projected; the
linear couplings between ``H_n`` and ``Y_n`` are exact projections.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .energy import AnisotropyPotential, EnergyBreakdown, total_energy
from .noise import (
    NoiseFamily,
    TruncationPsi,
    diffusion_all,
    ito_correction,
    ito_correction_galerkin,
)
from .spectral import SpectralBases, cross

__all__ = [
    "GalerkinState",
    "StateDerivative",
    "Forcing",
    "GalerkinSystem",
    "Evaluation",
    "evaluate",
    "drift_F",
    "maxwell_rhs",
    "full_drift",
    "full_diffusion",
]


@dataclass(frozen=True, eq=False)
class GalerkinState:
    """Coefficients ``(M_n, B_n, E_n)`` at time ``t``."""

    m: np.ndarray
    b: np.ndarray
    e: np.ndarray
    t: float = 0.0

    def copy(self):
        return GalerkinState(self.m.copy(), self.b.copy(), self.e.copy(), self.t)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.m)) and np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.e)))

    def max_abs(self):
        return max(float(np.max(np.abs(a))) for a in (self.m, self.b, self.e))

    @classmethod
    def zeros(cls, bases, t=0.0):
        return cls(np.zeros(bases.h.shape), np.zeros(bases.y.shape), np.zeros(bases.y.shape), t)


@dataclass(frozen=True, eq=False)
class StateDerivative:
    dm: np.ndarray
    db: np.ndarray
    de: np.ndarray


@dataclass(frozen=True, eq=False)
class Forcing:
    """Applied current ``f`` on ``D`` as time-dependent ``H_n`` coefficients.

    ``coeffs`` is either a constant coefficient array or a callable ``t ->``
    coefficients.  ``horizon`` bounds the admissible times when given.
    """

    coeffs: object = None
    horizon: Optional[float] = None

    def at(self, t):
        if self.horizon is not None and not (0.0 <= t <= self.horizon * (1 + 1e-12)):
            raise ValueError(f"forcing requested at t={t} outside [0, {self.horizon}]")
        if self.coeffs is None:
            return None
        if callable(self.coeffs):
            return np.asarray(self.coeffs(t), dtype=float)
        return np.asarray(self.coeffs, dtype=float)

    @property
    def is_zero(self):
        return self.coeffs is None


@dataclass(frozen=True, eq=False)
class GalerkinSystem:
    """Everything the vector fields depend on besides the state.

    ``correction`` selects the Ito correction inside ``F``: ``"galerkin"``
    (chain rule of the projected diffusion, the default) or ``"five-term"`` (the
    five-term expression).  ``induction_sign`` is the sign in
    ``dB = sign * curl(E) dt``.  ``maxwell=False`` freezes ``B`` and ``E`` and
    removes the field term from the effective field.
    """

    bases: SpectralBases
    phi: AnisotropyPotential
    noise: NoiseFamily
    lambda1: float = 1.0
    lambda2: float = 0.5
    psi: TruncationPsi = field(default_factory=TruncationPsi)
    forcing: Forcing = field(default_factory=Forcing)
    correction: str = "galerkin"
    induction_sign: float = -1.0
    maxwell: bool = True

    def __post_init__(self):
        if self.correction not in ("galerkin", "five-term"):
            raise ValueError(f"unknown correction {self.correction!r}")

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True, eq=False)
class Evaluation:
    """Intermediate quantities of one vector-field evaluation."""

    state: GalerkinState
    m_grid: np.ndarray
    pm: np.ndarray
    rho: np.ndarray
    rho_grid: np.ndarray
    mxrho_grid: np.ndarray
    f_strat: np.ndarray
    db: np.ndarray
    de: np.ndarray
    g: np.ndarray
    e_ind: np.ndarray
    f: Optional[np.ndarray]
    _corr: dict = field(default_factory=dict, repr=False)

    def correction(self, system, kind=None):
        kind = kind or system.correction
        if kind not in self._corr:
            hb = system.bases.h
            if kind == "galerkin":
                c = ito_correction_galerkin(
                    self.m_grid, hb, system.noise, system.psi, system.lambda1, system.lambda2, self.g
                )
            else:
                c = ito_correction(self.m_grid, hb, system.noise, system.psi, system.lambda1, system.lambda2)
            self._corr[kind] = c
        return self._corr[kind]

    def drift_F(self, system):
        return self.f_strat + self.correction(system)

    def mxrho_sq(self, bases):
        return bases.h.inner(self.mxrho_grid, self.mxrho_grid)

    def e_sq_on_D(self, bases):
        """``|1_D E|^2``, from ``e_ind = pi^Y[1_D E]``."""
        return float(np.sum(self.state.e * self.e_ind))

    def forcing_pairing(self, bases):
        """``<f, 1_D E>``."""
        if self.f is None:
            return 0.0
        return float(np.sum(self.f * bases.restrict_Y_to_H(self.state.e)))

    def energy(self, system) -> EnergyBreakdown:
        return total_energy(self.state, system.bases, system.phi, self.m_grid, self.pm)


def _check_shapes(state, bases):
    if state.m.shape != bases.h.shape:
        raise ValueError(f"magnetization shape {state.m.shape} != {bases.h.shape}")
    if state.b.shape != bases.y.shape or state.e.shape != bases.y.shape:
        raise ValueError("field coefficient shapes do not match the EM basis")


def evaluate(state: GalerkinState, system: GalerkinSystem, t=None, with_noise=True) -> Evaluation:
    """Evaluate every piece of the vector fields once, reusing shared transforms."""
    _check_shapes(state, system.bases)
    bases = system.bases
    hb = bases.h
    t = state.t if t is None else t
    l1, l2 = system.lambda1, system.lambda2
    m_grid = hb.synthesize(state.m)
    pm = bases.project_extension(state.m)
    rho = hb.project(-system.phi.grad(m_grid)) + hb.laplacian(state.m)
    if system.maxwell:
        rho = rho + bases.restrict_Y_to_H(state.b - pm)
    rho_grid = hb.synthesize(rho)
    mxrho = cross(m_grid, rho_grid)
    f_strat = hb.project(l1 * mxrho - l2 * cross(m_grid, mxrho))

    f = system.forcing.at(t)
    if system.maxwell:
        y = bases.y
        e_ind = bases.project_indicator(state.e)
        de = -e_ind + y.curl(state.b - pm)
        if f is not None:
            de = de - bases.project_extension(f)
        db = system.induction_sign * y.curl(state.e)
    else:
        e_ind = np.zeros_like(state.e)
        de = np.zeros_like(state.e)
        db = np.zeros_like(state.b)

    if with_noise and system.noise.J:
        g = diffusion_all(m_grid, hb, system.noise, system.psi, l1, l2)
    else:
        g = np.zeros((0,) + hb.shape)
    return Evaluation(state, m_grid, pm, rho, rho_grid, mxrho, f_strat, db, de, g, e_ind, f)


def drift_F(state, system, t=None):
    """``F_n(M, B, E)`` including the configured Ito correction."""
    ev = evaluate(state, system, t)
    return ev.drift_F(system)


def maxwell_rhs(state, system, t=None):
    """Right-hand sides ``(dE/dt, dB/dt)`` of the field equations."""
    ev = evaluate(state, system, t, with_noise=False)
    return ev.de, ev.db


def full_drift(state, system, t=None):
    ev = evaluate(state, system, t)
    return StateDerivative(ev.drift_F(system), ev.db, ev.de)


def full_diffusion(j, state, system):
    if not 0 <= j < system.noise.J:
        raise IndexError(f"noise index {j} out of range for J={system.noise.J}")
    ev = evaluate(state, system, with_noise=True)
    return StateDerivative(ev.g[j], np.zeros_like(state.b), np.zeros_like(state.e))


def mxrho_norm_sq(state, system):
    ev = evaluate(state, system, with_noise=False)
    return ev.mxrho_sq(system.bases)


__all__ += ["mxrho_norm_sq"]
