"""Identity residuals, a-priori-bound estimates and regularity diagnostics.

Every check returns plain nonnegative numbers; :class:`InvariantReport`
collects them with tolerances for the ``check`` command.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import evaluate
from .spectral import MagnetizationBasis, cross

__all__ = [
    "norm_identity_residual",
    "check_norm_identity",
    "check_energy_identity",
    "rho_pairing_residuals",
    "curl_pairing_residual",
    "energy_rate_residual",
    "div_B_residual",
    "check_div_B",
    "sphere_deviation",
    "check_sphere_constraint",
    "check_cross_identity",
    "stochastic_energy_rate",
    "moment_estimates",
    "holder_estimate",
    "InvariantReport",
]


def norm_identity_residual(ev, system):
    """``(|2<M,F> + sum|G_j|^2|, max_j |<M,G_j>|)``, both divided by ``|M|^2``."""
    m = ev.state.m
    m2 = float(np.sum(m * m))
    if m2 == 0.0:
        return 0.0, 0.0
    F = ev.drift_F(system)
    g = ev.g
    first = abs(2.0 * float(np.sum(m * F)) + float(np.sum(g * g)))
    second = max((abs(float(np.sum(m * gj))) for gj in g), default=0.0)
    return first / m2, second / m2


def check_norm_identity(state, system):
    return norm_identity_residual(evaluate(state, system), system)


def rho_pairing_residuals(ev, system):
    """Relative residuals of ``<rho, pi[M x rho]> = 0`` and
    ``<rho, pi[M x (M x rho)]> = -|M x rho|^2``."""
    hb = system.bases.h
    p1 = hb.project(ev.mxrho_grid)
    p2 = hb.project(cross(ev.m_grid, ev.mxrho_grid))
    mx2 = ev.mxrho_sq(system.bases)
    scale = max(float(np.sum(ev.rho**2)) ** 0.5 * float(np.sum(p1**2)) ** 0.5, 1e-300)
    r1 = abs(float(np.sum(ev.rho * p1))) / scale
    r2 = abs(float(np.sum(ev.rho * p2)) + mx2) / max(mx2, 1e-300)
    return r1, r2


def curl_pairing_residual(state, system, pm=None):
    """Relative residual of ``<B - pi Mbar, curl E> = <E, curl(B - pi Mbar)>``."""
    y = system.bases.y
    if pm is None:
        pm = system.bases.project_extension(state.m)
    u = state.b - pm
    lhs = float(np.sum(u * y.curl(state.e)))
    rhs = float(np.sum(state.e * y.curl(u)))
    scale = max(abs(lhs), abs(rhs), float(np.linalg.norm(u) * np.linalg.norm(y.curl(state.e))), 1e-300)
    return abs(lhs - rhs) / scale


def energy_rate_residual(ev, system):
    """Relative residual of ``<grad E_n, drift> = -l2|M x rho|^2 - |1_D E|^2 - <f, 1_D E>``.

    Uses the Stratonovich (noise-free) drift.
    """
    b = system.bases
    st = ev.state
    rate = (
        -float(np.sum(ev.rho * ev.f_strat))
        + float(np.sum((st.b - ev.pm) * ev.db))
        + float(np.sum(st.e * ev.de))
    )
    pred = -system.lambda2 * ev.mxrho_sq(b) - ev.e_sq_on_D(b) - ev.forcing_pairing(b)
    return abs(rate - pred) / max(abs(pred), 1e-300)


def check_energy_identity(traj):
    """Cumulative energy-identity residual series from a trajectory."""
    return traj.column("energy_ident_resid")


def div_B_residual(b, div0, basis):
    return float(np.max(np.abs(basis.divergence(b) - div0), initial=0.0))


def check_div_B(b, b0, basis):
    """``max over modes |k . b(t) - k . b(0)|``."""
    return div_B_residual(b, basis.divergence(b0), basis)


def sphere_deviation(m_grid, cell_volume=None):
    """Max and RMS deviation of ``|M|`` from 1 over grid nodes."""
    r = np.sqrt(np.sum(m_grid * m_grid, axis=-4))
    dev = np.abs(r - 1.0)
    return float(dev.max()), float(np.sqrt(np.mean(dev * dev)))


def check_sphere_constraint(m, basis: MagnetizationBasis):
    dmax, rms = sphere_deviation(basis.synthesize(m))
    return dmax, rms * np.sqrt(basis.volume)


def check_cross_identity(u, v, basis: MagnetizationBasis):
    """Residual of ``<u x Au, v> = sum_i <d_i u, d_i v x u>`` (relative to the largest term)."""
    ug = basis.synthesize(u)
    vg = basis.synthesize(v)
    aug = basis.synthesize(basis.eigenvalues * u)
    lhs = basis.inner(cross(ug, aug), vg)
    du = basis.gradient_grid(u)
    dv = basis.gradient_grid(v)
    terms = [basis.inner(du[i], cross(dv[i], ug)) for i in range(3)]
    rhs = sum(terms)
    scale = max(abs(lhs), max(abs(t) for t in terms), 1e-300)
    return abs(lhs - rhs) / scale


def stochastic_energy_rate(ev, system):
    """Drift of ``dE_n`` for the Ito system, generator applied to ``E_n``.

    ``-<rho, F> + <B - pi Mbar, dB> + <E, dE> + 1/2 sum_j D^2E_n(G_j, G_j)``.
    """
    from .energy import energy_hessian_form

    st = ev.state
    F = ev.drift_F(system)
    rate = -float(np.sum(ev.rho * F)) + float(np.sum((st.b - ev.pm) * ev.db)) + float(np.sum(st.e * ev.de))
    for gj in ev.g:
        rate += 0.5 * energy_hessian_form(st, system.bases, system.phi, gj, gj)
    return rate


def moment_estimates(stats, powers=(2, 4)):
    """Sample moments ``E[X^p]`` with standard errors and power means ``(E X^p)^(1/p)``.

    Returns rows ``(quantity, p, mean, stderr, power_mean)``.
    """
    rows = []
    for q in stats.QUANTITIES:
        x = np.asarray(stats.samples[q], dtype=float)
        for p in powers:
            xp = np.abs(x) ** (p / 2.0) if q.endswith("_sq") else np.abs(x) ** p
            mean = float(np.mean(xp))
            se = float(np.std(xp, ddof=1) / np.sqrt(len(xp))) if len(xp) > 1 else 0.0
            rows.append((q, p, mean, se, mean ** (1.0 / p)))
    return rows


def holder_estimate(times, states, max_lag_fraction=0.25):
    """Exponent of ``|M(t) - M(s)|_H ~ |t - s|^theta`` from a log-log fit.

    Uses mean increments over lags up to ``max_lag_fraction`` of the run.
    Returns ``inf`` when the path is constant.
    """
    t = np.asarray(times, dtype=float)
    ms = np.stack([s.m.ravel() for s in states])
    n = len(t)
    max_lag = max(1, int(max_lag_fraction * (n - 1)))
    lags = np.unique(np.round(np.geomspace(1, max_lag, num=min(12, max_lag))).astype(int))
    xs, ys = [], []
    for lag in lags:
        d = np.linalg.norm(ms[lag:] - ms[:-lag], axis=1)
        mean = float(np.mean(d))
        if mean > 0:
            xs.append(np.log(float(np.mean(t[lag:] - t[:-lag]))))
            ys.append(np.log(mean))
    if len(xs) < 2:
        return float("inf")
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope)


@dataclass
class InvariantReport:
    """Named residuals with tolerances.

    Rows are ``(name, value, tolerance, op, passed)``; ``op`` is ``"<="``,
    ``">="`` or ``"report"`` (recorded only, always passes).
    """

    rows: list = field(default_factory=list)

    def add(self, name, value, tolerance, op="<="):
        value = float(value)
        if op == "report":
            passed = True
        elif op == "<=":
            passed = bool(value <= tolerance)
        elif op == ">=":
            passed = bool(value >= tolerance)
        else:
            raise ValueError(f"unknown comparison {op!r}")
        self.rows.append((name, value, float(tolerance), op, passed))
        return passed

    @property
    def ok(self):
        return all(r[-1] for r in self.rows)

    def failures(self):
        return [r for r in self.rows if not r[-1]]
