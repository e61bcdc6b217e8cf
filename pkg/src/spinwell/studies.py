"""Verification studies shared by the command line and the acceptance tests.

Each study returns plain dictionaries or lists of rows so that callers can
print, store or assert on them.
"""
from __future__ import annotations

import numpy as np

from .diagnostics import (
    check_cross_identity,
    curl_pairing_residual,
    energy_rate_residual,
    norm_identity_residual,
    rho_pairing_residuals,
)
from .dynamics import GalerkinState, evaluate
from .energy import energy_hessian_form, energy_hessian_form_continuum, total_energy
from .integrator import STEPPERS, BrownianPath, NumericalAbort, path_seed, simulate

__all__ = [
    "random_state",
    "observed_order",
    "identity_suite",
    "gradient_suite",
    "twin_study",
    "dt_ladder",
    "sphere_ladder",
]


def random_state(bases, rng, scale=0.1, t=0.0):
    """A random state near a unit constant magnetization.

    The constant mode carries a random unit direction; the other modes get
    Gaussian coefficients damped by ``(1 + lambda_k)^-1/2``.  Field
    coefficients are Gaussian with standard deviation ``scale``.
    """
    hb = bases.h
    m = scale * rng.standard_normal(hb.shape) / np.sqrt(1.0 + hb.eigenvalues)
    d = rng.standard_normal(3)
    m[:, 0, 0, 0] += np.sqrt(hb.volume) * d / np.linalg.norm(d)
    b = scale * rng.standard_normal(bases.y.shape)
    e = scale * rng.standard_normal(bases.y.shape)
    return GalerkinState(m, b, e, t)


def observed_order(h, err):
    """Least-squares slope of ``log err`` against ``log h``."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    if np.any(err <= 0):
        return float("nan")
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def identity_suite(system, n_states, seed=0, scale=0.1):
    """Largest relative residual of each algebraic identity over random states."""
    rng = np.random.default_rng(seed)
    bases = system.bases
    worst = {
        "M.G": 0.0,
        "norm_rate": 0.0,
        "rho.pi[Mxrho]": 0.0,
        "rho.pi[Mx(Mxrho)]": 0.0,
        "curl_pairing": 0.0,
        "cross_identity": 0.0,
        "energy_rate": 0.0,
        "div_dB": 0.0,
    }
    quiet = system.with_(noise=system.noise.restricted(0), forcing=type(system.forcing)(None))
    for _ in range(n_states):
        st = random_state(bases, rng, scale)
        ev = evaluate(st, system)
        nf, ng = norm_identity_residual(ev, system)
        r1, r2 = rho_pairing_residuals(ev, system)
        v = rng.standard_normal(bases.h.shape) / np.sqrt(1.0 + bases.h.eigenvalues)
        ev0 = evaluate(st, quiet, with_noise=False)
        div = np.abs(bases.y.divergence(ev.db)).max() / max(np.abs(ev.db).max(), 1e-300)
        vals = {
            "M.G": ng,
            "norm_rate": nf,
            "rho.pi[Mxrho]": r1,
            "rho.pi[Mx(Mxrho)]": r2,
            "curl_pairing": curl_pairing_residual(st, system, ev.pm),
            "cross_identity": check_cross_identity(st.m, v, bases.h),
            "energy_rate": energy_rate_residual(ev0, quiet),
            "div_dB": div,
        }
        for k, x in vals.items():
            worst[k] = max(worst[k], x)
    return worst


def _energy(system, b, e):
    def f(m):
        return total_energy(GalerkinState(m, b, e), system.bases, system.phi).total

    return f


def gradient_suite(system, n_dirs=20, seed=0, scale=0.1, h_grad=1e-5, h_hess=1e-5):
    """Finite-difference checks of ``-rho_n = grad_M E_n`` and of the second derivative.

    Returns the largest relative errors ``grad``, ``hessian`` (the exact
    form of the restricted energy) and ``hessian_continuum`` (the form with
    ``<u, v>_V`` in place of the projected Zeeman term, reported only).
    """
    from .energy import effective_field

    rng = np.random.default_rng(seed)
    bases = system.bases
    st = random_state(bases, rng, scale)
    E = _energy(system, st.b, st.e)

    def grad(m):
        return -effective_field(GalerkinState(m, st.b, st.e), bases, system.phi)

    g0 = grad(st.m)
    out = {"grad": 0.0, "hessian": 0.0, "hessian_continuum": 0.0}
    for _ in range(n_dirs):
        u = rng.standard_normal(bases.h.shape) / np.sqrt(1.0 + bases.h.eigenvalues)
        v = rng.standard_normal(bases.h.shape) / np.sqrt(1.0 + bases.h.eigenvalues)
        fd = (E(st.m + h_grad * u) - E(st.m - h_grad * u)) / (2.0 * h_grad)
        an = float(np.sum(g0 * u))
        out["grad"] = max(out["grad"], abs(fd - an) / max(abs(an), 1e-300))
        hv = float(np.sum((grad(st.m + h_hess * v) - grad(st.m - h_hess * v)) * u)) / (2.0 * h_hess)
        ex = energy_hessian_form(st, bases, system.phi, u, v)
        co = energy_hessian_form_continuum(st, bases, system.phi, u, v)
        out["hessian"] = max(out["hessian"], abs(hv - ex) / max(abs(ex), 1e-300))
        out["hessian_continuum"] = max(out["hessian_continuum"], abs(hv - co) / max(abs(hv), 1e-300))
    return out


def _state_vec(s):
    return np.concatenate((s.m.ravel(), s.b.ravel(), s.e.ravel()))


def _final_state(system, initial, path, scheme):
    step = STEPPERS[scheme]
    st = initial
    for n in range(path.steps):
        try:
            st = step(st, path.dt, path.increments[n], system)
        except NumericalAbort as exc:
            raise NumericalAbort(str(exc), n) from None
    return st


def twin_study(system, initial, T, exponents=(6, 7, 8, 9, 10), n_paths=4, seed=0):
    """Strong difference between the Heun and Euler-Maruyama steppers on shared paths.

    For each path, Brownian increments are drawn at the finest step and summed
    for the coarser ones.  Returns ``(rows, order)`` with rows
    ``(dt, rms norm of the final-state difference)``.
    """
    exponents = sorted(exponents)
    finest = 2 ** exponents[-1]
    sq = np.zeros(len(exponents))
    for i in range(n_paths):
        base = BrownianPath.generate(path_seed(seed, i), T / finest, finest, system.noise.J)
        for a, k in enumerate(exponents):
            p = base.coarsen(2 ** (exponents[-1] - k))
            xh = _final_state(system, initial, p, "heun")
            xe = _final_state(system, initial, p, "em-ito")
            sq[a] += float(np.sum((_state_vec(xh) - _state_vec(xe)) ** 2))
    rms = np.sqrt(sq / n_paths)
    dts = [T / 2**k for k in exponents]
    return list(zip(dts, rms)), observed_order(dts, rms)


def dt_ladder(system, initial, T, dt0, levels, scheme="heun"):
    """Noise-free runs at ``dt0, dt0/2, ...``.

    Rows hold ``dt``, the largest H-norm drift of ``M``, the largest
    cumulative energy-identity residual, the largest energy increase between
    consecutive steps and the largest div B residual.  Orders are fitted for
    the drift and the energy residual.
    """
    quiet = system.with_(noise=system.noise.restricted(0))
    rows = []
    for lev in range(levels):
        dt = dt0 / 2**lev
        steps = int(round(T / dt))
        tr = simulate(quiet, initial, BrownianPath.zero(dt, steps, 0), scheme=scheme, record_every=1)
        H = tr.column("H_norm_M")
        E = tr.column("E_total")
        rows.append(
            {
                "dt": dt,
                "norm_drift": float(np.max(np.abs(H - H[0]))),
                "energy_resid": float(np.max(tr.column("energy_ident_resid"))),
                "max_energy_increase": float(np.max(np.diff(E))) if len(E) > 1 else 0.0,
                "divB": float(np.max(tr.column("divB_resid"))),
                "sphere_dev": float(tr.records[-1].sphere_max_dev),
            }
        )
    dts = [r["dt"] for r in rows]
    orders = {
        "norm_drift": observed_order(dts, [r["norm_drift"] for r in rows]),
        "energy_resid": observed_order(dts, [r["energy_resid"] for r in rows]),
    }
    return rows, orders


def sphere_ladder(cfg, rungs, T, seed=0):
    """Max-node deviation of ``|M|`` from 1 at time ``T`` along ``rungs``.

    ``rungs`` is a list of ``(modes, dt)``; every rung uses the same Brownian
    motion (drawn at the finest step and summed for coarser ones).  Returns
    rows ``(modes, dt, deviation, largest div B residual)``.
    """
    from .config import build_initial, build_system

    fine = min(dt for _, dt in rungs)
    finest = int(round(T / fine))
    rows = []
    base = None
    for modes, dt in rungs:
        c = cfg.with_(modes=tuple(modes), dt=dt, T=T)
        system = build_system(c)
        if base is None:
            base = BrownianPath.generate(path_seed(seed, 0), fine, finest, system.noise.J)
        factor = int(round(dt / fine))
        path = base.coarsen(factor) if factor > 1 else base
        tr = simulate(system, build_initial(c, system), path, scheme=c.scheme, record_every=path.steps)
        rows.append((tuple(modes), dt, tr.records[-1].sphere_max_dev, float(np.max(tr.column("divB_resid")))))
    return rows
