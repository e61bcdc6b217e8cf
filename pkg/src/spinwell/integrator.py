"""Time stepping, Brownian paths and Monte-Carlo ensembles."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import Evaluation, GalerkinState, GalerkinSystem, evaluate

__all__ = [
    "NumericalAbort",
    "BrownianPath",
    "Trajectory",
    "StepRecord",
    "step_heun",
    "step_em_ito",
    "simulate",
    "path_seed",
    "EnsembleStats",
    "run_ensemble",
]

BLOWUP = 1e12


class NumericalAbort(RuntimeError):
    """A step produced a non-finite or exploding state."""

    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True, eq=False)
class BrownianPath:
    """Increments of ``J`` independent Wiener processes on a uniform grid."""

    seed: int
    dt: float
    steps: int
    increments: np.ndarray

    @classmethod
    def generate(cls, seed, dt, steps, J):
        if dt <= 0 or steps <= 0:
            raise ValueError("dt and steps must be positive")
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
        dw = rng.standard_normal((int(steps), int(J))) * np.sqrt(dt)
        return cls(int(seed), float(dt), int(steps), dw)

    @classmethod
    def zero(cls, dt, steps, J):
        return cls(0, float(dt), int(steps), np.zeros((int(steps), int(J))))

    @property
    def J(self):
        return self.increments.shape[1]

    def coarsen(self, factor):
        """The same Brownian motion sampled every ``factor`` steps."""
        if self.steps % factor:
            raise ValueError(f"{self.steps} steps not divisible by {factor}")
        dw = self.increments.reshape(self.steps // factor, factor, -1).sum(axis=1)
        return BrownianPath(self.seed, self.dt * factor, self.steps // factor, dw)

    def scaled(self, s):
        return BrownianPath(self.seed, self.dt, self.steps, s * self.increments)


def _combine(state, ev_drift_m, db, de, g, dw, dt, t_new):
    m = state.m + dt * ev_drift_m
    if len(dw):
        m = m + np.tensordot(dw, g, axes=1)
    return GalerkinState(m, state.b + dt * db, state.e + dt * de, t_new)


def step_heun(state, dt, dw, system: GalerkinSystem, ev: Optional[Evaluation] = None, renormalize=False):
    """Stratonovich Heun step: predictor Euler, trapezoidal corrector.

    The drift is the Stratonovich drift (no Ito correction); the diffusion is
    averaged between the current state and the predictor.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    dw = np.asarray(dw, dtype=float)
    noisy = bool(system.noise.J) and np.any(dw != 0)
    if ev is None:
        ev = evaluate(state, system, with_noise=noisy)
    pred = _combine(state, ev.f_strat, ev.db, ev.de, ev.g if noisy else (), dw if noisy else (), dt, state.t + dt)
    _guard(pred)
    ev2 = evaluate(pred, system, with_noise=noisy)
    new = GalerkinState(
        state.m + 0.5 * dt * (ev.f_strat + ev2.f_strat),
        state.b + 0.5 * dt * (ev.db + ev2.db),
        state.e + 0.5 * dt * (ev.de + ev2.de),
        state.t + dt,
    )
    if noisy:
        new = GalerkinState(new.m + 0.5 * np.tensordot(dw, ev.g + ev2.g, axes=1), new.b, new.e, new.t)
    if renormalize:
        new = _renormalize(new, system)
    _guard(new)
    return new


def step_em_ito(state, dt, dw, system: GalerkinSystem, ev: Optional[Evaluation] = None, renormalize=False):
    """Euler-Maruyama step on the Ito form (drift ``F_n`` with its correction)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    dw = np.asarray(dw, dtype=float)
    if ev is None:
        ev = evaluate(state, system, with_noise=bool(system.noise.J))
    if system.noise.J:
        drift = ev.drift_F(system)
        new = _combine(state, drift, ev.db, ev.de, ev.g, dw, dt, state.t + dt)
    else:
        new = _combine(state, ev.f_strat, ev.db, ev.de, (), (), dt, state.t + dt)
    if renormalize:
        new = _renormalize(new, system)
    _guard(new)
    return new


STEPPERS = {"heun": step_heun, "em-ito": step_em_ito}


def _renormalize(state, system):
    hb = system.bases.h
    g = hb.synthesize(state.m)
    r = np.sqrt(np.sum(g * g, axis=0))
    return GalerkinState(hb.project(g / np.where(r > 0, r, 1.0)), state.b, state.e, state.t)


def _guard(state, step=None):
    if not state.is_finite():
        raise NumericalAbort("non-finite state", step)
    if state.max_abs() > BLOWUP:
        raise NumericalAbort(f"state norm exceeded {BLOWUP:g}", step)


@dataclass
class StepRecord:
    """Per-step scalar diagnostics (one CSV row)."""

    t: float
    H_norm_M: float
    V_norm_M: float
    E_aniso: float
    E_exch: float
    E_zeeman: float
    E_elec: float
    E_total: float
    divB_resid: float
    sphere_max_dev: float
    norm_ident_resid: float
    energy_ident_resid: float
    mxrho_sq: float = 0.0
    be_sq: float = 0.0
    e_sq: float = 0.0

    COLUMNS = (
        "t",
        "H_norm_M",
        "V_norm_M",
        "E_aniso",
        "E_exch",
        "E_zeeman",
        "E_elec",
        "E_total",
        "divB_resid",
        "sphere_max_dev",
        "norm_ident_resid",
        "energy_ident_resid",
    )

    def row(self):
        return [getattr(self, c) for c in self.COLUMNS]


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    records: list = field(default_factory=list)
    mxrho_integral: float = 0.0

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records])


def _record(ev: Evaluation, system, div0, energy_resid, norm_resid):
    from .diagnostics import div_B_residual, sphere_deviation

    bases = system.bases
    st = ev.state
    en = ev.energy(system)
    h2 = float(np.sum(st.m * st.m))
    v2 = float(np.sum((1.0 + bases.h.eigenvalues) * st.m * st.m))
    return StepRecord(
        t=st.t,
        H_norm_M=np.sqrt(h2),
        V_norm_M=np.sqrt(v2),
        E_aniso=en.anisotropy,
        E_exch=en.exchange,
        E_zeeman=en.zeeman,
        E_elec=en.electric,
        E_total=en.total,
        divB_resid=div_B_residual(st.b, div0, bases.y),
        sphere_max_dev=sphere_deviation(ev.m_grid)[0],
        norm_ident_resid=norm_resid,
        energy_ident_resid=energy_resid,
        mxrho_sq=ev.mxrho_sq(bases),
        be_sq=float(np.sum((st.b - ev.pm) ** 2)),
        e_sq=float(np.sum(st.e * st.e)),
    )


def _dissipation_rate(ev, system):
    """``-l2 |M x rho|^2 - |1_D E|^2 - <f, 1_D E>`` at an evaluated state."""
    b = system.bases
    return -system.lambda2 * ev.mxrho_sq(b) - ev.e_sq_on_D(b) - ev.forcing_pairing(b)


def simulate(system: GalerkinSystem, initial: GalerkinState, path: BrownianPath, scheme="heun",
             record_every=1, store_every=None, check_norm_every=0, renormalize=False):
    """Integrate ``path.steps`` steps of size ``path.dt`` from ``initial``.

    Records a :class:`StepRecord` every ``record_every`` steps (and at both
    ends) and stores full states every ``store_every`` steps.  The energy
    identity residual is cumulative: ``E(t) - E(0) - int rate`` with the
    dissipation rate integrated by the trapezoidal rule; it is meaningful for
    noise-free runs.
    """
    from .diagnostics import norm_identity_residual

    if path.J != system.noise.J:
        raise ValueError(f"path has {path.J} Wiener processes, system needs {system.noise.J}")
    step = STEPPERS[scheme]
    dt = path.dt
    traj = Trajectory()
    div0 = system.bases.y.divergence(initial.b)
    state = initial
    ev = evaluate(state, system, with_noise=bool(system.noise.J))
    e0 = ev.energy(system).total
    rate = _dissipation_rate(ev, system)
    acc = 0.0
    mx_int = 0.0
    mx_prev = ev.mxrho_sq(system.bases)
    nr = norm_identity_residual(ev, system)[0] if check_norm_every else 0.0
    traj.records.append(_record(ev, system, div0, 0.0, nr))
    if store_every:
        traj.times.append(state.t)
        traj.states.append(state)
    for n in range(path.steps):
        try:
            state = step(state, dt, path.increments[n], system, ev=ev, renormalize=renormalize)
        except NumericalAbort as exc:
            raise NumericalAbort(str(exc), n) from None
        ev = evaluate(state, system, with_noise=bool(system.noise.J))
        new_rate = _dissipation_rate(ev, system)
        acc += 0.5 * dt * (rate + new_rate)
        rate = new_rate
        mx_now = ev.mxrho_sq(system.bases)
        mx_int += 0.5 * dt * (mx_prev + mx_now)
        mx_prev = mx_now
        last = n == path.steps - 1
        if (n + 1) % record_every == 0 or last:
            nr = 0.0
            if check_norm_every and ((n + 1) % check_norm_every == 0 or last):
                nr = norm_identity_residual(ev, system)[0]
            resid = abs(ev.energy(system).total - e0 - acc)
            traj.records.append(_record(ev, system, div0, resid, nr))
        if store_every and ((n + 1) % store_every == 0 or last):
            traj.times.append(state.t)
            traj.states.append(state)
    traj.mxrho_integral = mx_int
    return traj


def path_seed(master_seed, index):
    """Seed of path ``index``, derived from the master seed independently of ensemble size."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class EnsembleStats:
    """Per-path functionals and their sample means and standard errors."""

    seeds: list
    samples: dict
    failures: list

    QUANTITIES = ("sup_M_V_sq", "sup_BmM_sq", "sup_E_sq", "int_mxrho_sq", "final_energy", "sup_sphere_dev")

    @property
    def n_paths(self):
        return len(self.seeds) - len(self.failures)

    def mean(self, name):
        return float(np.mean(self.samples[name]))

    def stderr(self, name):
        x = np.asarray(self.samples[name])
        if len(x) < 2:
            return 0.0
        return float(np.std(x, ddof=1) / np.sqrt(len(x)))

    def table(self):
        return [(q, self.mean(q), self.stderr(q)) for q in self.QUANTITIES]


def _path_functionals(traj):
    recs = traj.records
    return {
        "sup_M_V_sq": max(r.V_norm_M**2 for r in recs),
        "sup_BmM_sq": max(r.be_sq for r in recs),
        "sup_E_sq": max(r.e_sq for r in recs),
        "int_mxrho_sq": traj.mxrho_integral,
        "final_energy": recs[-1].E_total,
        "sup_sphere_dev": max(r.sphere_max_dev for r in recs),
    }


def _run_one(args):
    system, initial, seed, dt, steps, scheme, record_every = args
    path = BrownianPath.generate(seed, dt, steps, system.noise.J)
    try:
        traj = simulate(system, initial, path, scheme=scheme, record_every=record_every)
    except NumericalAbort as exc:
        return seed, None, str(exc)
    return seed, _path_functionals(traj), None


def run_ensemble(system, initial, K, master_seed, dt, steps, scheme="heun", record_every=1, seeds=None,
                 processes=None):
    """Run ``K`` paths with seeds derived from ``master_seed``.

    Paths are independent; with ``processes > 1`` they run in a process pool.
    Results are gathered in path order, so the statistics do not depend on
    scheduling.  Failed paths are listed in ``failures``, never dropped silently.
    """
    if K < 2:
        raise ValueError("an ensemble needs K >= 2 paths")
    if seeds is None:
        seeds = [path_seed(master_seed, i) for i in range(K)]
    jobs = [(system, initial, s, dt, steps, scheme, record_every) for s in seeds]
    if processes is None:
        processes = int(os.environ.get("SPINWELL_THREADS", "1") or 1)
    if processes > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(processes) as pool:
            results = pool.map(_run_one, jobs)
    else:
        results = [_run_one(j) for j in jobs]
    samples = {q: [] for q in EnsembleStats.QUANTITIES}
    failures = []
    for seed, vals, err in results:
        if err is not None:
            failures.append((seed, err))
            continue
        for q in EnsembleStats.QUANTITIES:
            samples[q].append(vals[q])
    return EnsembleStats(list(seeds), samples, failures)
