"""Command line interface: ``spinwell run|ensemble|check|convergence|print-config``.

Exit codes: 0 success, 1 tolerance failure, 2 configuration error,
3 numerical abort.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import ConfigError, SimConfig, apply_overrides, build_initial, build_system, load_config
from .diagnostics import InvariantReport, holder_estimate, moment_estimates
from .integrator import BrownianPath, NumericalAbort, path_seed, run_ensemble, simulate
from .io import write_rows, write_snapshot, write_trajectory_csv
from .studies import dt_ladder, gradient_suite, identity_suite, observed_order, sphere_ladder, twin_study

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

# identity and conservation tolerances used by ``check``
TOL_IDENTITY = 1e-8
TOL_GRAD = 1e-6
TOL_HESS = 1e-5
TOL_DIVB = 1e-12
TOL_NORM_DRIFT = 1e-6


def _out_dir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _setup(cfg):
    system = build_system(cfg)
    return system, build_initial(cfg, system)


def cmd_run(cfg, out):
    """Single path; writes ``trajectory.csv``, ``config.txt`` and snapshots."""
    system, initial = _setup(cfg)
    path = BrownianPath.generate(path_seed(cfg.seed, 0), cfg.dt, cfg.steps, system.noise.J)
    store = cfg.snapshot_every or cfg.steps
    traj = simulate(
        system,
        initial,
        path,
        scheme=cfg.scheme,
        record_every=cfg.record_every,
        store_every=store,
        check_norm_every=cfg.record_every,
        renormalize=cfg.renormalize,
    )
    with open(os.path.join(out, "config.txt"), "w", encoding="utf-8") as fh:
        fh.write(cfg.to_text(annotate=False))
    write_trajectory_csv(os.path.join(out, "trajectory.csv"), traj.records)
    snap = os.path.join(out, "snapshots")
    os.makedirs(snap, exist_ok=True)
    for st in traj.states:
        step = int(round(st.t / cfg.dt))
        write_snapshot(st, os.path.join(snap, f"snap_{step:08d}.bin"), cfg.em_modes)
    last = traj.records[-1]
    print(f"t={last.t:.6g} E_total={last.E_total:.10g} sphere_max_dev={last.sphere_max_dev:.3e}")
    return EXIT_OK


def cmd_ensemble(cfg, out):
    system, initial = _setup(cfg)
    stats = run_ensemble(
        system, initial, cfg.ensemble, cfg.seed, cfg.dt, cfg.steps, scheme=cfg.scheme, record_every=1
    )
    if stats.n_paths:
        write_rows(
            os.path.join(out, "stats.csv"),
            ("quantity", "mean", "stderr", "n_paths"),
            [(q, m, s, stats.n_paths) for q, m, s in stats.table()],
        )
        write_rows(
            os.path.join(out, "moments.csv"),
            ("quantity", "p", "moment", "stderr", "power_mean"),
            moment_estimates(stats),
        )
        for q, m, s in stats.table():
            print(f"{q:16s} {m:.8g} +- {s:.2g}")
    write_rows(os.path.join(out, "failures.csv"), ("seed", "error"), stats.failures)
    if stats.failures:
        print(f"{len(stats.failures)} of {cfg.ensemble} paths aborted; see failures.csv", file=sys.stderr)
        return EXIT_ABORT
    return EXIT_OK


def check_report(cfg):
    """Build the :class:`InvariantReport` of the ``check`` command."""
    system, initial = _setup(cfg)
    rep = InvariantReport()
    for name, v in identity_suite(system, cfg.check_states, seed=cfg.seed).items():
        rep.add(f"identity:{name}", v, TOL_IDENTITY)
    g = gradient_suite(system, n_dirs=5, seed=cfg.seed)
    rep.add("gradient:rho_vs_fd", g["grad"], TOL_GRAD)
    rep.add("gradient:hessian_vs_fd", g["hessian"], TOL_HESS)
    rep.add("gradient:hessian_continuum_gap", g["hessian_continuum"], float("nan"), op="report")

    steps = cfg.check_steps
    quiet = system.with_(noise=system.noise.restricted(0))
    tr = simulate(quiet, initial, BrownianPath.zero(cfg.dt, steps, 0), scheme=cfg.scheme, record_every=1,
                  store_every=1)
    E = tr.column("E_total")
    H = tr.column("H_norm_M")
    t_run = steps * cfg.dt
    if quiet.forcing.is_zero:
        rep.add("noise_off:max_energy_increase", max(0.0, float(np.max(np.diff(E)))), 1e-12 * max(1.0, abs(E[0])))
    rep.add(
        "noise_off:energy_identity",
        float(np.max(tr.column("energy_ident_resid"))),
        1e2 * cfg.dt**2 * t_run * max(1.0, abs(E[0])),
    )
    rep.add("noise_off:divB", float(np.max(tr.column("divB_resid"))), TOL_DIVB)
    rep.add("noise_off:H_norm_drift", float(np.max(np.abs(H - H[0]))), TOL_NORM_DRIFT)
    rep.add("noise_off:holder_exponent", holder_estimate(tr.times, tr.states), 0.9, op=">=")

    path = BrownianPath.generate(path_seed(cfg.seed, 0), cfg.dt, steps, system.noise.J)
    trn = simulate(system, initial, path, scheme=cfg.scheme, record_every=1, store_every=1, check_norm_every=1)
    rep.add("noisy:divB", float(np.max(trn.column("divB_resid"))), TOL_DIVB)
    rep.add("noisy:norm_identity", float(np.max(trn.column("norm_ident_resid"))), TOL_IDENTITY)
    rep.add("noisy:holder_exponent", holder_estimate(trn.times, trn.states), float("nan"), op="report")
    return rep


def cmd_check(cfg, out):
    rep = check_report(cfg)
    write_rows(os.path.join(out, "report.csv"), ("name", "value", "tolerance", "op", "passed"), rep.rows)
    for name, value, tol, op, ok in rep.rows:
        mark = "ok" if ok else "FAIL"
        print(f"{mark:4s} {name:40s} {value:.3e} {op} {tol:.3e}")
    return EXIT_OK if rep.ok else EXIT_TOLERANCE


def convergence_rows(cfg):
    """Refinement ladders with observed orders and their declared brackets.

    Rows: ``(study, level, dt, modes, quantity, value, order, low, high, passed)``.
    """
    system, initial = _setup(cfg)
    L = cfg.convergence_levels
    T = cfg.convergence_T
    coarse = cfg.dt * 2 ** (L - 1)
    if abs(T / coarse - round(T / coarse)) > 1e-9 * max(1.0, T / coarse) or round(T / coarse) < 1:
        raise ConfigError(
            f"convergence_T must be a whole multiple of the coarsest ladder step dt * 2^(levels - 1) = {coarse:g}"
        )
    rows = []

    ladder, orders = dt_ladder(system, initial, T, cfg.dt, L, scheme="heun")
    for q, low in (("energy_resid", 1.8), ("norm_drift", 1.8)):
        ok = bool(orders[q] >= low)
        for i, r in enumerate(ladder):
            rows.append(("dt_ladder", i, r["dt"], cfg.modes, q, r[q], orders[q], low, "", ok))

    exps = tuple(range(6, 6 + L))
    twin, order = twin_study(system, initial, T, exponents=exps, n_paths=2, seed=cfg.seed)
    ok = bool(order >= 0.8)
    for i, (dt, d) in enumerate(twin):
        rows.append(("heun_vs_em", i, dt, cfg.modes, "strong_difference", d, order, 0.8, "", ok))

    rungs = []
    for i in range(L):
        f = 2 ** (L - 1 - i)
        rungs.append((tuple(max(1, n // f) for n in cfg.modes), cfg.dt * f))
    if len({r[0] for r in rungs}) < L:
        raise ConfigError(f"modes {cfg.modes} are too coarse for {L} distinct ladder rungs")
    sph = sphere_ladder(cfg, rungs, T, seed=cfg.seed)
    devs = [r[2] for r in sph]
    ok = bool(all(b < a for a, b in zip(devs, devs[1:])))
    dts = [r[1] for r in sph]
    for i, (modes, dt, dev, _) in enumerate(sph):
        rows.append(("mode_ladder", i, dt, modes, "sphere_max_dev", dev, observed_order(dts, devs), "", "", ok))
    return rows


def cmd_convergence(cfg, out):
    rows = convergence_rows(cfg)
    header = ("study", "level", "dt", "modes", "quantity", "value", "order", "low", "high", "passed")
    write_rows(os.path.join(out, "convergence.csv"), header, [r[:3] + ("x".join(map(str, r[3])),) + r[4:] for r in rows])
    for r in rows:
        print(f"{r[0]:12s} {r[1]} dt={r[2]:.3e} {r[4]:18s} {r[5]:.3e} order={r[6]:.3f} {'ok' if r[9] else 'FAIL'}")
    return EXIT_OK if all(r[9] for r in rows) else EXIT_TOLERANCE


COMMANDS = {
    "run": cmd_run,
    "ensemble": cmd_ensemble,
    "check": cmd_check,
    "convergence": cmd_convergence,
}


def build_parser():
    p = argparse.ArgumentParser(prog="spinwell", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("run", "ensemble", "check", "convergence", "print-config"):
        s = sub.add_parser(name)
        s.add_argument("config", nargs="?" if name == "print-config" else None, help="key = value config file")
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        if name != "print-config":
            s.add_argument("--out", default="spinwell-out", help="output directory")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = load_config(args.config, args.set)
        else:
            cfg = apply_overrides(SimConfig().validate(), args.set)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "print-config":
        sys.stdout.write(cfg.to_text())
        return EXIT_OK
    try:
        return COMMANDS[args.command](cfg, _out_dir(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalAbort as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
