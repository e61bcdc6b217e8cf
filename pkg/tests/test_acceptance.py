"""Acceptance criteria, run at their stated tolerances.

Each test prints one ``CRITERION n: PASS|FAIL`` line (also collected into the
terminal summary) and then asserts the same outcome.
"""
import hashlib
import os
import time

import numpy as np
import pytest

from spinwell.cli import main
from spinwell.config import SimConfig, build_initial, build_system
from spinwell.dynamics import GalerkinState
from spinwell.energy import total_energy
from spinwell.integrator import BrownianPath, path_seed, run_ensemble, simulate
from spinwell.io import decode_snapshot, encode_snapshot, read_snapshot
from spinwell.noise import diffusion_G_psi, ito_correction_unprojected
from spinwell.oracles import oracle_fd_directional
from spinwell.studies import dt_ladder, gradient_suite, identity_suite, random_state, sphere_ladder, twin_study

from .conftest import ACCEPTANCE_LINES
from .test_io import GOLDEN, GOLDEN_SHA256, golden_state


def report(n, passed, detail):
    line = f"CRITERION {n}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return passed


@pytest.fixture(scope="module")
def default_system():
    return build_system(SimConfig())


def test_criterion_1_identity_suite(default_system):
    t0 = time.perf_counter()
    worst = identity_suite(default_system, 1000, seed=2026)
    runtime = time.perf_counter() - t0
    ok = all(v < 1e-8 for v in worst.values()) and runtime < 120.0
    detail = ", ".join(f"{k}={v:.1e}" for k, v in worst.items())
    assert report(1, ok, f"1000 states at 8^3, worst relative residuals: {detail}; {runtime:.0f}s (< 120s)")


def test_criterion_2_gradient_suite(default_system):
    t0 = time.perf_counter()
    g = gradient_suite(default_system, n_dirs=20, seed=2026)
    runtime = time.perf_counter() - t0
    ok = g["grad"] < 1e-6 and g["hessian"] < 1e-5 and runtime < 60.0
    assert report(
        2,
        ok,
        f"grad err {g['grad']:.1e} (< 1e-6), Hessian err {g['hessian']:.1e} (< 1e-5) over 20 directions; "
        f"{runtime:.0f}s (< 60s)",
    )


def test_criterion_3_ito_stratonovich_twin():
    t0 = time.perf_counter()
    cfg = SimConfig(modes=(4, 4, 4))
    system = build_system(cfg)
    initial = build_initial(cfg.with_(initial_m="wall"), system)
    rows, order = twin_study(system, initial, 0.5, exponents=(6, 7, 8, 9, 10), n_paths=2, seed=2026)

    # unprojected correction against central differences of G_j^psi, inside psi = 1
    ds = build_system(SimConfig())
    hb = ds.bases.h
    rng = np.random.default_rng(2026)
    fd_err = 0.0
    for _ in range(3):
        m_grid = hb.synthesize(random_state(ds.bases, rng).m)
        assert np.linalg.norm(m_grid, axis=0).max() < 3.0
        for j in range(ds.noise.J):

            def Gpsi(x, j=j):
                return diffusion_G_psi(j, x, ds.noise, ds.psi, ds.lambda1, ds.lambda2)

            fd = oracle_fd_directional(Gpsi, m_grid, Gpsi(m_grid), h=1e-5)
            ex = ito_correction_unprojected(m_grid, ds.noise, ds.psi, ds.lambda1, ds.lambda2, j=j)
            fd_err = max(fd_err, np.abs(ex - fd).max() / np.abs(ex).max())
    runtime = time.perf_counter() - t0
    ok = order >= 0.8 and fd_err <= 1e-5 and runtime < 300.0
    diffs = " ".join(f"{d:.2e}" for _, d in rows)
    assert report(
        3,
        ok,
        f"strong Heun/EM differences {diffs} at dt=2^-6..2^-10 T, observed order {order:.3f} (>= 0.8); "
        f"unprojected correction vs FD {fd_err:.1e} (<= 1e-5); {runtime:.0f}s (< 300s)",
    )


def test_criterion_4_conservation_and_dissipation():
    t0 = time.perf_counter()
    cfg = SimConfig(initial_m="wall")
    system = build_system(cfg)
    initial = build_initial(cfg, system)
    E0 = total_energy(initial, system.bases, system.phi).total
    rows, orders = dt_ladder(system, initial, 1.0, 2e-3, 3, scheme="heun")
    at_1e3 = next(r for r in rows if abs(r["dt"] - 1e-3) < 1e-15)

    # a noisy run for (a)
    steps = 200
    path = BrownianPath.generate(path_seed(2026, 0), 1e-3, steps, system.noise.J)
    noisy = simulate(system, initial, path, record_every=1)
    divb = max(max(r["divB"] for r in rows), float(noisy.column("divB_resid").max()))

    e_res = [r["energy_resid"] for r in rows]
    ratios = [a / b for a, b in zip(e_res, e_res[1:])]
    drifts = [r["norm_drift"] for r in rows]
    increase = max(r["max_energy_increase"] for r in rows)
    runtime = time.perf_counter() - t0
    ok_a = divb <= 1e-12
    ok_b = increase <= 1e-12 * abs(E0) and all(q >= 3.5 for q in ratios)
    ok_c = at_1e3["norm_drift"] <= 1e-6 and orders["norm_drift"] >= 1.8 and drifts[0] > drifts[1] > drifts[2]
    ok = ok_a and ok_b and ok_c and runtime < 300.0
    assert report(
        4,
        ok,
        f"(a) max divB residual {divb:.1e} (<= 1e-12); (b) max energy increase {increase:.1e}, "
        f"energy residual {' '.join(f'{x:.2e}' for x in e_res)} at dt=2e-3,1e-3,5e-4 "
        f"(halving ratios {' '.join(f'{q:.2f}' for q in ratios)}); (c) |M|_H drift {at_1e3['norm_drift']:.2e} "
        f"at dt=1e-3 (<= 1e-6), order {orders['norm_drift']:.2f} (>= 2 declared, 1.8 accepted); {runtime:.0f}s",
    )


BOUND_QUANTITIES = ("sup_M_V_sq", "sup_BmM_sq", "sup_E_sq", "int_mxrho_sq")


def test_criterion_5_a_priori_bounds_independent_of_n():
    t0 = time.perf_counter()
    T, dt, K = 0.2, 2e-3, 64
    stats = {}
    for n in (4, 8):
        cfg = SimConfig(modes=(n, n, n), T=T, dt=dt, ensemble=K)
        system = build_system(cfg)
        stats[n] = run_ensemble(system, build_initial(cfg, system), K, cfg.seed, dt, cfg.steps, record_every=5)
    runtime = time.perf_counter() - t0
    parts = []
    ok = runtime < 900.0 and not stats[4].failures and not stats[8].failures
    for q in BOUND_QUANTITIES:
        a, b = stats[4], stats[8]
        diff = abs(a.mean(q) - b.mean(q))
        se = float(np.hypot(a.stderr(q), b.stderr(q)))
        good = bool(np.isfinite(a.mean(q)) and np.isfinite(b.mean(q)) and diff <= 2.0 * se)
        ok = ok and good
        parts.append(
            f"{q}: {a.mean(q):.6g}+-{a.stderr(q):.1e} vs {b.mean(q):.6g}+-{b.stderr(q):.1e} "
            f"({diff / se if se > 0 else float('inf'):.1f} SE, {'ok' if good else 'outside 2 SE'})"
        )
    assert report(5, ok, f"K=64 at n=4^3 vs 8^3, T={T}: " + "; ".join(parts) + f"; {runtime:.0f}s (< 900s)")


def test_criterion_6_sphere_constraint_ladder():
    t0 = time.perf_counter()
    cfg = SimConfig(initial_m="wall")
    rungs = [((4, 4, 4), 4e-3), ((8, 8, 8), 2e-3), ((16, 16, 16), 1e-3)]
    rows = sphere_ladder(cfg, rungs, 0.5, seed=2026)
    devs = [r[2] for r in rows]
    runtime = time.perf_counter() - t0
    ok = all(b < a for a, b in zip(devs, devs[1:])) and len(rows) >= 3 and runtime < 600.0
    ladder = ", ".join(f"n={m[0]}^3 dt={d:g}: {v:.2e}" for m, d, v, _ in rows)
    assert report(6, ok, f"max node deviation of |M| from 1 at T=0.5: {ladder}; {runtime:.0f}s (< 600s)")


def _digests(root):
    out = {}
    for d, _, files in os.walk(root):
        for f in files:
            p = os.path.join(d, f)
            with open(p, "rb") as fh:
                out[os.path.relpath(p, root)] = hashlib.sha256(fh.read()).hexdigest()
    return out


def test_criterion_7_determinism_and_format(tmp_path):
    cfg = tmp_path / "run.txt"
    cfg.write_text("seed = 11\nT = 0.02\ndt = 1e-3\nrecord_every = 2\nsnapshot_every = 10\n")
    codes = [main(["run", str(cfg), "--out", str(tmp_path / d)]) for d in ("a", "b")]
    da, db = _digests(tmp_path / "a"), _digests(tmp_path / "b")
    same = codes == [0, 0] and da == db and len(da) == 5

    # bit-exact round trip of the written snapshots and of a random state
    exact = True
    for name in da:
        if name.endswith(".bin"):
            p = tmp_path / "a" / name
            st, K = read_snapshot(p)
            exact = exact and encode_snapshot(st, K) == p.read_bytes()
    rng = np.random.default_rng(7)
    s = GalerkinState(rng.standard_normal((3, 2, 3, 4)), rng.standard_normal((3, 75)), rng.standard_normal((3, 75)), 0.3)
    back, _ = decode_snapshot(encode_snapshot(s, (2, 2, 1)))
    exact = exact and all(x.tobytes() == y.tobytes() for x, y in ((s.m, back.m), (s.b, back.b), (s.e, back.e)))

    with open(GOLDEN, "rb") as fh:
        gold = fh.read()
    golden_ok = hashlib.sha256(gold).hexdigest() == GOLDEN_SHA256 and encode_snapshot(golden_state(), (1, 1, 1)) == gold
    ok = same and exact and golden_ok
    assert report(
        7,
        ok,
        f"two runs byte-identical ({len(da)} files): {same}; snapshot round trip bit-exact: {exact}; "
        f"golden little-endian snapshot validates: {golden_ok}",
    )
