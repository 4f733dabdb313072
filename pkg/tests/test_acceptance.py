"""Release acceptance gate: eight criteria, one scorecard line each.

Every test prints `ACCEPTANCE n: PASS/FAIL (measured values)` before
asserting the criterion at its stated tolerance, so a full run always
yields the complete scorecard (with -rA the lines also appear for
passing tests).  The tolerances are release requirements, not tuned to
fit the implementation: criteria 1, 2, 3 and 6 are red on a pinned
marker grid because a fixed chart partition starves the peakon crest of
markers over long horizons.  README.md documents the mechanism and the
measured floors; the module test suites pin the attainable behavior.
"""

import numpy as np
import pytest

from chflow import (
    RunConfig,
    compute_P,
    compute_Px,
    convolution_oracle,
    evolve,
    lipschitz_excess,
    make_profile,
    picard_trace,
    pxx_residual,
    reference_solver,
    sample_u,
    separation_bound,
    transform_initial,
    verify_ucar,
)
from conftest import make_random_state

RUN_SIZES = {
    "gaussian": 4096,
    "peakon": 4096,
    "peakon_antipeakon": 4096,
    "cosine_bump": 2048,
    "antipeakon": 2048,
    "zero": 256,
}


def scoreline(num, ok, details):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} ({details})")


def drift_of(history):
    e = np.array([d.energy for d in history.diagnostics_series])
    if e[0] == 0.0:
        return float(np.max(np.abs(e)))
    return float(np.max(np.abs(e - e[0])) / abs(e[0]))


@pytest.fixture(scope="module")
def runs():
    out = {}
    for name, n in RUN_SIZES.items():
        state = transform_initial(make_profile(name), n)
        out[name] = evolve(state, RunConfig(t_end=5.0, dt=1e-3, snap_every=50,
                                            n_markers=n))
    return out


def test_criterion_1_energy_conservation(runs):
    drifts = {name: drift_of(runs[name])
              for name in ("gaussian", "peakon", "peakon_antipeakon")}
    ok = all(d <= 1e-4 for d in drifts.values())
    scoreline(1, ok, ", ".join(f"{k} {v:.3e}" for k, v in drifts.items())
              + " vs 1e-4")
    assert ok, drifts


def test_criterion_2_peakon_transport(runs):
    grid = np.linspace(-12.0, 17.0, 2901)
    worst = 0.0
    for state in runs["peakon"].snapshots:
        exact = np.exp(-np.abs(grid - state.t))
        worst = max(worst, float(np.max(np.abs(sample_u(state, grid) - exact))))
    ok = worst <= 1e-2
    scoreline(2, ok, f"sup error {worst:.3e} vs 1e-2 over t in [0, 5]")
    assert ok, worst


def test_criterion_3_conservative_collision(runs):
    hist = runs["peakon_antipeakon"]
    sup_u = np.array([d.sup_u for d in hist.diagnostics_series])
    min_c = np.array([d.min_xbeta for d in hist.diagnostics_series])
    k = int(np.argmin(min_c))
    u0 = float(sup_u[0])
    drift = drift_of(hist)
    recovery = float(np.max(sup_u[k + 1:])) if k + 1 < sup_u.size else 0.0

    breaking = min_c[k] <= 1e-3
    quiet = sup_u[k] <= 0.1 * u0
    energy = drift <= 1e-4
    recovered = recovery >= 0.5 * u0
    ok = breaking and quiet and energy and recovered
    scoreline(3, ok,
              f"min cos2 {min_c[k]:.3e}, collision sup|u| {sup_u[k]:.4f} "
              f"vs {0.1 * u0:.4f}, drift {drift:.3e} vs 1e-4, "
              f"recovery {recovery:.4f} vs {0.5 * u0:.4f}")
    assert ok, (breaking, quiet, energy, recovered)


def test_criterion_4_fast_kernel_and_pxx_order():
    rng = np.random.default_rng(42)
    worst = 0.0
    for trial in range(100):
        state = make_random_state(rng, with_ties=(trial % 5 == 0))
        P, Px = compute_P(state), compute_Px(state)
        Po, Pxo = convolution_oracle(state)
        scale = max(1.0, float(np.max(np.abs(Po))), float(np.max(np.abs(Pxo))))
        worst = max(worst, float(np.max(np.abs(P - Po))) / scale,
                    float(np.max(np.abs(Px - Pxo))) / scale)

    residuals = [pxx_residual(transform_initial(make_profile("gaussian"), n))
                 for n in (2048, 4096, 8192)]
    orders = [float(np.log2(residuals[i] / residuals[i + 1])) for i in range(2)]

    ok = worst <= 1e-12 and all(abs(o - 2.0) <= 0.4 for o in orders)
    scoreline(4, ok, f"fast-vs-oracle {worst:.3e} vs 1e-12, pxx orders "
              + ", ".join(f"{o:.2f}" for o in orders) + " vs 2")
    assert ok, (worst, orders)


def test_criterion_5_characteristic_tracing(runs):
    hist = runs["peakon"]
    state0 = hist.snapshots[0]
    n = state0.n
    worst_ratio = 0.0
    worst_gap = 0.0
    for i in (n // 4, n // 2, (3 * n) // 4):
        path = picard_trace(hist, float(state0.label[i]))
        if path.contraction_ratios:
            worst_ratio = max(worst_ratio, max(path.contraction_ratios))
        marker = np.array([s.beta[i] for s in hist.snapshots])
        worst_gap = max(worst_gap,
                        float(np.max(np.abs(path.beta_path - marker))))

    res = []
    for dt in (2e-3, 1e-3):
        h = evolve(transform_initial(make_profile("peakon"), 4096),
                   RunConfig(t_end=2.0, dt=dt, snap_every=50, n_markers=4096))
        res.append(verify_ucar(h, picard_trace(h, 0.5)))

    ok = (worst_ratio < 1.0 and worst_gap <= 1e-2
          and res[0] <= 1e-2 and res[1] < res[0])
    scoreline(5, ok, f"contraction {worst_ratio:.3f} vs 1, path gap "
                     f"{worst_gap:.3e} vs 1e-2, ucar {res[0]:.3e} -> {res[1]:.3e}")
    assert ok, (worst_ratio, worst_gap, res)


def test_criterion_6_chart_lipschitz_invariants(runs):
    worst = {}
    for name, hist in runs.items():
        wx = wu = 0.0
        for s in hist.snapshots:
            ex, eu = lipschitz_excess(s)
            wx, wu = max(wx, ex), max(wu, eu)
        worst[name] = (wx, wu)
    ok = all(wx <= 1e-6 and wu <= 1e-6 for wx, wu in worst.values())
    top = max(worst.items(), key=lambda kv: max(kv[1]))
    scoreline(6, ok, f"worst run {top[0]}: x excess {top[1][0]:.3e}, "
                     f"u excess {top[1][1]:.3e} vs 1e-6")
    assert ok, worst


def test_criterion_7_differential_oracle():
    profile = make_profile("gaussian")
    hist = evolve(transform_initial(profile, 4096),
                  RunConfig(t_end=0.5, dt=1e-3, snap_every=500, n_markers=4096))
    snap = reference_solver(profile, 0.5, n_grid=4096)
    lo, hi = profile.support_hint
    grid = np.linspace(lo, hi, 2001)
    gap = float(np.max(np.abs(
        sample_u(hist.snapshots[-1], grid)
        - np.interp(grid, snap.x_grid, snap.u_vals))))
    ok = gap <= 1e-3
    scoreline(7, ok, f"L-inf gap {gap:.3e} vs 1e-3 at t = 0.5")
    assert ok, gap


def test_criterion_8_gronwall_separation(runs):
    reports = {name: separation_bound(hist, 0.4, 0.6)
               for name, hist in runs.items()}
    ok = all(r.within_bounds for r in reports.values())
    scoreline(8, ok, ", ".join(f"{k} C={r.c_measured:.3f}"
                               for k, r in reports.items()))
    assert ok, {k: r.within_bounds for k, r in reports.items()}
