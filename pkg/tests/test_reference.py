"""Uniform-grid oracle: agreement with the chart solver, guard behavior."""

import numpy as np
import pytest

from chflow import (
    ReferenceAbort,
    RunConfig,
    evolve,
    make_preset,
    reference_solver,
    sample_u,
    transform_initial,
)


def chart_final(preset_name, t_end, n, dt=1e-3, **params):
    profile = make_preset(preset_name, **params).profile()
    state0 = transform_initial(profile, n)
    hist = evolve(state0, RunConfig(t_end=t_end, dt=dt, snap_every=10 ** 9,
                                    n_markers=n))
    return profile, hist.snapshots[-1]


def test_zero_profile_stays_zero():
    profile = make_preset("zero").profile()
    snap = reference_solver(profile, t_end=0.3, n_grid=512)
    assert np.all(snap.u_vals == 0.0)
    assert snap.t == 0.3


def test_agrees_with_chart_solver_on_smooth_run():
    profile, final = chart_final("gaussian", t_end=0.5, n=2048)
    snap = reference_solver(profile, t_end=0.5, n_grid=2048)
    lo, hi = profile.support_hint
    grid = np.linspace(lo, hi, 1001)
    gap = np.max(np.abs(sample_u(final, grid) - np.interp(grid, snap.x_grid,
                                                          snap.u_vals)))
    assert gap <= 1e-3


def test_tracks_peakon_before_breaking():
    # short horizon: the kink stays within what central differences resolve
    profile, final = chart_final("peakon", t_end=0.2, n=4096)
    snap = reference_solver(profile, t_end=0.2, n_grid=8192)
    grid = np.linspace(-6.0, 6.0, 1201)
    gap = np.max(np.abs(sample_u(final, grid) - np.interp(grid, snap.x_grid,
                                                          snap.u_vals)))
    assert gap <= 1e-2


def test_gradient_guard_trips_on_steep_data():
    profile = make_preset("peakon", amplitude=26.0).profile()
    with pytest.raises(ReferenceAbort, match="guard"):
        reference_solver(profile, t_end=0.05, n_grid=4096)


def test_reference_is_deterministic():
    profile = make_preset("gaussian").profile()
    a = reference_solver(profile, t_end=0.1, n_grid=1024)
    b = reference_solver(profile, t_end=0.1, n_grid=1024)
    assert np.array_equal(a.u_vals, b.u_vals)


def test_reference_input_validation():
    profile = make_preset("zero").profile()
    with pytest.raises(ValueError):
        reference_solver(profile, t_end=-1.0)
    with pytest.raises(ValueError):
        reference_solver(profile, t_end=0.1, n_grid=4)
