"""Shared fixtures: solution histories at module-test scale and state factories."""

import numpy as np
import pytest
from hypothesis import settings

from chflow import RunConfig, evolve, make_profile, transform_initial
from chflow.chart import ChartState

settings.register_profile("suite", deadline=None, max_examples=25)
settings.load_profile("suite")


def make_random_state(rng, n=None, span=None, with_ties=False):
    """A structurally valid chart state with random fields.

    x increments follow the trapezoid rule on the chart slope cos^2(v/2),
    the same quadrature the consistency residual uses, so the state
    satisfies the 1-Lipschitz inequality exactly; with_ties pins v to pi
    at both ends of a few cells, collapsing them into genuine plateaus.
    """
    if n is None:
        n = int(rng.integers(3, 400))
    if span is None:
        span = float(rng.uniform(1.0, 500.0))
    beta = np.sort(rng.uniform(-span, span, n))
    while np.any(np.diff(beta) <= 0):
        beta = np.sort(rng.uniform(-span, span, n))
    v = rng.uniform(-np.pi, np.pi, n)
    if with_ties and n > 10:
        j = rng.integers(0, n - 1, 3)
        v[j] = np.pi
        v[j + 1] = np.pi
    c = np.cos(0.5 * v) ** 2
    dx = 0.5 * (c[:-1] + c[1:]) * np.diff(beta)
    x = np.concatenate([[0.0], np.cumsum(dx)]) - span / 3.0
    u = rng.uniform(-2.0, 2.0, n)
    return ChartState(t=0.0, label=beta.copy(), beta=beta, x=x, u=u, v=v)


def exact_peakon_chart(n=4201, half_width=21.0):
    """Closed-form unit-peakon chart with the crest exactly on a marker.

    beta(x) = x + e^{2x}/2 for x < 0 and 1 + x - e^{-2x}/2 for x >= 0;
    markers sit at uniform labels with the crest label 0.5 on the grid.
    The crest marker takes the left-limit slope (v = +pi/2).
    """
    d = 2.0 * half_width / (n - 1)
    k = (n - 1) // 2
    beta = 0.5 + d * (np.arange(n) - k)

    x = np.empty(n)
    left = beta < 0.5
    # invert beta = x + e^{2x}/2 (x<0) and beta = 1 + x - e^{-2x}/2 (x>=0)
    bl = beta[left]
    xl = np.where(bl < 0, bl, 0.0)
    for _ in range(60):
        xl = xl - (xl + 0.5 * np.exp(2 * xl) - bl) / (1 + np.exp(2 * xl))
    x[left] = xl
    br = beta[~left]
    xr = np.where(br > 1, br - 1, 0.0)
    for _ in range(60):
        xr = xr - (1 + xr - 0.5 * np.exp(-2 * xr) - br) / (1 + np.exp(-2 * xr))
    x[~left] = xr
    x[k] = 0.0

    u = np.exp(-np.abs(x))
    ux = np.where(x < 0, u, -u)
    ux[k] = 1.0  # left limit at the kink
    v = 2.0 * np.arctan(ux)
    return ChartState(t=0.0, label=beta.copy(), beta=beta.copy(), x=x, u=u, v=v)


def aligned_peakon_span(n, half_width=31.2):
    """A beta span placing the label 0.5 exactly on the uniform grid."""
    d = 2.0 * half_width / (n - 1)
    k = n // 2
    return (0.5 - k * d, 0.5 + (n - 1 - k) * d)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def random_state_factory():
    return make_random_state


@pytest.fixture(scope="session")
def peakon_aligned_history():
    span = aligned_peakon_span(1024)
    state = transform_initial(make_profile("peakon"), 1024, beta_span=span)
    return evolve(state, RunConfig(t_end=2.0, dt=1e-3, snap_every=50))


@pytest.fixture(scope="session")
def gaussian_history():
    state = transform_initial(make_profile("gaussian"), 1024)
    return evolve(state, RunConfig(t_end=1.0, dt=1e-3, snap_every=50))


@pytest.fixture(scope="session")
def pair_history():
    state = transform_initial(make_profile("peakon_antipeakon"), 1024)
    return evolve(state, RunConfig(t_end=4.5, dt=1e-3, snap_every=25))


@pytest.fixture(scope="session")
def zero_history():
    state = transform_initial(make_profile("zero"), 128)
    return evolve(state, RunConfig(t_end=1.0, dt=1e-3, snap_every=100))
