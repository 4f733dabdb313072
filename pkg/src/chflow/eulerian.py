"""Conversion from chart states back to Eulerian profiles.

The map beta -> x is non-decreasing and flattens to plateaus exactly
where the solution breaks (cos^2(v/2) = 0), so inversion is set-valued
there; the conventions below (plateau midpoint, undefined derivative
near |v| = pi) make every operation total without inventing values the
chart does not carry.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .chart import ChartState

__all__ = [
    "EulerianSnapshot",
    "EnergyMeasure",
    "PLATEAU_EPS",
    "UX_UNDEFINED_MARGIN",
    "wrap_angle",
    "invert_chart",
    "sample_u",
    "sample_ux",
    "energy_measure",
]

# cos^2(v/2) at or below this is treated as a breaking plateau: far below
# any resolved smooth value at practical marker counts, far above
# rounding noise.
PLATEAU_EPS = 1e-8

# |v| within this of pi means u_x = tan(v/2) has blown up; report the
# derivative as undefined (NaN) rather than a huge finite number.
UX_UNDEFINED_MARGIN = 1e-4


def wrap_angle(v):
    """Reduce an unwrapped angle into [-pi, pi)."""
    return (np.asarray(v, dtype=float) + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class EulerianSnapshot:
    """u (and u_x where defined) sampled on an x grid at one time."""

    t: float
    x_grid: np.ndarray
    u_vals: np.ndarray
    ux_vals: np.ndarray  # NaN marks points where the derivative is undefined

    def __post_init__(self):
        if not (len(self.x_grid) == len(self.u_vals) == len(self.ux_vals)):
            raise ValueError("grid and value arrays must have equal length")


@dataclass(frozen=True)
class EnergyMeasure:
    """Split of the energy measure into absolutely continuous and singular parts.

    x_grid is the marker x array; ac_density holds u_x^2 = tan^2(v/2) at
    smooth markers and 0.0 inside singular runs (whose energy lives in
    singular_intervals instead).  Each singular mass is the beta-integral
    of sin^2(v/2) over its run; ac_mass is the exact complement, so

        ac_mass + singular_mass + u_sq_mass == energy(state)

    holds to rounding.
    """

    x_grid: np.ndarray
    ac_density: np.ndarray
    singular_intervals: tuple  # ((x, mass), ...) one entry per plateau run
    ac_mass: float
    singular_mass: float
    u_sq_mass: float

    @property
    def total(self) -> float:
        return self.ac_mass + self.singular_mass + self.u_sq_mass


def invert_chart(state: ChartState, x):
    """Smallest-cell beta* with x(beta*) = x; plateau queries get the midpoint.

    Binary search on the monotone marker x array plus linear
    interpolation inside cells.  Queries outside the chart's x range are
    clamped (with a warning) to the nearest end.
    """
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    xs = state.sanitized_x()
    beta = state.beta

    lo, hi = xs[0], xs[-1]
    if np.any(xq < lo) or np.any(xq > hi):
        warnings.warn("query x outside the chart range; clamped to the ends")
        xq = np.clip(xq, lo, hi)

    left = np.searchsorted(xs, xq, side="left")
    right = np.searchsorted(xs, xq, side="right")
    out = np.empty_like(xq)

    exact = right > left  # query hits one or more markers exactly
    if np.any(exact):
        i0 = left[exact]
        i1 = right[exact] - 1
        out[exact] = 0.5 * (beta[i0] + beta[i1])

    inside = ~exact
    if np.any(inside):
        i = np.clip(left[inside], 1, len(xs) - 1)
        x0 = xs[i - 1]
        x1 = xs[i]
        # inside a cell the two ends differ (ties were caught by `exact`)
        frac = (xq[inside] - x0) / (x1 - x0)
        out[inside] = beta[i - 1] + frac * (beta[i] - beta[i - 1])

    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out[0])
    return out


def sample_u(state: ChartState, x_grid):
    """u on an x grid, read through the chart: u(x) = u(beta*(x)).

    Linear interpolation in beta; on plateaus the midpoint convention is
    immaterial because u is constant across a plateau (the 1/2-Lipschitz
    bound applied to zero x-gap).
    """
    bstar = np.atleast_1d(invert_chart(state, x_grid))
    vals = np.interp(bstar, state.beta, state.u)
    if np.isscalar(x_grid) or np.ndim(x_grid) == 0:
        return float(vals[0])
    return vals


def sample_ux(state: ChartState, x_grid):
    """u_x on an x grid where defined, NaN where |v| is within 1e-4 of pi."""
    bstar = np.atleast_1d(invert_chart(state, x_grid))
    vstar = wrap_angle(np.interp(bstar, state.beta, state.v))
    out = np.full(vstar.shape, np.nan)
    ok = np.abs(vstar) < np.pi - UX_UNDEFINED_MARGIN
    out[ok] = np.tan(0.5 * vstar[ok])
    if np.isscalar(x_grid) or np.ndim(x_grid) == 0:
        return float(out[0])
    return out


def energy_measure(state: ChartState, plateau_eps: float = PLATEAU_EPS) -> EnergyMeasure:
    """Decompose the energy of a state into ac density plus singular atoms.

    Markers with cos^2(v/2) <= plateau_eps are grouped into maximal runs;
    each run becomes one singular interval at the x of its leftmost
    marker.  A run's mass is the trapezoid integral of sin^2(v/2) over
    its own beta interval (a lone flagged marker keeps its full weight,
    having no interior).  The transition half-cells at the run edges go
    to the ac side, so ac is the exact complement and the three masses
    sum to energy(state) to rounding.
    """
    if plateau_eps <= 0:
        raise ValueError("plateau_eps must be positive")
    w = state.quad_weights
    c = state.xbeta
    s = np.sin(0.5 * state.v) ** 2
    singular = c <= plateau_eps

    ac_density = np.zeros(state.n)
    smooth = ~singular
    ac_density[smooth] = np.tan(0.5 * wrap_angle(state.v[smooth])) ** 2

    intervals = []
    singular_mass = 0.0
    idx = np.flatnonzero(singular)
    if idx.size:
        # split the flagged indices into maximal consecutive runs
        cuts = np.flatnonzero(np.diff(idx) > 1) + 1
        for run in np.split(idx, cuts):
            if run.size >= 2:
                mass = float(np.trapezoid(s[run], state.beta[run]))
            else:
                mass = float(s[run[0]] * w[run[0]])
            intervals.append((float(state.x[run[0]]), mass))
            singular_mass += mass

    u_sq_mass = float(np.sum(state.u ** 2 * c * w))
    total = float(np.sum((state.u ** 2 * c + s) * w))
    ac_mass = total - u_sq_mass - singular_mass
    return EnergyMeasure(
        x_grid=state.x.copy(), ac_density=ac_density,
        singular_intervals=tuple(intervals), ac_mass=ac_mass,
        singular_mass=singular_mass, u_sq_mass=u_sq_mass)
