"""Nonlocal fields P, P_x and the characteristic speed G on a chart state.

P is the Helmholtz-type source  P = (1/2) e^{-|x|} * (u^2 + u_x^2/2).  In
the adapted coordinate the convolution becomes a beta-integral of the
bounded density

    f = u^2 cos^2(v/2) + (1/2) sin^2(v/2),

with kernel exponent equal to the x-distance between markers.  Since the
kernel factorises over intervals, e^{-(x_k - x_i)} = prod e^{-dx}, both P
and P_x follow from one left and one right exponential prefix scan in O(N).
`convolution_oracle` keeps the O(N^2) direct sum: identical numbers up to
round-off, different summation order.

The signed split for P_x is taken in marker (beta) order with the self term
weighted zero; markers sharing one x (a breaking plateau) contribute with
kernel factor e^0 = 1, which keeps the sums well defined through collisions.

G is the speed of the adapted coordinate along a characteristic:

    G = u + int_-inf^beta (u^2 - P) sin v dbeta',

the cumulative term being the beta form of int 2 (u^2 - P) u_x dx.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import ChartState, _cumtrapz

# Maximum kernel exponent handled by a single scan segment; wider states are
# processed in segments to keep exp() within double range.
_SEGMENT_WIDTH = 500.0

# Half-angle threshold (on cos^2(v/2)) delimiting the smooth region where
# u_x = tan(v/2) is reliable: |v| < pi - 0.1.
SMOOTH_XBETA_MIN = np.sin(0.05) ** 2


class NoSmoothRegionError(RuntimeError):
    """No sub-interval away from breaking; the diagnostic is unavailable."""


@dataclass
class NonlocalFields:
    """P, P_x, G sampled at the markers, plus the L1 norm of the source.

    sup|P| and sup|P_x| are bounded by sourceL1 / 2 for any ordered state;
    `energy` (when attached by the caller) equals the discrete total energy.
    """

    P: np.ndarray
    Px: np.ndarray
    G: np.ndarray
    sourceL1: float


def source_density(state: ChartState) -> np.ndarray:
    """Beta-density of u^2 + u_x^2/2:  u^2 cos^2(v/2) + sin^2(v/2)/2."""
    c = np.cos(0.5 * state.v) ** 2
    return state.u ** 2 * c + 0.5 * (1.0 - c)


def _exp_decay_scan(x: np.ndarray, s: np.ndarray) -> np.ndarray:
    """A_i = sum_{j<=i} s_j exp(-(x_i - x_j)) for non-decreasing x.

    Evaluated segment-wise: within a segment the sum is a cumulative sum of
    s_j / exp(-(x_j - x_seg)) rescaled by exp(-(x_i - x_seg)); the segment
    carry transfers through a single kernel factor.  All terms are >= 0 for
    s >= 0, so no cancellation occurs.
    """
    n = x.size
    out = np.empty(n)
    start = 0
    carry = 0.0
    x_prev = x[0]
    while start < n:
        stop = int(np.searchsorted(x, x[start] + _SEGMENT_WIDTH, side="right"))
        stop = max(stop, start + 1)
        seg = slice(start, stop)
        rel = x[seg] - x[start]
        decay = np.exp(-rel)
        head = carry * np.exp(-(x[start] - x_prev))
        out[seg] = decay * (head + np.cumsum(s[seg] / decay))
        carry = out[stop - 1]
        x_prev = x[stop - 1]
        start = stop
    return out


def _kernel_prefixes(state: ChartState):
    """Left and right decayed prefix sums (A, B) and the weighted source s."""
    s = state.quad_weights * source_density(state)
    xs = state.sanitized_x()
    A = _exp_decay_scan(xs, s)
    B = _exp_decay_scan(-xs[::-1], s[::-1])[::-1]
    return A, B, s


def compute_P(state: ChartState) -> np.ndarray:
    """P at the markers via the O(N) prefix scans."""
    A, B, s = _kernel_prefixes(state)
    return 0.5 * (A + B - s)


def compute_Px(state: ChartState) -> np.ndarray:
    """P_x at the markers: half the right sum minus the left sum."""
    A, B, _ = _kernel_prefixes(state)
    return 0.5 * (B - A)


def compute_G(state: ChartState, P: np.ndarray) -> np.ndarray:
    """Characteristic speed of beta: u + cumtrapz((u^2 - P) sin v, beta)."""
    g = (state.u ** 2 - P) * np.sin(state.v)
    return state.u + _cumtrapz(g, state.beta)


def compute_fields(state: ChartState) -> NonlocalFields:
    """All nonlocal fields with one pair of scans."""
    A, B, s = _kernel_prefixes(state)
    P = 0.5 * (A + B - s)
    Px = 0.5 * (B - A)
    G = compute_G(state, P)
    sourceL1 = float(np.sum(s))
    return NonlocalFields(P=P, Px=Px, G=G, sourceL1=sourceL1)


def convolution_oracle(state: ChartState, block: int = 512):
    """O(N^2) direct evaluation of the same quadrature sums.

    Same weights, same kernel factors, same signed split by marker index;
    only the summation order differs from the fast path.  Returns (P, Px).
    """
    s = state.quad_weights * source_density(state)
    xs = state.sanitized_x()
    n = xs.size
    P = np.empty(n)
    Px = np.empty(n)
    idx = np.arange(n)
    for a in range(0, n, block):
        b = min(a + block, n)
        K = np.exp(-np.abs(xs[a:b, None] - xs[None, :])) * s[None, :]
        P[a:b] = 0.5 * K.sum(axis=1)
        sign = np.sign(idx[None, :] - idx[a:b, None])
        Px[a:b] = 0.5 * (sign * K).sum(axis=1)
    return P, Px


def pxx_residual(state: ChartState) -> float:
    """sup |D_x^2 P - (P - u^2 - u_x^2/2)| over smooth interior markers.

    P satisfies P_xx = P - u^2 - u_x^2/2 away from breaking.  D_x^2 is the
    three-point second difference on the (non-uniform) marker positions;
    u_x = tan(v/2) is used only where cos^2(v/2) stays above the smooth
    threshold (|v| < pi - 0.1) for the marker and both neighbours.
    """
    c = np.cos(0.5 * state.v) ** 2
    smooth = c > SMOOTH_XBETA_MIN
    ok = smooth[1:-1] & smooth[:-2] & smooth[2:]
    x = state.sanitized_x()
    hm = x[1:-1] - x[:-2]
    hp = x[2:] - x[1:-1]
    ok &= (hm > 0.0) & (hp > 0.0)
    if not np.any(ok):
        raise NoSmoothRegionError("no smooth sub-interval to difference on")
    P = compute_P(state)
    d2 = 2.0 * (
        P[:-2] / (hm * (hm + hp))
        - P[1:-1] / (hm * hp)
        + P[2:] / (hp * (hm + hp))
    )
    ux = np.tan(0.5 * state.v[1:-1])
    rhs = P[1:-1] - state.u[1:-1] ** 2 - 0.5 * ux ** 2
    return float(np.max(np.abs(d2[ok] - rhs[ok])))
