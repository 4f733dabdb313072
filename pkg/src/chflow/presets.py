"""Analytic initial profiles for the harness.

Every preset builds an InitialProfile with vectorised u0/u0x callables.
Peakon-type derivatives return the left limit at the crest, matching the
sampling convention of the chart transform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .chart import InitialProfile

PRESET_NAMES = (
    "zero",
    "gaussian",
    "cosine_bump",
    "peakon",
    "antipeakon",
    "peakon_antipeakon",
)

# Half-width of the numerically relevant support of a unit peakon:
# e^-20 ~ 2e-9 relative tail.
_PEAKON_REACH = 20.0


@dataclass
class Preset:
    """Named analytic profile with its parameters.

    Parameters (all optional, with defaults): amplitude, center, width
    (gaussian / cosine_bump) and separation (peakon_antipeakon; the default
    6 puts the collision near t = 3.7 and the crest recovery near t = 4.25,
    both inside a [0, 5] run).
    """

    name: str
    amplitude: float = 1.0
    center: float = 0.0
    width: float = 1.0
    separation: float = 6.0

    def __post_init__(self):
        if self.name not in PRESET_NAMES:
            raise ValueError(f"unknown preset {self.name!r}; choose from {PRESET_NAMES}")
        if self.name in ("gaussian", "cosine_bump") and self.width <= 0.0:
            raise ValueError("width must be positive")
        if self.name == "peakon_antipeakon" and self.separation <= 0.0:
            raise ValueError("separation must be positive")

    def profile(self) -> InitialProfile:
        build = _BUILDERS[self.name]
        return build(self)

    def params(self) -> Dict[str, float]:
        return {
            "amplitude": self.amplitude,
            "center": self.center,
            "width": self.width,
            "separation": self.separation,
        }


def make_preset(name: str, **params) -> Preset:
    return Preset(name=name, **params)


def make_profile(name: str, **params) -> InitialProfile:
    return Preset(name=name, **params).profile()


def _zero(p: Preset) -> InitialProfile:
    return InitialProfile(
        u0=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        u0x=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        support_hint=(-1.0, 1.0),
    )


def _gaussian(p: Preset) -> InitialProfile:
    c, x0, w = p.amplitude, p.center, p.width

    def u0(x):
        z = (np.asarray(x, dtype=float) - x0) / w
        return c * np.exp(-z * z)

    def u0x(x):
        z = (np.asarray(x, dtype=float) - x0) / w
        return (-2.0 * z / w) * c * np.exp(-z * z)

    return InitialProfile(u0=u0, u0x=u0x, support_hint=(x0 - 9.0 * w, x0 + 9.0 * w))


def _cosine_bump(p: Preset) -> InitialProfile:
    c, x0, w = p.amplitude, p.center, p.width

    def u0(x):
        z = (np.asarray(x, dtype=float) - x0) / w
        inside = np.abs(z) < 1.0
        return np.where(inside, 0.5 * c * (1.0 + np.cos(np.pi * z)), 0.0)

    def u0x(x):
        z = (np.asarray(x, dtype=float) - x0) / w
        inside = np.abs(z) < 1.0
        return np.where(inside, -0.5 * c * np.pi / w * np.sin(np.pi * z), 0.0)

    return InitialProfile(u0=u0, u0x=u0x, support_hint=(x0 - w, x0 + w))


def _peakon_pair(x, c, q):
    """Value and left-limit derivative of c * exp(-|x - q|)."""
    x = np.asarray(x, dtype=float)
    val = c * np.exp(-np.abs(x - q))
    # left branch (x <= q) has slope +c e^{x-q}; right branch -c e^{q-x}
    der = np.where(x <= q, c * np.exp(x - q), -c * np.exp(q - x))
    return val, der


def _single_peakon(p: Preset, sign: float) -> InitialProfile:
    c, x0 = sign * p.amplitude, p.center
    reach = _PEAKON_REACH + np.log1p(abs(c))

    def u0(x):
        return _peakon_pair(x, c, x0)[0]

    def u0x(x):
        return _peakon_pair(x, c, x0)[1]

    return InitialProfile(u0=u0, u0x=u0x, support_hint=(x0 - reach, x0 + reach))


def _peakon(p: Preset) -> InitialProfile:
    return _single_peakon(p, +1.0)


def _antipeakon(p: Preset) -> InitialProfile:
    return _single_peakon(p, -1.0)


def _peakon_antipeakon(p: Preset) -> InitialProfile:
    c, x0, d = p.amplitude, p.center, p.separation
    ql, qr = x0 - 0.5 * d, x0 + 0.5 * d
    reach = 0.5 * d + _PEAKON_REACH + np.log1p(abs(c))

    def u0(x):
        return _peakon_pair(x, c, ql)[0] + _peakon_pair(x, -c, qr)[0]

    def u0x(x):
        return _peakon_pair(x, c, ql)[1] + _peakon_pair(x, -c, qr)[1]

    return InitialProfile(u0=u0, u0x=u0x, support_hint=(x0 - reach, x0 + reach))


_BUILDERS: Dict[str, object] = {
    "zero": _zero,
    "gaussian": _gaussian,
    "cosine_bump": _cosine_bump,
    "peakon": _peakon,
    "antipeakon": _antipeakon,
    "peakon_antipeakon": _peakon_antipeakon,
}
