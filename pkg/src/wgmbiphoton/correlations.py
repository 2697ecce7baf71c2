"""Closed-form pair correlations for the four signal/idler path configurations.

Valid to first order in the intracavity pump energies. Delays are
``tau = t_s - t_i``. The ``tau >= 0`` branch decays at the signal rate and
oscillates at ``beta_s``; the ``tau < 0`` branch uses the idler mode.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import NumericalError, ParameterError


class PathConfig(str, Enum):
    FF = "ff"
    FB = "fb"
    BF = "bf"
    BB = "bb"

    @property
    def label(self):
        s, i = self.value
        return f"S{s.upper()}-I{i.upper()}"


CONFIGS = tuple(PathConfig)
WEAK_DRIVE_LIMIT = 0.01


@dataclass(frozen=True)
class DeviceConstants:
    n_const: float
    c0: float
    c1: float
    c2: float
    c3: float
    gamma_t: float


def device_constants(device):
    s, i = device.signal, device.idler
    if not (s.gamma_t > 0 and i.gamma_t > 0):
        raise ParameterError("signal and idler decay rates must be positive", "gamma")
    gt = s.gamma_t + i.gamma_t
    bs, bi = s.beta, i.beta
    c0 = (4 * bs**2 + 4 * bi**2 + gt**2) * gt
    c1 = 8 * bs * bi * gt
    c2 = 8 * bi**3 - 8 * bs**2 * bi + 2 * bi * gt**2
    c3 = 8 * bs**3 - 8 * bs * bi**2 + 2 * bs * gt**2
    den = (c0 - c1) * (c0 + c1)
    if den == 0:
        raise ParameterError("degenerate device: (c0 - c1)(c0 + c1) = 0", "beta")
    n = 4 * s.gamma_e * i.gamma_e * gt**4 * device.g**2 / den**2
    return DeviceConstants(n, c0, c1, c2, c3, gt)


def _coefficients(k, f, b, phi):
    x = f * np.exp(-1j * phi)
    y = b
    p = k.c0 * x - k.c1 * y
    q = k.c3 * x + k.c2 * y
    r = k.c2 * x + k.c3 * y
    s = k.c1 * x - k.c0 * y
    return p, q, r, s


def _amplitude_pairs(k, f, b, phi):
    """(cos, sin) coefficients per config for the two branches."""
    p, q, r, s = _coefficients(k, f, b, phi)
    pos = {"ff": (p, -q), "fb": (r, -s), "bf": (q, p), "bb": (-s, -r)}
    neg = {"ff": (p, r), "fb": (r, -p), "bf": (q, s), "bb": (-s, q)}
    return pos, neg


def weak_drive_ratio(device, pump):
    """Largest pump-induced nonlinear rate relative to the pump linewidth."""
    return device.g * max(pump.f, pump.b) / device.pump.gamma_t


def _check_weak(device, pump):
    ratio = weak_drive_ratio(device, pump)
    if ratio > WEAK_DRIVE_LIMIT:
        warnings.warn(
            f"g*f/Gamma_tp = {ratio:.3g} exceeds {WEAK_DRIVE_LIMIT}; "
            "first-order correlations may be inaccurate",
            stacklevel=3,
        )


def envelope_constant(device, pump):
    """Value of the four-configuration sum at zero delay (absolute units)."""
    k = device_constants(device)
    p, q, r, s = _coefficients(k, pump.f, pump.b, pump.phi)
    return k.n_const * (abs(p) ** 2 + abs(q) ** 2 + abs(r) ** 2 + abs(s) ** 2)


def envelope(device, tau):
    tau = np.asarray(tau, dtype=float)
    return np.where(
        tau >= 0,
        np.exp(-device.signal.gamma_t * np.clip(tau, 0, None)),
        np.exp(device.idler.gamma_t * np.clip(tau, None, 0)),
    )


def pair_correlation(device, pump, config, tau, normalized=False):
    """Pair-correlation density for one path configuration.

    Parameters
    ----------
    config : PathConfig or str
    tau : float or array
        Delay ``t_s - t_i`` in seconds.
    normalized : bool
        Divide by the envelope peak instead of returning absolute units.
    """
    config = PathConfig(config)
    k = device_constants(device)
    tau = np.asarray(tau, dtype=float)
    pos, neg = _amplitude_pairs(k, pump.f, pump.b, pump.phi)
    bs, bi = device.signal.beta, device.idler.beta
    cp, sp = pos[config.value]
    cn, sn = neg[config.value]
    val = np.where(
        tau >= 0,
        np.abs(cp * np.cos(bs * tau) + sp * np.sin(bs * tau)) ** 2,
        np.abs(cn * np.cos(bi * tau) + sn * np.sin(bi * tau)) ** 2,
    )
    val = val * envelope(device, tau)
    if normalized:
        p, q, r, s = _coefficients(k, pump.f, pump.b, pump.phi)
        return val / (abs(p) ** 2 + abs(q) ** 2 + abs(r) ** 2 + abs(s) ** 2)
    return k.n_const * val


@dataclass(frozen=True)
class CorrelationTrace:
    """Per-configuration traces on a signed delay grid.

    ``envelope`` is the pointwise sum of the four traces. ``scale`` converts
    the stored values to absolute units (pairs per s^2 density).
    """

    tau: np.ndarray
    values: dict
    envelope: np.ndarray
    scale: float = 1.0

    def __getitem__(self, config):
        return self.values[PathConfig(config)]

    def absolute(self):
        return CorrelationTrace(
            self.tau,
            {c: v * self.scale for c, v in self.values.items()},
            self.envelope * self.scale,
            1.0,
        )

    def peak_normalized(self, config):
        v = self[config]
        return v / v.max()


def correlation_trace(device, pump, tau_grid, absolute=False):
    """Evaluate all four configurations. Values are normalized to the envelope peak
    unless ``absolute`` is set."""
    tau = np.asarray(tau_grid, dtype=float)
    if tau.size == 0:
        raise ParameterError("empty delay grid", "tau_grid")
    if np.any(np.diff(tau) <= 0):
        raise ParameterError("delay grid must be strictly increasing", "tau_grid")
    _check_weak(device, pump)
    vals = {c: pair_correlation(device, pump, c, tau, normalized=True) for c in CONFIGS}
    scale = envelope_constant(device, pump)
    env = sum(vals.values())
    trace = CorrelationTrace(tau, vals, env, scale)
    return trace.absolute() if absolute else trace


def equal_pump_traces(device, pump, tau_grid, rtol=1e-12):
    """Traces for a symmetric drive. Requires ``f == b``."""
    if abs(pump.f - pump.b) > rtol * max(pump.f, pump.b):
        raise ParameterError("equal-pump traces need f == b", "pump")
    return correlation_trace(device, pump, tau_grid)


def default_tau_grid(device, n=2000, span=5.0):
    """Symmetric grid over +/- span / (Gamma_ts + Gamma_ti)."""
    gt = device.signal.gamma_t + device.idler.gamma_t
    return np.linspace(-span / gt, span / gt, n)


def oscillation_frequency(tau, ratio):
    """Ordinary oscillation frequency (Hz) of a sinusoidal sequence.

    ``ratio`` is a trace divided by its decay envelope, which is a pure sinusoid
    plus offset on each branch. The estimate uses the mean spacing of
    linearly interpolated midline crossings.
    """
    tau = np.asarray(tau, dtype=float)
    r = np.asarray(ratio, dtype=float)
    mid = 0.5 * (r.max() + r.min())
    if r.max() - r.min() < 1e-9 * max(abs(r).max(), 1e-300):
        raise NumericalError("trace does not oscillate")
    d = r - mid
    idx = np.nonzero(np.signbit(d[:-1]) != np.signbit(d[1:]))[0]
    if idx.size < 3:
        raise NumericalError("window too short for a frequency estimate")
    t0 = tau[idx] - d[idx] * (tau[idx + 1] - tau[idx]) / (d[idx + 1] - d[idx])
    half_period = (t0[-1] - t0[0]) / (t0.size - 1)
    return 1.0 / (2 * half_period)


def branch_frequencies(device, pump, config, periods=20, n=40001):
    """Oscillation frequency (Hz) of one configuration on each delay branch."""
    out = {}
    for name, mode, sign in (("signal", device.signal, 1.0), ("idler", device.idler, -1.0)):
        t_end = periods * np.pi / mode.beta
        tau = sign * np.linspace(0, t_end, n)[1:]
        if sign < 0:
            tau = tau[::-1]
        p = pair_correlation(device, pump, config, tau, normalized=True)
        out[name] = oscillation_frequency(tau, p / envelope(device, tau))
    return out
