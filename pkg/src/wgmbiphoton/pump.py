"""Steady-state intracavity pump fields of a split pump doublet."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import NumericalError, ParameterError, PumpDrive


def wrap_phase(x):
    """Wrap to (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    y = np.where(y == -np.pi, np.pi, y)
    return float(y) if np.ndim(y) == 0 else y


@dataclass(frozen=True)
class PumpSteadyState:
    """Intracavity pump amplitudes.

    ``phi_beta`` is the coupling-phase offset ``-(phi_beta_s + phi_beta_i)``
    carried by the signal and idler couplings. The pump's own coupling phase is
    already contained in the ratio ``a_pf / a_pb``. ``detuning`` records the
    laser detuning (rad/s) the state was solved at.
    """

    a_pf: complex
    a_pb: complex
    phi_beta: float = 0.0
    detuning: float = 0.0

    @property
    def f(self):
        return abs(self.a_pf) ** 2

    @property
    def b(self):
        return abs(self.a_pb) ** 2

    @property
    def phi_p(self):
        """arg(a_pf) - arg(a_pb), wrapped."""
        return wrap_phase(np.angle(self.a_pf) - np.angle(self.a_pb))

    @property
    def phi(self):
        """Relative phase entering the pair correlations, wrapped."""
        return wrap_phase(2 * self.phi_p + self.phi_beta)

    @classmethod
    def from_energies(cls, f, b, phi, detuning=0.0):
        """State with prescribed ``f``, ``b`` and ``phi`` (zero coupling-phase offset)."""
        return cls(np.sqrt(f) * np.exp(0.5j * phi), np.sqrt(b) + 0j, 0.0, detuning)


def signal_idler_phase(device):
    return -(device.signal.phi_beta + device.idler.phi_beta)


def _solve(device, detuning, amp_f, amp_b):
    p = device.pump
    d = 1j * detuning - p.gamma_t / 2
    kf = -1j * p.beta * np.exp(1j * p.phi_beta)
    kb = -1j * p.beta * np.exp(-1j * p.phi_beta)
    den = d * d - kf * kb
    if np.any(np.abs(den) <= 1e-14 * (np.abs(d) ** 2 + p.beta**2)):
        raise NumericalError("singular drive: undamped resonance hit exactly")
    s = -1j * np.sqrt(p.gamma_e)
    a_f = s * (d * amp_f + kf * amp_b) / den
    a_b = s * (kb * amp_f + d * amp_b) / den
    return a_f, a_b


def steady_state(device, drive: PumpDrive):
    """Closed-form solution of the two coupled steady-state pump equations.

    The pump obeys ``0 = (i*Delta - Gt/2) a_f + i*beta*e^{i phi} a_b + i sqrt(Ge) b_f``
    and its mirror for ``a_b``. With ``amp_b = 0`` this reduces to the familiar
    single-input doublet response.
    """
    a_f, a_b = _solve(device, drive.detuning, drive.amp_f, drive.amp_b)
    return PumpSteadyState(
        complex(a_f), complex(a_b), signal_idler_phase(device), float(drive.detuning)
    )


def residual(device, drive, state):
    """Relative residual of the steady-state equations for ``state``."""
    p = device.pump
    d = 1j * drive.detuning - p.gamma_t / 2
    cf = 1j * p.beta * np.exp(1j * p.phi_beta)
    cb = 1j * p.beta * np.exp(-1j * p.phi_beta)
    s = 1j * np.sqrt(p.gamma_e)
    r1 = d * state.a_pf + cf * state.a_pb + s * drive.amp_f
    r2 = cb * state.a_pf + d * state.a_pb + s * drive.amp_b
    scale = abs(s) * max(abs(drive.amp_f), abs(drive.amp_b))
    return max(abs(r1), abs(r2)) / scale


def transmission(device, detuning):
    """Forward-port power transmission for forward-only drive."""
    detuning = np.asarray(detuning, dtype=float)
    a_f, _ = _solve(device, detuning, 1.0, 0.0)
    t = np.abs(1 + 1j * np.sqrt(device.pump.gamma_e) * a_f) ** 2
    return float(t) if t.ndim == 0 else t


def unwrap_nearest(phase):
    """Nearest-branch continuation of a wrapped phase sequence."""
    return np.unwrap(np.asarray(phase, dtype=float))


@dataclass(frozen=True)
class PhaseSweep:
    detuning: np.ndarray
    phi: np.ndarray
    phi_unwrapped: np.ndarray
    phi_p: np.ndarray
    phi_p_unwrapped: np.ndarray
    f: np.ndarray
    b: np.ndarray
    transmission: np.ndarray

    @property
    def pump_phase_span(self):
        """Total variation of the unwrapped pump relative phase ``phi_p``."""
        return float(self.phi_p_unwrapped.max() - self.phi_p_unwrapped.min())


def phase_sweep(device, detuning_grid, amp_f=1.0):
    """Pump relative phases, energies and transmission over a detuning grid.

    ``phi_p`` is the relative phase of the two pump modes and spans up to pi
    across the doublet. ``phi = 2 phi_p + phi_beta`` is the combination entering
    the pair correlations.
    """
    grid = np.asarray(detuning_grid, dtype=float)
    if grid.size == 0:
        raise ParameterError("empty detuning grid", "detuning_grid")
    a_f, a_b = _solve(device, grid, amp_f, 0.0)
    phi_p = wrap_phase(np.angle(a_f) - np.angle(a_b))
    phi = wrap_phase(2 * phi_p + signal_idler_phase(device))
    return PhaseSweep(
        detuning=grid,
        phi=np.atleast_1d(phi),
        phi_unwrapped=unwrap_nearest(np.atleast_1d(phi)),
        phi_p=np.atleast_1d(phi_p),
        phi_p_unwrapped=unwrap_nearest(np.atleast_1d(phi_p)),
        f=np.abs(a_f) ** 2,
        b=np.abs(a_b) ** 2,
        transmission=np.atleast_1d(transmission(device, grid)),
    )
