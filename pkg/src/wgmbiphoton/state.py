"""Closed-system biphoton states in the traveling-wave path basis.

Basis order is ``(ff, fb, bf, bb)`` with the first label the signal direction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .model import ParameterError

LABELS = ("ff", "fb", "bf", "bb")


class ContractError(ValueError):
    pass


@dataclass(frozen=True)
class BiphotonState:
    amp: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amp, dtype=complex).reshape(4)
        object.__setattr__(self, "amp", a)

    @classmethod
    def from_amplitudes(cls, ff=0, fb=0, bf=0, bb=0, normalize=True):
        a = np.array([ff, fb, bf, bb], dtype=complex)
        n = np.linalg.norm(a)
        if n == 0:
            raise ParameterError("state has zero norm", "amp")
        return cls(a / n if normalize else a)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amp))

    def __getattr__(self, name):
        if name.startswith("amp_") and name[4:] in LABELS:
            return self.amp[LABELS.index(name[4:])]
        raise AttributeError(name)


def _check_normalized(state, tol=1e-8):
    if abs(state.norm - 1) > tol:
        raise ContractError(f"state not normalized (norm = {state.norm:.12g})")


def initial_state(pump):
    """Pair state at creation: amplitudes follow the squared pump fields."""
    cf = pump.a_pf ** 2
    cb = pump.a_pb ** 2
    if abs(cf) == 0 and abs(cb) == 0:
        raise ParameterError("pump is empty; no pairs are created", "pump")
    return BiphotonState.from_amplitudes(ff=cf, bb=cb)


def evolve_closed(state, t, beta):
    """Coherent back-scattering evolution in closed form (zero coupling phase).

    Each photon evolves as ``f -> cos(bt) f + i sin(bt) b``. For an initial state
    ``cf|ff> + cb|bb>`` this gives ``ff = cf cos^2 - cb sin^2``,
    ``bb = cb cos^2 - cf sin^2`` and ``fb = bf = (i/2)(cf + cb) sin(2bt)``.

    Returns an array of shape ``(len(t), 4)`` for array ``t``, or a state for scalar ``t``.
    """
    _check_normalized(state)
    tt = np.asarray(t, dtype=float)
    c = np.cos(beta * tt)[..., None]
    s = 1j * np.sin(beta * tt)[..., None]
    ff, fb, bf, bb = state.amp
    out = np.concatenate(
        [
            c * c * ff + c * s * fb + s * c * bf + s * s * bb,
            c * c * fb + c * s * ff + s * c * bb + s * s * bf,
            c * c * bf + c * s * bb + s * c * ff + s * s * fb,
            c * c * bb + c * s * bf + s * c * fb + s * s * ff,
        ],
        axis=-1,
    )
    if tt.ndim == 0:
        return BiphotonState(out.reshape(4))
    return out


def single_photon_hamiltonian(beta, phi_beta):
    """Coupling ``-(beta e^{i phi}|f><b| + h.c.)`` in the ``(f, b)`` basis."""
    return -beta * np.array(
        [[0, np.exp(1j * phi_beta)], [np.exp(-1j * phi_beta), 0]], dtype=complex
    )


def two_photon_hamiltonian(beta, phi_beta):
    h = single_photon_hamiltonian(beta, phi_beta)
    eye = np.eye(2)
    return np.kron(h, eye) + np.kron(eye, h)


def evolve_oracle(state, t, beta, phi_beta=0.0):
    """Evolution by numerical matrix exponentiation of the 4x4 Hamiltonian."""
    h = two_photon_hamiltonian(beta, phi_beta)
    tt = np.asarray(t, dtype=float)
    if tt.ndim == 0:
        return BiphotonState(expm(-1j * h * tt) @ state.amp)
    # eigendecomposition reused across the grid; expm checks the agreement in tests
    w, v = np.linalg.eigh(h)
    coeff = v.conj().T @ state.amp
    phases = np.exp(-1j * np.outer(tt, w))
    return (phases * coeff) @ v.T


def path_probabilities(state):
    amp = state.amp if isinstance(state, BiphotonState) else np.asarray(state)
    return np.abs(amp) ** 2


@dataclass(frozen=True)
class BasisTransform:
    """Map between traveling-wave ``(f, b)`` and standing-wave ``(-, +)`` modes.

    ``|f> = (|-> - e^{-i phi}|+>)/sqrt(2)`` and ``|b> = (e^{i phi}|-> + |+>)/sqrt(2)``.
    The columns of :attr:`single` express ``|f>`` and ``|b>`` in the ``(-, +)`` basis.
    With this sign choice ``|->`` and ``|+>`` diagonalize the coupling Hamiltonian
    for every ``phi``.
    """

    phi_beta: float = 0.0

    @property
    def single(self):
        e = np.exp(1j * self.phi_beta)
        return np.array([[1, e], [-np.conj(e), 1]], dtype=complex) / np.sqrt(2)

    @property
    def matrix(self):
        u = self.single
        return np.kron(u, u)


def to_standing_basis(state, xf):
    """Amplitudes over ``(--, -+, +-, ++)``."""
    return BiphotonState(xf.matrix @ state.amp)


def from_standing_basis(state, xf):
    return BiphotonState(xf.matrix.conj().T @ state.amp)
