"""Device and drive parameters for a resonator with coupled counter-propagating modes.

All rates and frequencies are angular (rad/s) internally. Quoted values in
device files are ordinary frequencies (Hz) unless ``rate_unit`` says otherwise,
and are multiplied by 2*pi on load.
"""
from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.constants import c as C_LIGHT, hbar as HBAR

TWO_PI = 2.0 * np.pi


class ParameterError(ValueError):
    """Invalid physical parameter or malformed configuration."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class NumericalError(RuntimeError):
    """A computation could not be carried out to the requested accuracy."""


class ResolutionError(NumericalError):
    """A numerical grid is too coarse or too short for the requested accuracy."""


@dataclass(frozen=True)
class ModeParams:
    """One whispering-gallery mode pair (forward and backward).

    Parameters
    ----------
    omega0 : float
        Angular resonance frequency (rad/s).
    gamma0 : float
        Intrinsic decay rate (rad/s).
    gamma_e : float
        External coupling rate to the waveguide (rad/s).
    beta : float
        Modal coupling magnitude (rad/s). The doublet is split by 2*beta.
    phi_beta : float
        Spatial phase of the modal coupling (rad).
    """

    omega0: float
    gamma0: float
    gamma_e: float
    beta: float = 0.0
    phi_beta: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ParameterError("omega0 must be positive", "omega0")
        if self.gamma0 < 0:
            raise ParameterError("gamma0 must be non-negative", "gamma0")
        if self.gamma_e < 0:
            raise ParameterError("gamma_e must be non-negative", "gamma_e")
        if self.beta < 0:
            raise ParameterError("beta is a magnitude; carry its sign in phi_beta", "beta")
        if not self.gamma_t > 0:
            raise ParameterError("total decay rate gamma0 + gamma_e must be positive", "gamma_e")

    @property
    def gamma_t(self):
        return self.gamma0 + self.gamma_e

    def scaled_decay(self, k):
        """Copy with both decay rates multiplied by ``k``."""
        return replace(self, gamma0=self.gamma0 * k, gamma_e=self.gamma_e * k)


@dataclass(frozen=True)
class DeviceParams:
    """Pump, signal and idler mode pairs plus the vacuum SFWM rate ``g`` (rad/s)."""

    pump: ModeParams
    signal: ModeParams
    idler: ModeParams
    g: float
    matching_tol: float = 1e-3

    def __post_init__(self):
        if self.g < 0:
            raise ParameterError("g must be non-negative", "g_hz")
        mismatch = abs(self.signal.omega0 + self.idler.omega0 - 2 * self.pump.omega0)
        if mismatch > self.matching_tol * self.pump.omega0:
            warnings.warn(
                f"frequency matching violated: |ws + wi - 2wp| = {mismatch:.3e} rad/s",
                stacklevel=3,
            )

    @property
    def modes(self):
        return {"pump": self.pump, "signal": self.signal, "idler": self.idler}

    def with_g(self, g):
        return replace(self, g=g)

    def scaled_decay(self, k):
        """All decay rates of all three modes multiplied by ``k``."""
        return replace(
            self,
            pump=self.pump.scaled_decay(k),
            signal=self.signal.scaled_decay(k),
            idler=self.idler.scaled_decay(k),
        )


@dataclass(frozen=True)
class PumpDrive:
    """Input pump in the bus waveguide.

    ``detuning`` is laser minus cold-cavity frequency (rad/s). The amplitudes are
    complex with ``|amp|**2`` in photons/s.
    """

    detuning: float
    amp_f: complex = 0.0
    amp_b: complex = 0.0

    def __post_init__(self):
        if not np.isfinite(self.detuning):
            raise ParameterError("detuning must be finite", "detuning")

    @property
    def is_zero(self):
        return abs(self.amp_f) == 0 and abs(self.amp_b) == 0


@dataclass(frozen=True)
class MaterialParams:
    n2: float
    eta: float
    n_s: float
    n_i: float
    v_bar: float

    def __post_init__(self):
        for name in ("n2", "eta", "n_s", "n_i", "v_bar"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive", name)
        if self.eta > 1:
            raise ParameterError("eta is an overlap fraction and must be <= 1", "eta")


def compute_g(material, omegas):
    """Vacuum four-wave-mixing rate (rad/s).

    Parameters
    ----------
    material : MaterialParams
    omegas : tuple of float
        Angular frequencies ``(omega_p, omega_s, omega_i)``.
    """
    wp, ws, wi = omegas
    if min(wp, ws, wi) <= 0:
        raise ParameterError("frequencies must be positive", "omega")
    m = material
    return C_LIGHT * m.eta * m.n2 * HBAR * wp * np.sqrt(ws * wi) / (m.n_s * m.n_i * m.v_bar)


def power_to_flux(power, omega):
    """Photon flux (photons/s) carried by ``power`` watts at angular frequency ``omega``."""
    if np.any(np.asarray(power) < 0):
        raise ParameterError("power must be non-negative", "power")
    return power / (HBAR * omega)


def rate_from_quality(omega0, q):
    if not q > 0:
        raise ParameterError("quality factor must be positive", "q")
    return omega0 / q


def omega_from_wavelength(wavelength_nm):
    return TWO_PI * C_LIGHT / (wavelength_nm * 1e-9)


# ---------------------------------------------------------------- device files

_MODE_KEYS = {
    "wavelength_nm", "q0", "qe", "gamma0_hz", "gamma_e_hz",
    "splitting_hz", "phi_beta_rad", "assumed", "note",
}
_TOP_KEYS = {"pump", "signal", "idler", "g_hz", "rate_unit", "drive", "note"}
_DRIVE_KEYS = {"power_uW", "detuning_hz", "note"}


def _number(d, key, where):
    try:
        val = d[key]
    except KeyError:
        raise ParameterError(f"missing key '{where}.{key}'", f"{where}.{key}") from None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ParameterError(f"key '{where}.{key}' must be a number", f"{where}.{key}")
    return float(val)


def _mode_from_dict(d, where, unit_scale):
    if not isinstance(d, dict):
        raise ParameterError(f"'{where}' must be an object", where)
    for k in d:
        if k not in _MODE_KEYS:
            raise ParameterError(f"unknown key '{where}.{k}'", f"{where}.{k}")
    wavelength = _number(d, "wavelength_nm", where)
    if not wavelength > 0:
        raise ParameterError(f"'{where}.wavelength_nm' must be positive", f"{where}.wavelength_nm")
    omega0 = omega_from_wavelength(wavelength)
    for q in ("q0", "qe"):
        if q in d and not _number(d, q, where) > 0:
            raise ParameterError(f"'{where}.{q}' must be positive", f"{where}.{q}")
    if "q0" in d:
        gamma0 = rate_from_quality(omega0, _number(d, "q0", where))
    else:
        gamma0 = _number(d, "gamma0_hz", where) * unit_scale
    if "qe" in d:
        gamma_e = rate_from_quality(omega0, _number(d, "qe", where))
    else:
        gamma_e = _number(d, "gamma_e_hz", where) * unit_scale
    beta = 0.5 * _number(d, "splitting_hz", where) * unit_scale
    phi = float(d.get("phi_beta_rad", 0.0))
    try:
        return ModeParams(omega0, gamma0, gamma_e, beta, phi)
    except ParameterError as exc:
        raise ParameterError(f"{where}: {exc}", f"{where}.{exc.key}") from None


def device_from_dict(cfg, rate_unit=None):
    """Build :class:`DeviceParams` from a parsed device file.

    ``rate_unit`` overrides the file's own ``rate_unit`` entry ("hz" or "rad_per_s").
    """
    if not isinstance(cfg, dict):
        raise ParameterError("device file must hold a JSON object", "<root>")
    for k in cfg:
        if k not in _TOP_KEYS:
            raise ParameterError(f"unknown key '{k}'", k)
    unit = rate_unit or cfg.get("rate_unit", "hz")
    if unit not in ("hz", "rad_per_s"):
        raise ParameterError(f"rate_unit must be 'hz' or 'rad_per_s', got {unit!r}", "rate_unit")
    scale = TWO_PI if unit == "hz" else 1.0
    modes = {}
    for name in ("pump", "signal", "idler"):
        if name not in cfg:
            raise ParameterError(f"missing key '{name}'", name)
        modes[name] = _mode_from_dict(cfg[name], name, scale)
    g = _number(cfg, "g_hz", "device") * scale
    return DeviceParams(modes["pump"], modes["signal"], modes["idler"], g)


def drive_from_dict(cfg, device):
    """Forward-only drive described by the optional ``drive`` block."""
    d = cfg.get("drive", {})
    for k in d:
        if k not in _DRIVE_KEYS:
            raise ParameterError(f"unknown key 'drive.{k}'", f"drive.{k}")
    power = float(d.get("power_uW", 8.54)) * 1e-6
    detuning = TWO_PI * float(d.get("detuning_hz", 0.0))
    flux = power_to_flux(power, device.pump.omega0)
    return PumpDrive(detuning, np.sqrt(flux) + 0j, 0j)


def read_device_file(path):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read device file {p}: {exc}", "device") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"malformed JSON in {p}: {exc}", "device") from None


def load_device(path, rate_unit=None):
    return device_from_dict(read_device_file(path), rate_unit)


def paper_device_dict():
    text = resources.files("wgmbiphoton").joinpath("data/paper_device.json").read_text()
    return json.loads(text)


def paper_device():
    """The bundled measured device (pump splitting assumed, see file notes)."""
    return device_from_dict(paper_device_dict())


def paper_drive(device=None, detuning=None):
    cfg = paper_device_dict()
    device = device or device_from_dict(cfg)
    drive = drive_from_dict(cfg, device)
    if detuning is not None:
        drive = replace(drive, detuning=detuning)
    return drive


def config_hash(cfg):
    """Short stable hash of a configuration object."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
