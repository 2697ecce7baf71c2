"""Scenario runner: sweeps, reports and self-describing CSV/JSON artifacts."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bell import DEFAULT_MAPPING, PAPER_ANGLES, AngleSettings, chsh, estimate_error, optimize_angles
from .correlations import CONFIGS, CorrelationTrace, PathConfig, correlation_trace, default_tau_grid
from .detection import DetectorModel, convolve_response, expected_counts, sample_histogram, scale_to_peak
from .fitting import FitResult, SweepTrace, doublet_model, fit_doublet
from .model import (
    TWO_PI, NumericalError, ParameterError, PumpDrive, device_from_dict, drive_from_dict,
    config_hash, paper_device_dict, read_device_file,
)
from .pump import phase_sweep, steady_state
from .spectral import default_grid, numeric_trace, relative_l2
from .state import evolve_closed, evolve_oracle, initial_state

ENGINES = ("closed_form", "spectral")
PAPER_DETUNINGS_GHZ = (-0.21, -0.16, -0.11, -0.06, 0.35, 0.38, 0.41, 0.44)
REGIME_RATIOS = (0.1, 0.3, 1.0, 3.0, 10.0)
FLIP_HIGH = 0.5
FLIP_LOW = 0.1
ENGINE_TOL = 1e-3


# ------------------------------------------------------------------ regime sweep


def hull_contrast(tau, p):
    """Depth of the deepest dip below the monotone decay hull, relative to the peak.

    The hull is the smallest curve that is non-increasing away from ``tau = 0``
    and lies above ``p``. A monotone decay has contrast 0. A trace that
    oscillates down to zero right after its peak has contrast 1.
    """
    p = np.asarray(p, dtype=float)
    top = p.max()
    if top <= 0:
        return 0.0
    n0 = int(np.argmin(np.abs(tau)))
    h = np.empty_like(p)
    h[n0:] = np.maximum.accumulate(p[n0:][::-1])[::-1]
    h[: n0 + 1] = np.maximum.accumulate(p[: n0 + 1])
    return float(((h - p) / top).max())


def scale_to_ratio(device, ratio):
    """Device whose signal ``beta_s / Gamma_ts`` equals ``ratio``.

    All three modes have their intrinsic and external rates scaled by a common
    factor, so the coupling condition and pump-to-signal linewidth ratios are kept.
    """
    if not ratio > 0:
        raise ParameterError("coupling ratio must be positive", "ratio")
    k = device.signal.beta / (ratio * device.signal.gamma_t)
    return device.scaled_decay(k)


@dataclass(frozen=True)
class RegimeRow:
    ratio: float
    contrast: dict
    co_propagating: float


def regime_window(device):
    gt = device.signal.gamma_t + device.idler.gamma_t
    bmin = min(device.signal.beta, device.idler.beta)
    return max(5 / gt, 2 * np.pi / bmin)


def regime_sweep(device_base, coupling_ratios=REGIME_RATIOS, detuning=0.0, n=20001):
    """Oscillation contrast of every configuration across coupling regimes.

    ``co_propagating`` is the larger of the FF and BB contrasts.
    """
    ratios = list(coupling_ratios)
    if not ratios:
        raise ParameterError("need at least one coupling ratio", "coupling_ratios")
    rows = []
    for r in ratios:
        dev = scale_to_ratio(device_base, r)
        pump = steady_state(dev, _unit_drive(detuning))
        t = regime_window(dev)
        tau = np.linspace(-t, t, n)
        tr = correlation_trace(dev, pump, tau)
        cont = {c: hull_contrast(tau, tr[c]) for c in CONFIGS}
        rows.append(RegimeRow(r, cont, max(cont[PathConfig.FF], cont[PathConfig.BB])))
    return rows


def _unit_drive(detuning):
    # normalized traces do not depend on the drive strength
    return PumpDrive(detuning, 1.0 + 0j, 0j)


# ---------------------------------------------------------------- detuning sweep


@dataclass(frozen=True)
class DetuningPoint:
    detuning: float
    phi: float
    phi_unwrapped: float
    trace: object
    fb_zero_env: float
    fb_zero_own: float


@dataclass(frozen=True)
class DetuningReport:
    points: list
    high: float = FLIP_HIGH
    low: float = FLIP_LOW

    def flips(self, measure="own"):
        """Flip indicator between consecutive detunings.

        True where the FB value at zero delay falls from above ``high`` to
        below ``low`` (or the reverse). ``measure`` selects normalization to
        the trace's own maximum ("own") or to the envelope at zero ("envelope").
        """
        key = "fb_zero_own" if measure == "own" else "fb_zero_env"
        v = [getattr(p, key) for p in self.points]
        out = []
        for a, b in zip(v[:-1], v[1:]):
            out.append(bool((a > self.high and b < self.low) or (a < self.low and b > self.high)))
        return out


def detuning_sweep(device, detuning_list, tau_grid=None):
    """Stacked correlation traces over laser detunings (rad/s).

    The reported phases come from :func:`phase_sweep` on the same grid.
    """
    dets = np.asarray(detuning_list, dtype=float)
    if dets.size == 0:
        raise ParameterError("empty detuning list", "detuning_list")
    tau = default_tau_grid(device) if tau_grid is None else np.asarray(tau_grid, dtype=float)
    sweep = phase_sweep(device, dets)
    n0 = int(np.argmin(np.abs(tau)))
    points = []
    for k, d in enumerate(dets):
        pump = steady_state(device, _unit_drive(float(d)))
        tr = correlation_trace(device, pump, tau)
        fb = tr[PathConfig.FB]
        points.append(
            DetuningPoint(
                float(d), float(sweep.phi[k]), float(sweep.phi_unwrapped[k]), tr,
                float(fb[n0] / tr.envelope[n0]), float(fb[n0] / fb.max()),
            )
        )
    return DetuningReport(points)


# ---------------------------------------------------------------- artifacts


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12e}"


def csv_text(columns, rows, meta):
    """CSV with ``# key: value`` header lines. Deterministic formatting."""
    buf = io.StringIO()
    for k in sorted(meta):
        buf.write(f"# {k}: {meta[k]}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path, columns, rows, meta):
    text = csv_text(columns, rows, meta)
    Path(path).write_text(text)
    return text


def read_csv(path):
    """Columns of a CSV written by :func:`write_csv` (or any plain numeric CSV)."""
    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    except OSError as exc:
        raise ParameterError(f"cannot read {path}: {exc}", "input") from None
    if len(lines) < 2:
        raise ParameterError(f"{path} holds no data rows", "input")
    head = [h.strip() for h in lines[0].split(",")]
    try:
        data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    except ValueError as exc:
        raise ParameterError(f"non-numeric value in {path}: {exc}", "input") from None
    if data.shape[1] != len(head):
        raise ParameterError(f"column count mismatch in {path}", "input")
    return {h: data[:, i] for i, h in enumerate(head)}


def write_json(path, obj, meta):
    payload = {"meta": meta, **obj}
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text)
    return text


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return None if not np.isfinite(x) else float(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# ---------------------------------------------------------------- scenarios


@dataclass(frozen=True)
class Scenario:
    """One runnable step.

    ``device`` is a path or ``None`` for the bundled device. ``options`` holds
    command-specific settings (grids, angles, input files).
    """

    command: str
    out: str
    device: str | None = None
    engine: str = "closed_form"
    seed: int = 0
    rate_unit: str | None = None
    detuning_hz: float | None = None
    detector: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict):
            raise ParameterError("scenario must be a JSON object", "<root>")
        known = set(cls.__dataclass_fields__)
        for k in d:
            if k not in known:
                raise ParameterError(f"unknown scenario key '{k}'", k)
        for k in ("command", "out"):
            if k not in d:
                raise ParameterError(f"missing scenario key '{k}'", k)
        return cls(**d)

    def validate(self):
        if self.command not in COMMANDS:
            raise ParameterError(f"unknown command {self.command!r}", "command")
        if self.engine not in ENGINES:
            raise ParameterError(f"engine must be one of {ENGINES}", "engine")
        if self.device is not None and not Path(self.device).is_file():
            raise ParameterError(f"device file {self.device} does not exist", "device")
        for key in ("trace", "sweep", "angles"):
            p = self.options.get(key)
            if p is not None and not Path(p).is_file():
                raise ParameterError(f"{key} file {p} does not exist", key)


def _load(scn):
    cfg = paper_device_dict() if scn.device is None else read_device_file(scn.device)
    device = device_from_dict(cfg, scn.rate_unit)
    drive = drive_from_dict(cfg, device)
    if scn.detuning_hz is not None:
        drive = replace(drive, detuning=TWO_PI * scn.detuning_hz)
    return cfg, device, drive


def _meta(scn, cfg, **extra):
    m = {
        "tool": "wgmbiphoton",
        "version": __version__,
        "command": scn.command,
        "seed": scn.seed,
        "device_hash": config_hash(cfg),
        "engine": scn.engine,
        "mapping_mode": DEFAULT_MAPPING,
    }
    m.update(extra)
    return m


def _detector(scn):
    try:
        return DetectorModel(**scn.detector)
    except TypeError as exc:
        raise ParameterError(f"bad detector spec: {exc}", "detector") from None


def _tau_grid(device, opts):
    n = int(opts.get("points", 2000))
    span = float(opts.get("span", 5.0))
    return default_tau_grid(device, n=n, span=span)


def _cmd_sweep_pump(scn):
    cfg, device, _ = _load(scn)
    o = scn.options
    half = 3 * device.pump.beta if device.pump.beta > 0 else 3 * device.pump.gamma_t
    lo = TWO_PI * o["start_hz"] if "start_hz" in o else -half
    hi = TWO_PI * o["stop_hz"] if "stop_hz" in o else half
    grid = np.linspace(lo, hi, int(o.get("points", 2001)))
    sw = phase_sweep(device, grid)
    rows = zip(grid / TWO_PI, sw.transmission, sw.f, sw.b, sw.phi, sw.phi_unwrapped)
    cols = ["detuning_hz", "transmission", "f", "b", "phi_rad", "phi_unwrapped_rad"]
    write_csv(scn.out, cols, rows, _meta(scn, cfg, note="f and b per unit input photon flux"))


def _cmd_state_evolve(scn):
    cfg, device, drive = _load(scn)
    o = scn.options
    beta = TWO_PI * o["beta_hz"] if "beta_hz" in o else device.signal.beta
    pump = steady_state(device, drive)
    psi = initial_state(pump)
    t = np.linspace(0, float(o.get("t_max", 2 * np.pi / beta)), int(o.get("points", 1001)))
    if o.get("oracle", False):
        amps = evolve_oracle(psi, t, beta, float(o.get("phi_beta", 0.0)))
    else:
        amps = evolve_closed(psi, t, beta)
    p = np.abs(amps) ** 2
    rows = [(ti, *pi) for ti, pi in zip(t, p)]
    write_csv(scn.out, ["t_s", "P_ff", "P_fb", "P_bf", "P_bb"], rows,
              _meta(scn, cfg, beta_rad_s=_fmt(beta), evolution="oracle" if o.get("oracle") else "closed"))


def _cmd_correlations(scn):
    cfg, device, drive = _load(scn)
    pump = steady_state(device, drive)
    tau = _tau_grid(device, scn.options)
    ref = correlation_trace(device, pump, tau)
    cols = ["tau_s", "p_ff", "p_fb", "p_bf", "p_bb", "envelope"]
    extra = {"detuning_hz": _fmt(drive.detuning / TWO_PI), "phi_rad": _fmt(pump.phi),
             "normalization": "envelope peak"}
    if scn.engine == "closed_form":
        rows = [(t, *(ref[c][k] for c in CONFIGS), ref.envelope[k]) for k, t in enumerate(tau)]
        write_csv(scn.out, cols, rows, _meta(scn, cfg, **extra))
        return
    grid = default_grid(device, refine=float(scn.options.get("refine", 1)))
    num = numeric_trace(device, pump, tau, grid=grid, order=scn.options.get("order", "first"))
    vals = {c: num[c] / ref.scale for c in CONFIGS}
    env = sum(vals.values())
    l2 = {c.value: relative_l2(vals[c], ref[c]) for c in CONFIGS}
    dis = np.max([np.abs(vals[c] - ref[c]) for c in CONFIGS], axis=0) / ref.envelope.max()
    rows = [(t, *(vals[c][k] for c in CONFIGS), env[k], dis[k]) for k, t in enumerate(tau)]
    extra.update({f"l2_{k}": _fmt(v) for k, v in l2.items()})
    extra["grid"] = f"dw={grid.dw:.6e} n={grid.n}"
    write_csv(scn.out, cols + ["disagreement"], rows, _meta(scn, cfg, **extra))
    tol = float(scn.options.get("check_tol", ENGINE_TOL))
    if scn.options.get("check", False) and max(l2.values()) > tol:
        raise NumericalError(f"engines disagree: max relative L2 {max(l2.values()):.3e} > {tol:.1e}")


def _trace_from_csv(path):
    cols = read_csv(path)
    need = ["tau_s", "p_ff", "p_fb", "p_bf", "p_bb"]
    for k in need:
        if k not in cols:
            raise ParameterError(f"trace file lacks column '{k}'", k)
    vals = {PathConfig(k[2:]): cols[k] for k in need[1:]}
    return CorrelationTrace(cols["tau_s"], vals, sum(vals.values()), 1.0)


def _expected(scn, trace, det):
    tr = convolve_response(trace, det)
    ex = expected_counts(tr, det, float(scn.options.get("pair_rate_scale", 1.0)))
    if "peak_counts" in scn.options:
        ex = scale_to_peak(ex, float(scn.options["peak_counts"]))
    return ex


def _cmd_montecarlo(scn):
    o = scn.options
    cfg = paper_device_dict() if scn.device is None else read_device_file(scn.device)
    if "trace" not in o:
        raise ParameterError("montecarlo needs a trace CSV", "trace")
    trace = _trace_from_csv(o["trace"])
    det = _detector(scn)
    hist = sample_histogram(_expected(scn, trace, det), seed=scn.seed)
    rows = [(t, *(hist.counts[c][k] for c in CONFIGS)) for k, t in enumerate(hist.bin_centers)]
    meta = _meta(scn, cfg, detector=json.dumps(det.__dict__, sort_keys=True))
    write_csv(scn.out, ["bin_center_s", "n_ff", "n_fb", "n_bf", "n_bb"], rows, meta)


def _angles(o):
    a = o.get("angles")
    if a is None:
        return PAPER_ANGLES
    if isinstance(a, str):
        try:
            a = json.loads(Path(a).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read angles: {exc}", "angles") from None
    if isinstance(a, dict):
        try:
            return AngleSettings(float(a["theta1"]), float(a["theta1p"]), float(a["theta2"]), float(a["theta2p"]))
        except KeyError as exc:
            raise ParameterError(f"angles lack {exc}", "angles") from None
    if len(a) != 4:
        raise ParameterError("angles need four values", "angles")
    return AngleSettings(*map(float, a))


def _cmd_bell(scn):
    cfg, device, drive = _load(scn)
    o = scn.options
    mode = o.get("mapping", DEFAULT_MAPPING)
    pump = steady_state(device, drive)
    res = optimize_angles(device, pump, mode) if o.get("optimize") else chsh(device, pump, _angles(o), mode)
    out = res.to_dict()
    if "peak_counts" in o:
        det = _detector(scn)
        tau = _tau_grid(device, {"points": o.get("points", 4001), "span": o.get("span", 8.0)})
        ex = _expected(scn, correlation_trace(device, pump, tau), det)
        sigma, _ = estimate_error(ex, device, res.angles, n_sims=int(o.get("n_sims", 2500)),
                                  seed=scn.seed, mode=mode, maximize=bool(o.get("maximize", True)))
        out["sigma_S"] = sigma
    meta = _meta(scn, cfg)
    meta["mapping_mode"] = mode
    write_json(scn.out, out, meta)


def _cmd_fit(scn):
    o = scn.options
    if "sweep" not in o:
        raise ParameterError("fit needs a sweep CSV", "sweep")
    cols = read_csv(o["sweep"])
    for k in ("detuning_hz", "transmission"):
        if k not in cols:
            raise ParameterError(f"sweep file lacks column '{k}'", k)
    trace = SweepTrace(TWO_PI * cols["detuning_hz"], cols["transmission"])
    res = fit_doublet(trace, coupling=o.get("coupling", "auto"), seed=scn.seed)
    out = _fit_dict(res, o.get("omega0"))
    if res.alternate is not None:
        out["alternate"] = _fit_dict(res.alternate, o.get("omega0"))
    cfg = {"sweep_hash": config_hash(cols["transmission"].round(15).tolist())}
    write_json(scn.out, out, _meta(scn, cfg, sweep=str(o["sweep"])))
    if o.get("emit_model"):
        model = doublet_model(res, trace.detuning)
        rows = zip(cols["detuning_hz"], cols["transmission"], model)
        write_csv(o["emit_model"], ["detuning_hz", "transmission", "model"], rows, _meta(scn, cfg))


def _fit_dict(res: FitResult, omega0=None):
    d = {
        "gamma0_hz": res.gamma0 / TWO_PI,
        "gamma_e_hz": res.gamma_e / TWO_PI,
        "beta_hz": res.beta / TWO_PI,
        "splitting_hz": 2 * res.beta / TWO_PI,
        "center_offset_hz": res.center_offset / TWO_PI,
        "residual_rms": res.residual_rms,
        "converged": res.converged,
        "branch": res.branch,
    }
    if omega0:
        q0, qe, qb = res.quality_factors(float(omega0))
        d.update({"q0": q0, "qe": qe, "qbeta": qb})
    return d


def _cmd_regime_sweep(scn):
    cfg, device, drive = _load(scn)
    ratios = scn.options.get("ratios", REGIME_RATIOS)
    rows = regime_sweep(device, ratios, detuning=drive.detuning)
    cols = ["ratio", "contrast_ff", "contrast_fb", "contrast_bf", "contrast_bb", "contrast_co"]
    data = [(r.ratio, *(r.contrast[c] for c in CONFIGS), r.co_propagating) for r in rows]
    write_csv(scn.out, cols, data, _meta(scn, cfg, metric="hull peak-to-trough / peak"))


def _cmd_detuning_sweep(scn):
    cfg, device, _ = _load(scn)
    ghz = scn.options.get("detunings_ghz", PAPER_DETUNINGS_GHZ)
    dets = TWO_PI * 1e9 * np.asarray(ghz, dtype=float)
    tau = _tau_grid(device, scn.options)
    rep = detuning_sweep(device, dets, tau)
    rows = []
    for p in rep.points:
        for k, t in enumerate(tau):
            rows.append((p.detuning / TWO_PI, t, *(p.trace[c][k] for c in CONFIGS), p.trace.envelope[k], p.phi))
    cols = ["detuning_hz", "tau_s", "p_ff", "p_fb", "p_bf", "p_bb", "envelope", "phi_rad"]
    extra = {
        "fb_zero_own": " ".join(_fmt(p.fb_zero_own) for p in rep.points),
        "fb_zero_envelope": " ".join(_fmt(p.fb_zero_env) for p in rep.points),
        "flip_own": " ".join(_fmt(v) for v in rep.flips("own")),
        "flip_thresholds": f"{FLIP_HIGH} {FLIP_LOW}",
    }
    write_csv(scn.out, cols, rows, _meta(scn, cfg, **extra))


COMMANDS = {
    "sweep-pump": _cmd_sweep_pump,
    "state-evolve": _cmd_state_evolve,
    "correlations": _cmd_correlations,
    "montecarlo": _cmd_montecarlo,
    "bell": _cmd_bell,
    "fit": _cmd_fit,
    "regime-sweep": _cmd_regime_sweep,
    "detuning-sweep": _cmd_detuning_sweep,
}

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def run_scenario(scenario, stderr=None):
    """Execute a scenario and return the exit status (0, 2 or 3)."""
    import sys

    err = stderr or sys.stderr
    try:
        scn = scenario if isinstance(scenario, Scenario) else Scenario.from_dict(scenario)
        scn.validate()
        COMMANDS[scn.command](scn)
    except ParameterError as exc:
        key = getattr(exc, "key", None)
        err.write(f"input error{f' [{key}]' if key else ''}: {exc}\n")
        return EXIT_INPUT
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        err.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (NumericalError, FloatingPointError) as exc:
        err.write(f"numerical error: {exc}\n")
        return EXIT_NUMERIC
    return EXIT_OK
