from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.signal import find_peaks

from wgmbiphoton.model import TWO_PI, ModeParams, NumericalError, ParameterError, PumpDrive
from wgmbiphoton.pump import (
    PumpSteadyState, phase_sweep, residual, steady_state, transmission, unwrap_nearest, wrap_phase,
)

FIG6_GHZ = np.array([-0.21, -0.16, -0.11, -0.06, 0.35, 0.38, 0.41, 0.44])


def _with_pump(device, **kw):
    return replace(device, pump=replace(device.pump, **kw))


def test_uncoupled_resonance(device):
    dev = _with_pump(device, beta=0.0)
    p = dev.pump
    st_ = steady_state(dev, PumpDrive(0.0, 3.0 + 0j, 0j))
    assert st_.a_pb == 0
    assert st_.f == pytest.approx(4 * p.gamma_e * 9.0 / p.gamma_t**2, rel=1e-14)


def test_single_pump_ratio_on_resonance(device):
    st_ = steady_state(device, PumpDrive(0.0, 1.0 + 0j, 0j))
    p = device.pump
    assert st_.f / st_.b == pytest.approx((p.gamma_t / 2) ** 2 / p.beta**2, rel=1e-13)


def test_pump_energies_peak_near_split_modes(device):
    p = device.pump
    grid = np.linspace(-3 * p.beta, 3 * p.beta, 60001)
    sw = phase_sweep(device, grid)
    for energy in (sw.f, sw.b):
        idx, _ = find_peaks(energy)
        assert idx.size == 2
        # maxima are pulled slightly inside +/- beta by the linewidth
        assert np.allclose(np.abs(grid[idx]) / p.beta, 1.0, atol=0.06)


def test_relative_phase_on_resonance(device):
    p = device.pump
    st_ = steady_state(device, PumpDrive(0.0, 1.0 + 0j, 0j))
    expect = np.angle((-p.gamma_t / 2) / (-1j * p.beta * np.exp(-1j * p.phi_beta)))
    assert wrap_phase(np.angle(st_.a_pf / st_.a_pb) - expect) == pytest.approx(0.0, abs=1e-14)


def test_residual_small(device, drive):
    for det in np.linspace(-3, 3, 13) * device.pump.beta:
        drv = replace(drive, detuning=det)
        assert residual(device, drv, steady_state(device, drv)) < 1e-12
    dual = PumpDrive(0.3 * device.pump.beta, 1.0 + 0.5j, -0.7 + 0.2j)
    assert residual(device, dual, steady_state(device, dual)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(
    st.floats(-3, 3), st.floats(0.1, 10), st.floats(-np.pi, np.pi),
    st.floats(-2, 2), st.floats(-2, 2), st.floats(-np.pi, np.pi),
)
def test_residual_property(det, ratio, phase, re, im, kphase):
    m = ModeParams(1e15, 1e9, 1e9, beta=ratio * 1e9, phi_beta=phase)
    from wgmbiphoton.model import DeviceParams

    dev = DeviceParams(m, m, m, 1.0)
    drv = PumpDrive(det * 1e9, 1.0 + 0j, re + 1j * im)
    s1 = steady_state(dev, drv)
    assert residual(dev, drv, s1) < 1e-12
    k = 2.5 * np.exp(1j * kphase)
    s2 = steady_state(dev, PumpDrive(drv.detuning, k * drv.amp_f, k * drv.amp_b))
    assert s2.a_pf == pytest.approx(k * s1.a_pf, rel=1e-12, abs=1e-30)
    assert s2.a_pb == pytest.approx(k * s1.a_pb, rel=1e-12, abs=1e-30)
    assert wrap_phase(s2.phi - s1.phi) == pytest.approx(0.0, abs=1e-9)


def test_mirror_drive(device):
    dev = _with_pump(device, phi_beta=0.7)
    mirrored = _with_pump(device, phi_beta=-0.7)
    det = 0.2 * device.pump.beta
    fwd = steady_state(dev, PumpDrive(det, 1.0 + 0j, 0j))
    bwd = steady_state(mirrored, PumpDrive(det, 0j, 1.0 + 0j))
    assert bwd.a_pb == pytest.approx(fwd.a_pf, rel=1e-13)
    assert bwd.a_pf == pytest.approx(fwd.a_pb, rel=1e-13)


def test_energy_finite_everywhere(device):
    grid = np.linspace(-50, 50, 20001) * device.pump.gamma_t
    sw = phase_sweep(device, grid)
    assert np.all(np.isfinite(sw.f + sw.b))
    p = device.pump
    assert np.max(sw.f + sw.b) <= 4 * p.gamma_e / p.gamma_t**2 * 4


def test_transmission_limits(device):
    p = device.pump
    assert transmission(device, 100 * p.gamma_t) > 0.99
    assert transmission(device, -100 * p.gamma_t) > 0.99
    crit = _with_pump(device, beta=0.0)
    assert transmission(crit, 0.0) == pytest.approx(0.0, abs=1e-15)
    t = transmission(device, np.linspace(-5, 5, 101) * p.beta)
    assert np.all((t >= 0) & (t <= 1 + 1e-12))


def test_transmission_doublet_minima(device):
    p = device.pump
    dev = _with_pump(device, gamma0=p.gamma0 / 20, gamma_e=p.gamma_e / 20)
    grid = np.linspace(-2 * p.beta, 2 * p.beta, 400001)
    idx, _ = find_peaks(-transmission(dev, grid))
    assert idx.size == 2
    assert np.allclose(np.abs(grid[idx]), p.beta, rtol=0.01)


def test_transmission_single_dip_below_threshold(device):
    p = device.pump
    dev = _with_pump(device, beta=0.3 * p.gamma_t / 2)
    grid = np.linspace(-3 * p.gamma_t, 3 * p.gamma_t, 20001)
    idx, _ = find_peaks(-transmission(dev, grid))
    assert idx.size == 1


def test_singular_drive():
    with pytest.raises(ParameterError):
        ModeParams(1e15, 0.0, 0.0, beta=1e9)
    # a vanishing linewidth driven exactly on a split mode is still caught
    m = ModeParams(1e15, 0.0, 1e-300, beta=1e9)
    from wgmbiphoton.model import DeviceParams

    dev = DeviceParams(m, m, m, 1.0)
    with pytest.raises(NumericalError):
        steady_state(dev, PumpDrive(1e9, 1.0 + 0j, 0j))
    steady_state(dev, PumpDrive(0.5e9, 1.0 + 0j, 0j))


def test_phase_sweep_span_strong_coupling(device):
    p = device.pump
    dev = _with_pump(device, beta=10 * p.gamma_t)
    grid = np.linspace(-3, 3, 20001) * dev.pump.beta
    sw = phase_sweep(dev, grid)
    assert sw.pump_phase_span == pytest.approx(np.pi, rel=0.05)
    # the pair-correlation phase is twice the pump phase
    span = sw.phi_unwrapped.max() - sw.phi_unwrapped.min()
    assert span == pytest.approx(2 * sw.pump_phase_span, rel=1e-9)


def test_phase_sweep_matches_states(device):
    grid = TWO_PI * 1e9 * FIG6_GHZ
    sw = phase_sweep(device, grid)
    for k, d in enumerate(grid):
        s = steady_state(device, PumpDrive(d, 1.0 + 0j, 0j))
        assert sw.phi[k] == pytest.approx(s.phi, abs=1e-12)
        assert sw.phi_p[k] == pytest.approx(s.phi_p, abs=1e-12)


def test_phase_continuous_on_fig6_range(device):
    grid = TWO_PI * 1e9 * np.linspace(FIG6_GHZ[0], FIG6_GHZ[-1], 5001)
    sw = phase_sweep(device, grid)
    assert np.max(np.abs(np.diff(sw.phi_unwrapped))) < 0.01
    assert np.all(np.abs(sw.phi) <= np.pi)


def test_phase_sweep_empty(device):
    with pytest.raises(ParameterError):
        phase_sweep(device, [])


def test_wrap_and_unwrap():
    assert wrap_phase(-np.pi) == np.pi
    assert wrap_phase(3 * np.pi) == pytest.approx(np.pi)
    x = np.linspace(0, 6 * np.pi, 200)
    assert np.allclose(unwrap_nearest(wrap_phase(x)), x)


def test_state_accessors():
    s = PumpSteadyState.from_energies(4.0, 9.0, 1.2)
    assert s.f == pytest.approx(4.0) and s.b == pytest.approx(9.0)
    assert s.phi == pytest.approx(1.2)
    assert s.phi_p == pytest.approx(0.6)
