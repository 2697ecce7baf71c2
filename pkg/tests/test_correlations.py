import warnings
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgmbiphoton.correlations import (
    CONFIGS, branch_frequencies, correlation_trace, default_tau_grid, device_constants,
    envelope, envelope_constant, equal_pump_traces, oscillation_frequency, pair_correlation,
    weak_drive_ratio,
)
from wgmbiphoton.model import TWO_PI, DeviceParams, ModeParams, NumericalError, ParameterError
from wgmbiphoton.pump import PumpSteadyState

from goldens import DEVICE_CONSTANTS

FF, FB, BF, BB = CONFIGS


def _device(bs, bi, gs=1.0e9, gi=1.2e9, g=100.0):
    p = ModeParams(1.2e15, 0.5e9, 0.5e9, 1e9)
    s = ModeParams(1.21e15, gs / 2, gs / 2, bs)
    i = ModeParams(1.19e15, gi / 2, gi / 2, bi)
    return DeviceParams(p, s, i, g)


def test_labels():
    assert [c.label for c in CONFIGS] == ["SF-IF", "SF-IB", "SB-IF", "SB-IB"]
    assert len(CONFIGS) == 4


def test_constants_golden(device):
    k = device_constants(device)
    for name, val in DEVICE_CONSTANTS.items():
        assert getattr(k, name) == pytest.approx(val, rel=1e-10)


def test_constants_substitutions():
    k = device_constants(_device(0.0, 0.0))
    gt = k.gamma_t
    assert k.c1 == 0 and k.c2 == 0 and k.c3 == 0
    assert k.c0 == pytest.approx(gt**3)
    b = 3e9
    k = device_constants(_device(b, b))
    gt = k.gamma_t
    assert k.c2 == pytest.approx(2 * b * gt**2)
    assert k.c3 == pytest.approx(2 * b * gt**2)
    assert k.c1 == pytest.approx(8 * b**2 * gt)


def test_zero_delay_single_direction(device):
    k = device_constants(device)
    f_only = PumpSteadyState.from_energies(7.0, 0.0, 0.3)
    assert pair_correlation(device, f_only, FF, 0.0) == pytest.approx(k.n_const * k.c0**2 * 49.0, rel=1e-12)
    b_only = PumpSteadyState.from_energies(0.0, 5.0, 0.3)
    assert pair_correlation(device, b_only, BB, 0.0) == pytest.approx(k.n_const * k.c0**2 * 25.0, rel=1e-12)


def _check_envelope(device, pump, tau):
    s = sum(pair_correlation(device, pump, c, tau) for c in CONFIGS)
    ratio = s / (envelope(device, tau) * envelope_constant(device, pump))
    return np.max(np.abs(ratio - 1))


def test_envelope_identity_paper(device, pump):
    tau = default_tau_grid(device)
    assert _check_envelope(device, pump, tau) < 1e-12


@settings(max_examples=60, deadline=None)
@given(
    st.floats(0.0, 5e9), st.floats(0.0, 5e9), st.floats(1e8, 5e9), st.floats(1e8, 5e9),
    st.floats(0, 10), st.floats(0, 10), st.floats(-np.pi, np.pi),
)
def test_envelope_identity_property(bs, bi, gs, gi, f, b, phi):
    if f + b < 1e-6:
        return
    dev = _device(bs, bi, gs, gi)
    pump = PumpSteadyState.from_energies(f, b, phi)
    tau = default_tau_grid(dev, n=501)
    assert _check_envelope(dev, pump, tau) < 1e-9


def test_non_negative_and_continuous(device, pump):
    tau = default_tau_grid(device)
    eps = 1e-18
    for c in CONFIGS:
        assert np.all(pair_correlation(device, pump, c, tau) >= 0)
        left = pair_correlation(device, pump, c, -eps)
        right = pair_correlation(device, pump, c, 0.0)
        assert left == pytest.approx(right, rel=1e-6)


def test_mirror_symmetry(device):
    tau = default_tau_grid(device, n=501)
    a = PumpSteadyState.from_energies(2.0, 5.0, 0.8)
    m = PumpSteadyState.from_energies(5.0, 2.0, -0.8)
    for c, cm in ((FF, BB), (FB, BF), (BF, FB), (BB, FF)):
        p = pair_correlation(device, a, c, tau)
        q = pair_correlation(device, m, cm, tau)
        assert np.allclose(p, q, rtol=1e-12, atol=1e-12 * p.max())


def test_scale_covariance(device):
    tau = default_tau_grid(device, n=301)
    a = PumpSteadyState.from_energies(2.0, 5.0, 0.8)
    b = PumpSteadyState.from_energies(6.0, 15.0, 0.8)
    for c in CONFIGS:
        assert np.allclose(pair_correlation(device, b, c, tau), 9 * pair_correlation(device, a, c, tau), rtol=1e-12)
        assert np.allclose(
            pair_correlation(device, b, c, tau, normalized=True),
            pair_correlation(device, a, c, tau, normalized=True),
            rtol=1e-12,
        )


def test_trace_normalization(device, pump):
    tau = default_tau_grid(device)
    tr = correlation_trace(device, pump, tau)
    assert correlation_trace(device, pump, [0.0]).envelope[0] == pytest.approx(1.0, rel=1e-14)
    ab = tr.absolute()
    assert np.allclose(ab[FF], pair_correlation(device, pump, FF, tau), rtol=1e-12)
    assert np.allclose(tr.envelope, sum(tr[c] for c in CONFIGS))
    assert correlation_trace(device, pump, tau, absolute=True).scale == 1.0


def test_trace_grid_errors(device, pump):
    with pytest.raises(ParameterError):
        correlation_trace(device, pump, [])
    with pytest.raises(ParameterError):
        correlation_trace(device, pump, [0.0, -1e-9])


@pytest.mark.parametrize("config", CONFIGS)
def test_branch_frequencies(device, pump, config):
    fr = branch_frequencies(device, pump, config)
    assert fr["signal"] == pytest.approx(1.11e9, rel=1e-3)
    assert fr["idler"] == pytest.approx(0.97e9, rel=1e-3)


def test_oscillation_frequency_synthetic():
    t = np.linspace(0, 50e-9, 100001)
    assert oscillation_frequency(t, 2 + np.cos(TWO_PI * 0.7e9 * t + 0.3)) == pytest.approx(0.7e9, rel=1e-4)
    with pytest.raises(NumericalError):
        oscillation_frequency(t, np.ones_like(t))


def test_weak_coupling_monotone(device, pump):
    dev = device.scaled_decay(device.signal.beta / (0.1 * device.signal.gamma_t))
    tau = default_tau_grid(dev, n=4001)
    tr = correlation_trace(dev, pump, tau)
    for c in (FF, BB):
        v = tr[c]
        n0 = np.argmax(v)
        rise = np.diff(v[n0:])
        fall = np.diff(v[: n0 + 1])
        assert rise.max() < 0.05 * v.max() / tau.size
        assert fall.min() > -0.05 * v.max() / tau.size


def test_equal_pump_indistinguishable(device):
    tau = default_tau_grid(device)
    for phi in (np.pi, 0.0, 1.3):
        tr = equal_pump_traces(device, PumpSteadyState.from_energies(3.0, 3.0, phi), tau)
        assert np.allclose(tr[FF], tr[BB], rtol=1e-12, atol=1e-14)
        assert np.allclose(tr[FB], tr[BF], rtol=1e-12, atol=1e-14)
    with pytest.raises(ParameterError):
        equal_pump_traces(device, PumpSteadyState.from_energies(3.0, 2.0, 0.0), tau)


def test_equal_pump_phase_flip():
    # equal splittings make c2 = c3, so the counter-propagating zero-delay terms cancel
    dev = _device(3e9, 3e9)
    tau = np.array([0.0])
    pi_case = correlation_trace(dev, PumpSteadyState.from_energies(1.0, 1.0, np.pi), tau)
    zero_case = correlation_trace(dev, PumpSteadyState.from_energies(1.0, 1.0, 0.0), tau)
    assert pi_case[FF][0] == pytest.approx(0.5, rel=1e-12)
    assert pi_case[FB][0] == pytest.approx(0.0, abs=1e-15)
    assert zero_case[FF][0] < pi_case[FF][0]
    assert zero_case[FB][0] > pi_case[FB][0]


def test_equal_pump_phase_flip_paper_device(device):
    tau = np.array([0.0])
    pi_case = correlation_trace(device, PumpSteadyState.from_energies(1.0, 1.0, np.pi), tau)
    zero_case = correlation_trace(device, PumpSteadyState.from_energies(1.0, 1.0, 0.0), tau)
    assert pi_case[FF][0] > 0.45 and pi_case[FB][0] < 0.05
    assert zero_case[FB][0] > zero_case[FF][0]


def test_conjugate_phase_identity(rng):
    n1, n2 = rng.standard_normal(2)
    phi = rng.uniform(0, 2 * np.pi)
    assert abs(n1 + n2 * np.exp(1j * phi)) ** 2 == pytest.approx(abs(n1 + n2 * np.exp(-1j * phi)) ** 2)


def test_weak_drive_warning(device):
    strong = PumpSteadyState.from_energies(1e8, 1e8, 0.0)
    assert weak_drive_ratio(device, strong) > 0.01
    with pytest.warns(UserWarning, match="first-order"):
        correlation_trace(device, strong, [0.0, 1e-9])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        correlation_trace(device, PumpSteadyState.from_energies(1.0, 1.0, 0.0), [0.0, 1e-9])


def test_degenerate_device():
    with pytest.raises(ParameterError):
        device_constants(replace(_device(1e9, 1e9), signal=ModeParams(1e15, 0.0, 0.0)))
