import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.stats import kurtosis

from wgmbiphoton.correlations import CONFIGS, CorrelationTrace, correlation_trace
from wgmbiphoton.detection import (
    DetectorModel, ExpectedCounts, bin_edges_for, convolve_response, expected_counts,
    sample_histogram, sample_replicates, scale_to_peak,
)
from wgmbiphoton.model import ParameterError, ResolutionError

FF, FB, BF, BB = CONFIGS
STEP = 0.5e-12


def _trace(values, tau):
    vals = {c: np.asarray(values[k], dtype=float) for k, c in enumerate(CONFIGS)}
    return CorrelationTrace(tau, vals, sum(vals.values()))


def _delta_trace(n=4001):
    tau = (np.arange(n) - n // 2) * STEP
    d = np.zeros(n)
    d[n // 2] = 1 / STEP
    return _trace([d, d, d, d], tau)


def test_zero_jitter_identity(device, pump):
    tau = np.linspace(-2e-9, 2e-9, 2001)
    tr = correlation_trace(device, pump, tau)
    out = convolve_response(tr, DetectorModel(jitter_sigma=0.0))
    for c in CONFIGS:
        assert np.array_equal(out[c], tr[c])


def test_delta_becomes_gaussian():
    tr = _delta_trace()
    det = DetectorModel(jitter_sigma=16e-12)
    out = convolve_response(tr, det)[FF]
    t = tr.tau
    area = trapezoid(out, t)
    assert area == pytest.approx(1.0, rel=1e-6)
    var = trapezoid(out * t**2, t) / area
    assert np.sqrt(var) == pytest.approx(np.sqrt(2) * 16e-12, rel=1e-3)
    # excess kurtosis of a sample drawn from the response
    rng = np.random.default_rng(1)
    x = rng.choice(t, size=200000, p=out / out.sum())
    assert abs(kurtosis(x)) < 0.1


def test_convolution_preserves_integral(device, pump):
    tau = np.arange(-4000, 4001) * STEP
    tr = correlation_trace(device, pump, tau)
    out = convolve_response(tr, DetectorModel())
    for c in CONFIGS:
        assert trapezoid(out[c], tau) == pytest.approx(trapezoid(tr[c], tau), rel=1e-6)
    assert np.allclose(out.envelope, sum(out[c] for c in CONFIGS))


def test_coarse_grid_rejected():
    tau = np.linspace(-1e-9, 1e-9, 101)
    tr = _trace([np.ones(101)] * 4, tau)
    with pytest.raises(ResolutionError, match="jitter"):
        convolve_response(tr, DetectorModel())
    with pytest.raises(ParameterError):
        convolve_response(_trace([np.ones(3)] * 4, np.array([0, 1e-13, 5e-13])), DetectorModel())


def test_detector_validation():
    for kw in ({"jitter_sigma": -1.0}, {"efficiency": 1.5}, {"bin_width": 0.0},
               {"acquisition_time": -1.0}, {"background_rate": -0.1}):
        with pytest.raises(ParameterError):
            DetectorModel(**kw)
    assert DetectorModel().pair_sigma == pytest.approx(np.sqrt(2) * 16e-12)


def test_bin_edges():
    tau = np.linspace(-1e-9, 1e-9, 2001)
    e = bin_edges_for(tau, 4e-12)
    assert e.size == 501
    assert np.allclose(np.diff(e), 4e-12)
    assert e[0] >= tau[0] - 1e-21 and e[-1] <= tau[-1] + 1e-21
    with pytest.raises(ParameterError):
        bin_edges_for(tau, 1e-8)


def test_expected_counts_scaling():
    tau = np.arange(-2000, 2001) * STEP
    v = np.exp(-np.abs(tau) / 1e-10)
    tr = _trace([v, 0.5 * v, 0.25 * v, v], tau)
    det = DetectorModel(acquisition_time=100.0)
    a = expected_counts(tr, det, pair_rate_scale=1e12)
    b = expected_counts(tr, DetectorModel(acquisition_time=200.0), pair_rate_scale=1e12)
    for c in CONFIGS:
        assert np.allclose(b.counts[c], 2 * a.counts[c])
    zero = expected_counts(tr, DetectorModel(acquisition_time=0.0, background_rate=5.0))
    assert all(np.all(v == 0) for v in zero.counts.values())
    total = a.counts[FF].sum()
    assert total == pytest.approx(1e12 * 0.54**2 * 100 * trapezoid(v, tau), rel=1e-3)


def test_background_additive():
    tau = np.arange(-200, 201) * STEP
    v = np.exp(-np.abs(tau) / 2e-11)
    tr = _trace([v] * 4, tau)
    a = expected_counts(tr, DetectorModel(), 1e9)
    b = expected_counts(tr, DetectorModel(background_rate=3.0), 1e9)
    for c in CONFIGS:
        assert np.allclose(b.counts[c] - a.counts[c], 3.0)


def test_scale_to_peak():
    e = ExpectedCounts(np.arange(4.0), {FF: np.array([1.0, 4.0, 2.0]), BB: np.array([0.5, 1.0, 0.0])})
    s = scale_to_peak(e, 300.0)
    assert s.counts[FF].max() == pytest.approx(300.0)
    assert s.counts[BB][1] == pytest.approx(75.0)
    with pytest.raises(ParameterError):
        scale_to_peak(ExpectedCounts(np.arange(3.0), {FF: np.zeros(2)}), 1.0)


def test_poisson_statistics():
    lam = np.full(2000, 40.0)
    e = ExpectedCounts(np.arange(2001.0), {c: lam for c in CONFIGS})
    reps = sample_replicates(e, 50, seed=3)
    x = reps[FF].ravel()
    assert x.mean() == pytest.approx(40.0, rel=0.01)
    assert x.var() / x.mean() == pytest.approx(1.0, abs=0.03)
    assert reps[FF].shape == (50, 2000)


def test_sampling_deterministic():
    e = ExpectedCounts(np.arange(101.0), {c: np.linspace(0, 20, 100) for c in CONFIGS})
    a, b = sample_histogram(e, seed=9), sample_histogram(e, seed=9)
    for c in CONFIGS:
        assert np.array_equal(a[c], b[c])
    assert not np.array_equal(sample_histogram(e, seed=10)[FF], a[FF])
    assert np.array_equal(a.bin_centers, e.bin_centers)
