"""Quantizer distribution law, moment bounds, range policing, bit accounting."""

import numpy as np
import pytest

from cpdnes.compress import (
    FLOAT_BITS,
    IdentityCompressor,
    QuantizerParams,
    RelativeCompressor,
    StochasticQuantizer,
    bits_for,
    identity_compress,
    quantize,
    relative_compress,
)
from cpdnes.errors import CompressionRangeError

DRAWS = 1_000_000


def test_two_point_law_enumerated():
    """x = 25.3 on the 10-grid lands on 20 w.p. 0.47 and on 30 w.p. 0.53."""
    rng = np.random.default_rng(1)
    params = QuantizerParams.for_envelope(10.0, 90.0)
    q, _ = quantize(np.full(DRAWS, 25.3), params, rng)
    values, counts = np.unique(q, return_counts=True)
    assert np.array_equal(values, [20.0, 30.0])
    p_up = counts[1] / DRAWS
    sigma = np.sqrt(0.53 * 0.47 / DRAWS)
    assert abs(p_up - 0.53) < 3 * sigma


def test_unbiased_within_three_sigma():
    rng = np.random.default_rng(2)
    params = QuantizerParams.for_envelope(10.0, 90.0)
    for x in (25.3, -25.3, 7.01, 44.9, 0.5):
        q, _ = quantize(np.full(DRAWS, x), params, rng)
        frac = x / 10.0 - np.floor(x / 10.0)
        sigma = np.sqrt(frac * (1 - frac)) * 10.0 / np.sqrt(DRAWS)
        assert abs(q.mean() - x) < 3 * sigma


def test_variance_never_exceeds_quarter_theta_squared():
    rng = np.random.default_rng(3)
    params = QuantizerParams.for_envelope(10.0, 90.0)
    assert params.variance_bound == 25.0
    for x in (45.0, 25.3, 33.33, -12.7):
        q, _ = quantize(np.full(DRAWS, x), params, rng)
        assert np.var(q - x) <= params.variance_bound * 1.01


def test_single_point_variance_is_frac_times_one_minus_frac():
    # offset 0.53 inside its cell: variance 0.53 * 0.47 * theta^2 = 24.91
    rng = np.random.default_rng(4)
    params = QuantizerParams.for_envelope(10.0, 90.0)
    q, _ = quantize(np.full(DRAWS, 25.3), params, rng)
    assert np.var(q - 25.3) == pytest.approx(0.53 * 0.47 * 100.0, abs=0.01)


def test_grid_points_reproduced_exactly():
    rng = np.random.default_rng(5)
    params = QuantizerParams.for_envelope(10.0, 90.0)
    q, _ = quantize(np.array([30.0, -40.0, 0.0]), params, rng)
    assert np.array_equal(q, [30.0, -40.0, 0.0])


def test_out_of_range_input_raises():
    rng = np.random.default_rng(6)
    params = QuantizerParams(theta=10.0, bits=4, ymax=90.0)
    assert params.range_limit == 160.0
    with pytest.raises(CompressionRangeError) as err:
        quantize(np.array([10.0, -200.0]), params, rng)
    assert err.value.coordinate == 1
    assert err.value.value == -200.0
    assert err.value.limit == 160.0
    # the limit itself is already unrepresentable
    with pytest.raises(CompressionRangeError):
        quantize(np.array([160.0]), params, rng)
    quantize(np.array([159.999]), params, rng)


def test_bits_for_table():
    assert bits_for(10.0, 90.0) == 4
    assert bits_for(40.0, 90.0) == 2
    assert bits_for(60.0, 90.0) == 1
    assert bits_for(90.0, 90.0) == 1  # never below one bit
    assert bits_for(500.0, 90.0) == 1
    with pytest.raises(ValueError):
        bits_for(0.0, 90.0)
    with pytest.raises(ValueError):
        bits_for(10.0, 0.0)


def test_quantizer_params_must_cover_envelope():
    with pytest.raises(ValueError):
        QuantizerParams(theta=10.0, bits=3, ymax=90.0)  # 80 < 90
    QuantizerParams(theta=10.0, bits=4, ymax=90.0)
    with pytest.raises(ValueError):
        QuantizerParams(theta=-1.0, bits=4)
    with pytest.raises(ValueError):
        QuantizerParams(theta=10.0, bits=0, ymax=5.0)


def test_quantize_bit_charge():
    rng = np.random.default_rng(7)
    params = QuantizerParams.for_envelope(40.0, 90.0)
    _, bits = quantize(np.zeros(7), params, rng)
    assert bits == 7 * 2


def test_identity_compress_charges_float_bits():
    x = np.array([1.5, -2.5])
    out, bits = identity_compress(x)
    assert np.array_equal(out, x)
    assert out is not x
    assert bits == 2 * FLOAT_BITS


def test_stochastic_quantizer_object():
    q = StochasticQuantizer(theta=40.0)
    assert q.params.bits == 2
    assert q.range_limit == 160.0
    assert q.bits_per_player(3) == 6
    # encode is deterministic given the uniforms
    y = np.array([[25.3], [44.9]])
    u = np.array([[0.2], [0.9]])
    assert np.array_equal(q.encode(y, u), q.encode(y, u))
    rng = np.random.default_rng(8)
    vals, bits = q.compress(np.array([[25.3]]), rng)
    assert bits == 2
    assert vals[0, 0] in (0.0, 40.0)
    with pytest.raises(CompressionRangeError):
        q.compress(np.array([[170.0]]), rng)
    explicit = StochasticQuantizer(theta=40.0, bits=4)
    assert explicit.params.bits == 4 and explicit.range_limit == 640.0


def test_identity_compressor_object():
    c = IdentityCompressor()
    y = np.array([[1.0, 2.0]])
    u = None
    assert np.array_equal(c.encode(y, u), y)
    rng = np.random.default_rng(9)
    vals, bits = c.compress(y, rng)
    assert np.array_equal(vals, y) and bits == 2 * FLOAT_BITS
    assert c.bits_per_player(2) == 2 * FLOAT_BITS


def test_relative_compressor_error_bounded_by_phi_norm_squared():
    rng = np.random.default_rng(10)
    comp = RelativeCompressor(phi=0.1)
    for _ in range(20):
        v = rng.normal(size=(1, 4)) * 10
        errs = np.stack([comp.encode(v, rng.random(v.shape)) - v for _ in range(4000)])
        mean_sq = (errs ** 2).sum(axis=-1).mean()
        assert mean_sq <= 0.1 * (v ** 2).sum() * 1.05
        assert abs(errs.mean()) < 0.2  # unbiased


def test_relative_compressor_zero_row_exact():
    comp = RelativeCompressor(phi=0.25)
    y = np.zeros((2, 3))
    assert np.array_equal(comp.encode(y, np.full((2, 3), 0.3)), y)
    with pytest.raises(ValueError):
        RelativeCompressor(phi=0.0)


def test_relative_compress_function():
    rng = np.random.default_rng(11)
    x = np.array([3.0, -4.0])
    out, bits = relative_compress(x, phi=0.1, rng=rng)
    assert out.shape == x.shape
    assert bits > FLOAT_BITS
    zero, _ = relative_compress(np.zeros(2), phi=0.1, rng=rng)
    assert np.array_equal(zero, np.zeros(2))
    with pytest.raises(ValueError):
        relative_compress(x, phi=-1.0, rng=rng)
