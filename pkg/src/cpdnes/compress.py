"""Unbiased randomized compressors and their bit accounting.

The workhorse is a dithered (stochastic) quantizer on a uniform grid of
spacing theta: a scalar x with l*theta <= x < (l+1)*theta is rounded down
with probability 1 + l - x/theta and up otherwise.  The rounding is unbiased
and its variance never exceeds theta^2/4; a point sitting at offset
delta*theta inside its cell has variance exactly delta*(1-delta)*theta^2.
Inputs already on the grid are reproduced with probability one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CompressionRangeError

FLOAT_BITS = 32  # payload charged per scalar for uncompressed transmission


def bits_for(theta: float, ymax: float = 90.0) -> int:
    """Bits per scalar for grid theta covering the envelope |y| < ymax.

    ceil(log2(ymax / theta)), never below one bit.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    if ymax <= 0:
        raise ValueError("ymax must be positive")
    return max(1, math.ceil(math.log2(ymax / theta)))


@dataclass(frozen=True)
class QuantizerParams:
    """Grid spacing, bit budget, and the signal envelope they must cover."""

    theta: float
    bits: int
    ymax: float = 90.0

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.bits < 1:
            raise ValueError("bits must be at least 1")
        if self.ymax <= 0:
            raise ValueError("ymax must be positive")
        if 2.0**self.bits * self.theta < self.ymax:
            raise ValueError(
                f"representable range 2^{self.bits} * {self.theta} does not cover ymax={self.ymax}"
            )

    @classmethod
    def for_envelope(cls, theta: float, ymax: float = 90.0) -> "QuantizerParams":
        return cls(theta=theta, bits=bits_for(theta, ymax), ymax=ymax)

    @property
    def range_limit(self) -> float:
        """Inputs must satisfy |x| < 2^bits * theta."""
        return 2.0**self.bits * self.theta

    @property
    def variance_bound(self) -> float:
        return self.theta**2 / 4.0


def _stochastic_round(x: np.ndarray, theta, u: np.ndarray) -> np.ndarray:
    """Elementwise randomized rounding of x to the theta-grid using uniforms u."""
    scaled = x / theta
    level = np.floor(scaled)
    frac = scaled - level
    return (level + (u < frac)) * theta


def quantize(x, params: QuantizerParams, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Quantize a vector; returns (grid vector, transmitted bits = n * params.bits).

    The caller owns the random stream.  Raises CompressionRangeError naming the
    first coordinate whose magnitude reaches the representable limit.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    limit = params.range_limit
    bad = np.abs(x) >= limit
    if np.any(bad):
        coord = int(np.argmax(bad))
        raise CompressionRangeError(coord, float(x.flat[coord]), limit)
    u = rng.random(x.shape)
    return _stochastic_round(x, params.theta, u), x.size * params.bits


def identity_compress(x) -> tuple[np.ndarray, int]:
    """No compression; charges FLOAT_BITS per scalar."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return x.copy(), x.size * FLOAT_BITS


def relative_compress(x, phi: float, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Unbiased compressor with error second moment at most phi * ||x||^2.

    Rounds each coordinate stochastically on a grid scaled to the input norm
    (spacing 2 ||x|| sqrt(phi/n)), so the summed per-coordinate variances stay
    below phi * ||x||^2.  The zero vector is reproduced exactly.  The bill is
    one float for the norm plus enough bits per coordinate to index the grid.
    """
    if not 0 < phi:
        raise ValueError("phi must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    norm = float(np.linalg.norm(x))
    levels_per_side = math.sqrt(n / phi) / 2.0
    bits = FLOAT_BITS + n * max(1, math.ceil(math.log2(levels_per_side + 2)))
    if norm == 0.0:
        return np.zeros_like(x), bits
    spacing = 2.0 * norm * math.sqrt(phi / n)
    u = rng.random(x.shape)
    return _stochastic_round(x, spacing, u), bits


class StochasticQuantizer:
    """Per-player dithered quantization for the simulation engines.

    encode() is the deterministic map given pre-drawn uniforms, so simulation
    loops can batch their randomness; compress() draws internally.
    """

    name = "stochastic-quantizer"
    stochastic = True

    def __init__(self, theta: float, ymax: float = 90.0, bits: int | None = None):
        if bits is None:
            self.params = QuantizerParams.for_envelope(theta, ymax)
        else:
            self.params = QuantizerParams(theta=theta, bits=bits, ymax=ymax)

    @property
    def range_limit(self) -> float:
        return self.params.range_limit

    def encode(self, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        return _stochastic_round(y, self.params.theta, u)

    def compress(self, y: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, int]:
        """Compress stacked estimates (..., n); returns (values, bits per player)."""
        limit = self.params.range_limit
        bad = np.abs(y) >= limit
        if np.any(bad):
            coord = int(np.argmax(bad))
            raise CompressionRangeError(coord, float(y.flat[coord]), limit)
        return self.encode(y, rng.random(y.shape)), y.shape[-1] * self.params.bits

    def bits_per_player(self, dim: int) -> int:
        return dim * self.params.bits


class IdentityCompressor:
    """Transmit estimates verbatim at FLOAT_BITS per scalar."""

    name = "identity"
    stochastic = False
    range_limit = None

    def encode(self, y: np.ndarray, u) -> np.ndarray:
        return y.copy()

    def compress(self, y: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, int]:
        return y.copy(), y.shape[-1] * FLOAT_BITS

    def bits_per_player(self, dim: int) -> int:
        return dim * FLOAT_BITS


class RelativeCompressor:
    """Row-wise norm-scaled stochastic rounding (error <= phi * ||row||^2)."""

    name = "relative"
    stochastic = True
    range_limit = None

    def __init__(self, phi: float):
        if phi <= 0:
            raise ValueError("phi must be positive")
        self.phi = phi

    def encode(self, y: np.ndarray, u: np.ndarray) -> np.ndarray:
        n = y.shape[-1]
        norms = np.linalg.norm(y, axis=-1, keepdims=True)
        spacing = 2.0 * norms * math.sqrt(self.phi / n)
        safe = np.where(spacing > 0, spacing, 1.0)  # zero rows pass through as zero
        return np.where(spacing > 0, _stochastic_round(y, safe, u), 0.0)

    def compress(self, y: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, int]:
        return self.encode(y, rng.random(y.shape)), self.bits_per_player(y.shape[-1])

    def bits_per_player(self, dim: int) -> int:
        levels_per_side = math.sqrt(dim / self.phi) / 2.0
        return FLOAT_BITS + dim * max(1, math.ceil(math.log2(levels_per_side + 2)))
