# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt

"""
Quantized complex arithmetic.

Complex scalars are plain Python ``complex``. Gaussian integers are ``GInt``.
Array helpers hold Gaussian integers as integer-valued ``complex128`` arrays.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from superposition_networks import logger, throw
from superposition_networks.exceptions import DegenerateNetworkError, DomainError

SQRT2 = math.sqrt(2.0)
INV_SQRT2 = 1.0 / SQRT2

_GINT_PATTERN = re.compile(r"^\s*([+-]?\d+)\s*([+-])\s*(\d+)i\s*$")


@dataclass(frozen=True, order=True)
class GInt:
    re: int = 0
    im: int = 0

    def __post_init__(self):
        if not isinstance(self.re, int) or not isinstance(self.im, int):
            object.__setattr__(self, "re", int(self.re))
            object.__setattr__(self, "im", int(self.im))

    def __add__(self, other):
        return GInt(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return GInt(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return GInt(-self.re, -self.im)

    def __mul__(self, other):
        return GInt(self.re * other.re - self.im * other.im, self.re * other.im + self.im * other.re)

    def __complex__(self):
        return complex(self.re, self.im)

    def __str__(self):
        sign = "-" if self.im < 0 else "+"
        return f"{self.re}{sign}{abs(self.im)}i"

    @classmethod
    def parse(cls, text):
        """Parse ``"3-3i"`` style text."""
        match = _GINT_PATTERN.match(str(text))
        if not match:
            throw(f"Not a Gaussian integer: {text!r}", DomainError)
        im = int(match.group(3))
        return cls(int(match.group(1)), -im if match.group(2) == "-" else im)

    @classmethod
    def from_complex(cls, c):
        c = complex(c)
        if c.real != int(c.real) or c.imag != int(c.imag):
            throw(f"{c} is not integer valued", DomainError)
        return cls(int(c.real), int(c.imag))


@dataclass(frozen=True)
class FixedInput:
    """An n-bit-per-component transmit symbol, value ``bits * 2**-n / sqrt(2)``."""

    n: int
    re_bits: int = 0
    im_bits: int = 0

    def __post_init__(self):
        if self.n < 0:
            throw(f"Bit depth must be non-negative, got {self.n}", DomainError)
        limit = 1 << self.n
        for name in ("re_bits", "im_bits"):
            bits = getattr(self, name)
            if not 0 <= bits < limit:
                throw(f"{name}={bits} outside [0, {limit}) for n={self.n}", DomainError)

    @property
    def value(self):
        scale = 2.0 ** -self.n * INV_SQRT2
        return complex(self.re_bits * scale, self.im_bits * scale)

    @property
    def symbol(self):
        return (self.re_bits << self.n) | self.im_bits

    @classmethod
    def from_symbol(cls, symbol, n):
        mask = (1 << n) - 1
        if not 0 <= symbol < (1 << (2 * n)):
            throw(f"Symbol {symbol} outside the alphabet for n={n}", DomainError)
        return cls(n, (symbol >> n) & mask, symbol & mask)


def _check_finite(c):
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        throw(f"Non-finite complex value {c}", DomainError)


def quantize(c):
    """Truncate each component toward zero."""
    c = complex(c)
    _check_finite(c)
    return GInt(math.trunc(c.real), math.trunc(c.imag))


def quantize_array(values):
    values = np.asarray(values, dtype=np.complex128)
    if not np.all(np.isfinite(values)):
        throw("Non-finite value in array passed to quantize", DomainError)
    return np.trunc(values.real) + 1j * np.trunc(values.imag)


def _floor_log2(magnitude):
    _, exponent = math.frexp(magnitude)
    return exponent - 1


def bit_depth(gains):
    """
    Bit depth n: the largest floor(log2 |component|) over all gains.

    Zero components are skipped. A negative result is clamped to 0.

    Args:
        gains: iterable of complex gains

    Returns:
        int
    """
    depths = []
    for gain in gains:
        gain = complex(gain)
        _check_finite(gain)
        for component in (gain.real, gain.imag):
            if component != 0.0:
                depths.append(_floor_log2(abs(component)))
    if not depths:
        throw("All channel gain components are zero", DegenerateNetworkError)
    n = max(depths)
    if n < 0:
        logger("qarith").warning(f"Bit depth {n} below zero for sub-unity gains, clamping to 0")
        return 0
    return n


def truncate_input(c, n):
    """Keep the n most significant fractional bits of sqrt(2) times each component."""
    c = complex(c)
    _check_finite(c)
    if n < 0:
        throw(f"Bit depth must be non-negative, got {n}", DomainError)
    bits = []
    for component in (c.real, c.imag):
        if not 0.0 <= component < INV_SQRT2:
            throw(f"Component {component} outside [0, 1/sqrt(2))", DomainError)
        bits.append(min(math.floor(SQRT2 * component * 2.0**n), (1 << n) - 1))
    return FixedInput(n, bits[0], bits[1])


def truncate_input_array(values, n):
    """Vectorized truncate_input; returns (re_bits, im_bits) integer arrays."""
    values = np.asarray(values, dtype=np.complex128)
    if np.any(values.real < 0) or np.any(values.imag < 0) or np.any(values.real >= INV_SQRT2) or np.any(values.imag >= INV_SQRT2):
        throw("Input component outside [0, 1/sqrt(2))", DomainError)
    top = (1 << n) - 1
    re_bits = np.minimum(np.floor(SQRT2 * values.real * 2.0**n), top).astype(np.int64)
    im_bits = np.minimum(np.floor(SQRT2 * values.imag * 2.0**n), top).astype(np.int64)
    return re_bits, im_bits


def dsm_link(h, x):
    """Single discrete superposition link: ``[[h] x]``."""
    return quantize(complex(quantize(h)) * x.value)


def dsm_link_array(qh, values):
    """Vectorized dsm_link with an already quantized gain ``qh``."""
    return quantize_array(complex(qh) * np.asarray(values, dtype=np.complex128))


def fixed_inputs(n):
    """All 4**n FixedInputs, ordered by symbol."""
    return [FixedInput.from_symbol(symbol, n) for symbol in range(1 << (2 * n))]


def input_values(n):
    """Complex values of all 4**n symbols, indexed by symbol."""
    levels = np.arange(1 << n) * (2.0 ** -n * INV_SQRT2)
    return (levels[:, None] + 1j * levels[None, :]).reshape(-1)
