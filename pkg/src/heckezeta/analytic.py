"""Special functions and quadrature used by the transfer-operator pipeline.

Three ingredients:

* ``principal_power`` -- z^s = exp(s Log z) on C cut along (-inf, 0].
* ``hurwitz_zeta``    -- analytic continuation of sum_{n>=0} (n+w)^{-a} for
  complex order a and complex argument w with Re w > 0, by direct summation
  to N terms plus an Euler-Maclaurin tail with Bernoulli numbers.
* ``cauchy_coefficients`` -- Taylor coefficients of a function analytic on a
  disk, extracted by trapezoidal (spectrally accurate) quadrature of the
  Cauchy integral; this realizes the rank-one functionals phi_k of the
  finite-rank operator representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import bernoulli

from .errors import BranchCutError, DomainError, PoleError

# Euler-Maclaurin depth: B_2 .. B_24.
_EM_PAIRS = 12
_BERNOULLI = bernoulli(2 * _EM_PAIRS)


def next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def default_node_count(order: int) -> int:
    """Quadrature node count for coefficient order M: 2(M+1) -> pow2, >= 64."""
    return max(64, next_pow2(2 * (order + 1)))


@dataclass(frozen=True)
class Disk:
    """A closed quadrature disk |z - center| <= radius with P nodes."""

    center: complex
    radius: float
    quadrature_points: int = 64

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("disk radius must be positive")
        if self.quadrature_points < 16 or self.quadrature_points % 2:
            raise DomainError("quadrature_points must be even and >= 16")

    def nodes(self) -> np.ndarray:
        p = self.quadrature_points
        ang = 2.0 * np.pi * np.arange(p) / p
        return self.center + self.radius * np.exp(1j * ang)

    def contains(self, z: complex, margin: float = 0.0) -> bool:
        return abs(z - self.center) < self.radius - margin


def principal_power(base, expo):
    """exp(expo * Log base) with the principal Log; rejects the cut.

    Accepts scalars or numpy arrays for ``base``.
    """
    b = np.asarray(base, dtype=complex)
    on_cut = (b.real <= 0.0) & (np.abs(b.imag) == 0.0)
    if np.any(on_cut):
        raise BranchCutError("principal_power base on (-inf, 0]")
    out = np.exp(np.asarray(expo, dtype=complex) * np.log(b))
    if np.isscalar(base) or np.ndim(base) == 0:
        return complex(out)
    return out


def hurwitz_zeta(a: complex, w):
    """zeta(a, w) = sum_{n>=0} (n+w)^{-a}, continued in a, for Re w > 0.

    Direct summation to N = max(20, ceil(2|a|)) terms plus the
    Euler-Maclaurin tail

        x^{1-a}/(a-1) + x^{-a}/2
          + sum_k B_{2k}/(2k)! * (a)_{2k-1} * x^{-a-2k+1},   x = N + w,

    with 12 Bernoulli pairs.  Accuracy ~1e-12 for |a| <= 40, Re w >= 0.3.
    ``w`` may be a numpy array; ``a`` is scalar and must avoid the pole a=1.
    """
    a = complex(a)
    if abs(a - 1.0) < 1e-12:
        raise PoleError("hurwitz_zeta has a pole at a = 1")
    warr = np.asarray(w, dtype=complex)
    if np.any(warr.real <= 0.0):
        raise DomainError("hurwitz_zeta requires Re w > 0")

    if a.real < 0.3:
        # Double-precision Euler-Maclaurin loses all digits to cancellation
        # once the direct terms grow, so hand the (cold) left half-plane to
        # arbitrary precision.  Every operator path stays on the fast branch.
        import mpmath as mp

        def _one(wv: complex) -> complex:
            return complex(mp.zeta(mp.mpc(a), mp.mpc(wv)))

        if np.isscalar(w) or np.ndim(w) == 0:
            return _one(complex(warr))
        return np.array([_one(complex(v)) for v in warr.ravel()]).reshape(warr.shape)

    n_direct = max(20, int(math.ceil(2.0 * abs(a))))
    n = np.arange(n_direct).reshape(-1, *([1] * warr.ndim))
    direct = np.sum(np.exp(-a * np.log(n + warr)), axis=0)

    x = n_direct + warr
    logx = np.log(x)
    tail = np.exp((1.0 - a) * logx) / (a - 1.0) + 0.5 * np.exp(-a * logx)
    poch = a  # (a)_{2k-1} accumulated as a rising factorial
    for k in range(1, _EM_PAIRS + 1):
        b2k = _BERNOULLI[2 * k]
        term = (b2k / math.factorial(2 * k)) * poch * np.exp(-(a + 2 * k - 1) * logx)
        tail = tail + term
        poch = poch * (a + 2 * k - 1) * (a + 2 * k)
    out = direct + tail
    if np.isscalar(w) or np.ndim(w) == 0:
        return complex(out)
    return out


def cauchy_coefficients(f: Callable, disk: Disk, order: int) -> np.ndarray:
    """Taylor coefficients c_0..c_order of f about disk.center.

    c_k = (1/2 pi i) oint f(zeta) / (zeta - center)^{k+1} d zeta, evaluated by
    the P-point trapezoid rule on the disk boundary; exact (to roundoff) for
    polynomials of degree < P.
    """
    if order < 0:
        raise DomainError("order must be >= 0")
    pts = disk.nodes()
    try:
        vals = np.asarray(f(pts), dtype=complex)
        if vals.shape != pts.shape:
            raise TypeError
    except TypeError:
        vals = np.array([f(z) for z in pts], dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise DomainError("non-finite values on the quadrature circle")
    return coefficients_from_samples(vals, disk, order)


def coefficients_from_samples(vals: np.ndarray, disk: Disk, order: int) -> np.ndarray:
    """FFT extraction of c_0..c_order from boundary samples on disk.nodes()."""
    p = disk.quadrature_points
    coeff = np.fft.fft(vals, axis=0) / p
    k = np.arange(order + 1)
    return coeff[: order + 1] * disk.radius ** (-k.reshape(-1, *([1] * (vals.ndim - 1))))
