"""PSL(2,R) arithmetic for Hecke triangle groups.

Elements are kept as 2x2 real matrices normalized to |det| = 1 with a
canonical sign (first entry of (a, b, c, d) that is nonzero beyond a small
threshold is made positive), so projective identities can be tested
entrywise.  The module provides the generators of the group with parameter
q >= 3,

    T = [[1, lam], [0, 1]],   S = [[0, -1], [1, 0]],   lam = 2 cos(pi/q),

the branch elements g_k = (U^k S)^{-1} of the interval map on R^+, their
conjugates h_k under the Cayley-like change of variable t -> (t-1)/(t+1),
fixed-point classification of hyperbolic elements, and the weight-s action

    tau_s(h) f(z) = j_s(h^{-1}, z) f(h^{-1}.z),
    j_s(g, z)     = ((c z + d)^{-2})^s   (principal branch).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import BranchCutError, DomainError

INF = math.inf

# Entries smaller than this (relative to the matrix norm) count as zero when
# picking the canonical sign.
_SIGN_EPS = 1e-10


class GroupElement:
    """A 2x2 real matrix of determinant +-1 modulo overall sign.

    Determinant -1 representatives (the orientation-reversing Q and J) are
    allowed; group elements of G_q itself always have det +1.
    """

    __slots__ = ("mat", "det_sign", "label")

    def __init__(self, mat, label: str | None = None, dtype=np.float64):
        m = np.array(mat, dtype=dtype).reshape(2, 2)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det) < 1e-14:
            raise DomainError("matrix is singular, not in PGL(2,R)")
        m = m / np.sqrt(abs(det))
        flat = m.ravel()
        scale = max(abs(float(x)) for x in flat)
        for x in flat:
            if abs(float(x)) > _SIGN_EPS * scale:
                if float(x) < 0.0:
                    m = -m
                break
        self.mat = m
        self.mat.setflags(write=False)
        self.det_sign = 1 if det > 0 else -1
        self.label = label

    @property
    def abcd(self) -> tuple[float, float, float, float]:
        m = self.mat
        return float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1])

    @property
    def trace(self) -> float:
        return float(self.mat[0, 0] + self.mat[1, 1])

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        lbl = None
        if self.label and other.label:
            lbl = f"{self.label}*{other.label}"
        return GroupElement(self.mat @ other.mat, label=lbl, dtype=self.mat.dtype)

    def inv(self) -> "GroupElement":
        a, b, c, d = self.abcd
        lbl = f"({self.label})^-1" if self.label else None
        return GroupElement([[d, -b], [-c, a]], label=lbl, dtype=self.mat.dtype)

    def power(self, n: int) -> "GroupElement":
        if n == 0:
            return identity()
        base = self if n > 0 else self.inv()
        out = base
        for _ in range(abs(n) - 1):
            out = out @ base
        return out

    def is_identity(self, tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.mat - np.eye(2))) <= tol)

    def close_to(self, other: "GroupElement", tol: float = 1e-10) -> bool:
        return bool(np.max(np.abs(self.mat - other.mat)) <= tol)

    def apply(self, z):
        """Extended Moebius action; accepts real, complex or inf."""
        return apply_moebius(self, z)

    def deriv(self, z):
        """g'(z) = det / (cz + d)^2 for the normalized representative."""
        _, _, c, d = self.abcd
        den = c * z + d
        return self.det_sign / (den * den)

    def __repr__(self) -> str:
        a, b, c, d = self.abcd
        tag = f" {self.label}" if self.label else ""
        return f"GroupElement([[{a:.12g}, {b:.12g}], [{c:.12g}, {d:.12g}]]{tag})"


def identity() -> GroupElement:
    return GroupElement(np.eye(2), label="id")


def apply_moebius(g: GroupElement, z):
    """g.z = (az + b)/(cz + d) on R u {inf} or C.

    The pole -d/c maps to inf and inf maps to a/c (or inf when c = 0).
    """
    a, b, c, d = g.abcd
    if isinstance(z, float) and math.isinf(z):
        return a / c if c != 0.0 else INF
    num = a * z + b
    den = c * z + d
    if isinstance(z, complex):
        if den == 0:
            return complex(INF, 0.0)
        return num / den
    if den == 0.0:
        return INF
    return num / den


@dataclass(frozen=True)
class FixedPointData:
    """Classification of a group element by its unimodular trace.

    For hyperbolic elements ``multiplier`` is the signed eigenvalue lam(g)
    with |lam(g)| > 1 (sign follows the trace of the SL(2,R) representative),
    ``z_star`` the attractive and ``w_star`` the repelling fixed point, and
    ``derivative_at_zstar`` = |g'(z_star)| = lam(g)^{-2}.
    """

    kind: str  # hyperbolic | parabolic | elliptic | identity
    z_star: float | None = None
    w_star: float | None = None
    multiplier: float | None = None
    derivative_at_zstar: float | None = None


def classify(g: GroupElement, tol: float = 1e-10) -> FixedPointData:
    """Classify g and, when hyperbolic, locate its fixed points.

    The fixed points are the roots of c z^2 + (d - a) z - b = 0, sorted so
    that |g'(z_star)| < 1 < |g'(w_star)|.
    """
    if g.det_sign != 1:
        raise DomainError("classification requires a det = +1 representative")
    if g.is_identity(tol):
        return FixedPointData(kind="identity")
    a, b, c, d = g.abcd
    tr = a + d  # canonical sign makes tr >= 0 for trace-dominant elements
    # |trace| of the unimodular representative decides the kind.
    t = abs(tr)
    if t < 2.0 - tol:
        return FixedPointData(kind="elliptic")
    if t <= 2.0 + tol:
        if c == 0.0:
            fp = INF if abs(a - d) <= tol else b / (d - a)
        else:
            fp = (a - d) / (2.0 * c)
        return FixedPointData(kind="parabolic", z_star=fp, w_star=fp)

    disc = math.sqrt(t * t - 4.0)
    mult = (t + disc) / 2.0  # |lam(g)| > 1
    # Signed multiplier follows the sign of the SL(2,R) trace. The canonical
    # representative has been sign-normalized, so recover the sign from tr.
    signed = math.copysign(mult, tr) if tr != 0 else mult

    if c == 0.0:
        # Fixed points inf and b/(d-a); inf is attractive iff |a| > 1.
        other = b / (d - a)
        if abs(a) > 1.0:
            z_star, w_star = INF, other
        else:
            z_star, w_star = other, INF
    else:
        r1 = (a - d + math.copysign(disc, tr)) / (2.0 * c)
        r2 = (a - d - math.copysign(disc, tr)) / (2.0 * c)
        # r1 = (lam - d)/c with lam the large eigenvalue: attractive.
        z_star, w_star = r1, r2
        if abs(g.deriv(z_star)) > 1.0:
            z_star, w_star = w_star, z_star
    deriv = 1.0 / (mult * mult)
    return FixedPointData(
        kind="hyperbolic",
        z_star=z_star,
        w_star=w_star,
        multiplier=signed,
        derivative_at_zstar=deriv,
    )


def multiplier_from_trace(tr: float) -> float:
    """|lam(g)| = (|tr| + sqrt(tr^2 - 4))/2 for a hyperbolic trace."""
    t = abs(tr)
    if t <= 2.0:
        raise DomainError(f"trace {tr} is not hyperbolic")
    return (t + math.sqrt(t * t - 4.0)) / 2.0


@dataclass(frozen=True)
class HeckeGroup:
    """Generators of G_q and of the conjugated fast system.

    ``g`` maps k in 1..q-1 to the slow-system branch elements
    g_k = (U^k S)^{-1}; ``h`` maps k to h_k = Tconj g_k Tconj^{-1}.
    """

    q: int
    lam: float
    T: GroupElement
    S: GroupElement
    U: GroupElement
    g: dict[int, GroupElement]
    tconj: GroupElement
    h: dict[int, GroupElement]
    J: GroupElement
    Q: GroupElement


def hecke_generators(q: int, dtype=np.float64):
    """Return (lam, T, S, U, g) for the Hecke triangle group G_q.

    g_k is computed from the sine formula
    g_k = (1/sin(pi/q)) [[sin(k pi/q), -sin((k+1) pi/q)],
                         [-sin((k-1) pi/q), sin(k pi/q)]].
    """
    if q < 3:
        raise DomainError(f"q must be >= 3, got {q}")
    lam = 2.0 * math.cos(math.pi / q)
    T = GroupElement([[1.0, lam], [0.0, 1.0]], label="T", dtype=dtype)
    S = GroupElement([[0.0, -1.0], [1.0, 0.0]], label="S", dtype=dtype)
    U = GroupElement(T.mat @ S.mat, label="U", dtype=dtype)
    s = math.sin(math.pi / q)
    g: dict[int, GroupElement] = {}
    for k in range(1, q):
        xk = math.sin(k * math.pi / q)
        xkp = math.sin((k + 1) * math.pi / q)
        xkm = math.sin((k - 1) * math.pi / q)
        g[k] = GroupElement(
            [[xk / s, -xkp / s], [-xkm / s, xk / s]], label=f"g{k}", dtype=dtype
        )
    return lam, T, S, U, g


def conjugated_generators(q: int, dtype=np.float64):
    """Return (Tconj, h, J) with h_k = Tconj g_k Tconj^{-1}.

    Tconj = (1/sqrt2)[[1,-1],[1,1]] maps t -> (t-1)/(t+1), carrying the slow
    system on R^+ into (-1, 1); J = Tconj Q Tconj^{-1} = [[-1,0],[0,1]] acts
    as z -> -z.
    """
    _, _, _, _, g = hecke_generators(q, dtype=dtype)
    r = 1.0 / math.sqrt(2.0)
    tconj = GroupElement([[r, -r], [r, r]], label="Tc", dtype=dtype)
    tinv = tconj.inv()
    h = {
        k: GroupElement(tconj.mat @ g[k].mat @ tinv.mat, label=f"h{k}", dtype=dtype)
        for k in g
    }
    J = GroupElement([[-1.0, 0.0], [0.0, 1.0]], label="J", dtype=dtype)
    return tconj, h, J


_DEFAULT_PRECISION = "double"


def set_default_precision(precision: str) -> None:
    """Select 'double' or 'dd' (80-bit extended) for generator arithmetic.

    Operator assembly always works in complex128; the flag raises the
    precision of the group-element and coding layers.
    """
    global _DEFAULT_PRECISION
    if precision not in ("double", "dd"):
        raise DomainError(f"unknown precision {precision!r}")
    _DEFAULT_PRECISION = precision


@lru_cache(maxsize=64)
def _hecke_group_cached(q: int, precision: str) -> HeckeGroup:
    dtype = np.longdouble if precision == "dd" else np.float64
    lam, T, S, U, g = hecke_generators(q, dtype=dtype)
    tconj, h, J = conjugated_generators(q, dtype=dtype)
    Q = GroupElement([[0.0, 1.0], [1.0, 0.0]], label="Q", dtype=dtype)
    return HeckeGroup(q=q, lam=lam, T=T, S=S, U=U, g=g, tconj=tconj, h=h, J=J, Q=Q)


def hecke_group(q: int, precision: str | None = None) -> HeckeGroup:
    """Cached bundle of all generators for G_q."""
    return _hecke_group_cached(q, precision or _DEFAULT_PRECISION)


def j_weight(g: GroupElement, s: complex, z) -> complex:
    """j_s(g, z) = ((cz + d)^{-2})^s, principal branch of the outer power.

    Raises BranchCutError when (cz + d)^2 lies on (-inf, 0], i.e. when
    cz + d is purely imaginary.
    """
    _, _, c, d = g.abcd
    den = c * z + d
    base = 1.0 / (den * den)
    if isinstance(base, complex):
        if base.real <= 0.0 and abs(base.imag) <= 1e-300:
            raise BranchCutError(f"(cz+d)^-2 on the branch cut at z = {z}")
        return cmath.exp(s * cmath.log(base))
    if base <= 0.0:
        raise BranchCutError(f"(cz+d)^-2 on the branch cut at z = {z}")
    return cmath.exp(s * math.log(base))


def weight_action(h: GroupElement, s: complex, f: Callable, z) -> complex:
    """(tau_s(h) f)(z) = j_s(h^{-1}, z) f(h^{-1}.z)."""
    hinv = h.inv()
    return j_weight(hinv, s, z) * f(hinv.apply(z))
