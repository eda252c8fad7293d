"""Finite-rank approximation of the fast transfer operator.

The operator acts on triples of holomorphic functions on disks E_1, E_r,
E_{q-1} built on the real chords

    a_1 = -(2 lam - 1)/(2 lam + 1),   b_1 = (5 lam + 1)/(5 lam - 1),
    a_{q-1} = -b_1,  b_{q-1} = -a_1,  a_r = -(c lam - 1)/(c lam + 1) = -b_r,

with c > 1 chosen so that all inverse branches map disk closures strictly
inside their targets.  Functions are represented by Taylor coefficients
about the disk centers and the operator by the matrix of Cauchy-coefficient
functionals; the two parabolic branch families are summed either by direct
truncation (Re s > 1/2) or in closed form through the Hurwitz zeta function,
which provides the meromorphic continuation in s with possible poles at
s = (1-k)/2.

Branch bookkeeping (full symmetry, functions (f_1, f_r, f_{q-1})):

    target E_1    <- middles(f_r) + right-parabolic(f_{q-1})
    target E_r    <- left-parabolic(f_1) + middles(f_r) + right-par(f_{q-1})
    target E_q-1  <- left-parabolic(f_1) + middles(f_r)

For q = 3 the middle branch set and E_r are empty and the block layout is
2x2 anti-diagonal.  The plus/minus operators act on (f_{q-1}, f_r) with the
J-twisted branch sums of the symmetry reduction; for q = 3 they reduce to
+-(sum_n tau_s(h_1^n J)) on the single disk E_{q-1}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .analytic import Disk, coefficients_from_samples, default_node_count, hurwitz_zeta
from .errors import (
    BranchCutError,
    DiskConstructionError,
    DomainError,
    ModeError,
    PoleError,
)
from .moebius import hecke_group

TRUNCATE_DELTA = 0.01  # guard above Re s = 1/2 for the direct mode


# ---------------------------------------------------------------------------
# Disk system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiskSystem:
    """The three expansion disks (two for q = 3) and the verified c."""

    q: int
    c_param: float
    e1: Disk
    er: Disk | None
    eq1: Disk
    middle_active: bool

    def disks(self) -> list[tuple[str, Disk]]:
        out = [("e1", self.e1)]
        if self.middle_active:
            out.append(("er", self.er))
        out.append(("eq1", self.eq1))
        return out

    def with_nodes(self, p: int) -> "DiskSystem":
        mk = lambda d: Disk(d.center, d.radius, p) if d else None
        return DiskSystem(self.q, self.c_param, mk(self.e1), mk(self.er), mk(self.eq1), self.middle_active)


def _chord_disk(a: float, b: float, p: int = 64) -> Disk:
    return Disk(complex((a + b) / 2.0), (b - a) / 2.0, p)


def _apply(mat: np.ndarray, z: np.ndarray) -> np.ndarray:
    return (mat[0, 0] * z + mat[0, 1]) / (mat[1, 0] * z + mat[1, 1])


def _hpow(q: int, k: int, n: int) -> np.ndarray:
    grp = hecke_group(q)
    m = np.eye(2)
    base = np.asarray(grp.h[k].mat, dtype=float)
    for _ in range(n):
        m = m @ base
    return m


def verify_disk_system(
    q: int, dsys: DiskSystem, samples: int = 72, n_parabolic: int = 50
) -> list[str]:
    """Check the closure inclusions on dense boundary samples.

    Returns a list of violated conditions (empty if the system is valid):
    inverse middle branches map every disk closure into E_r, inverse
    parabolic powers map the two non-fixed closures into E_1 resp. E_{q-1}
    (including the monotone limit points +-1), the inverse parabolic
    derivative is contracting on its target, and J maps E_r to itself and
    E_1 to E_{q-1}.
    """
    grp = hecke_group(q)
    bad: list[str] = []

    def boundary(d: Disk) -> np.ndarray:
        ang = 2.0 * np.pi * np.arange(samples) / samples
        return d.center + d.radius * np.exp(1j * ang)

    def inside(z: np.ndarray, d: Disk) -> bool:
        return bool(np.all(np.abs(z - d.center) < d.radius * (1.0 - 1e-12)))

    named = dict(dsys.disks())
    h1inv = np.asarray(grp.h[1].inv().mat, dtype=float)
    hq1inv = np.asarray(grp.h[q - 1].inv().mat, dtype=float)

    if dsys.middle_active:
        for k in range(2, q - 1):
            hkinv = np.asarray(grp.h[k].inv().mat, dtype=float)
            for name, d in named.items():
                if not inside(_apply(hkinv, boundary(d)), dsys.er):
                    bad.append(f"h{k}^-1.cl({name}) not in Er")

    par_cases = [
        ("h1", h1inv, 1.0, dsys.e1, [n for n in ("er", "eq1") if n in named]),
        ("hq1", hq1inv, -1.0, dsys.eq1, [n for n in ("e1", "er") if n in named]),
    ]
    for tag, minv, fix, target, sources in par_cases:
        # Limit point of the parabolic iteration must be interior.
        margin = target.radius - abs(fix - target.center)
        if margin <= 1e-12:
            bad.append(f"{tag} limit point {fix} not interior to target")
            continue
        for name in sources:
            z = boundary(named[name])
            dist_prev = np.full(z.shape, np.inf)
            for n in range(1, n_parabolic + 1):
                z = _apply(minv, z)
                if not inside(z, target):
                    bad.append(f"{tag}^-{n}.cl({name}) not in target")
                    break
                # Contraction along the orbit: |(h^-1)'| < 1 wherever the
                # iterates live.  (On the full disk the bound fails in a
                # lens at the parabolic fixed point, where |'| = 1.)
                der = 1.0 / np.abs(minv[1, 0] * z + minv[1, 1]) ** 2
                if np.max(der) >= 1.0:
                    bad.append(f"|({tag}^-1)'| not < 1 on iterate {n} of {name}")
                    break
                dist = np.abs(z - fix)
                if np.any(dist >= dist_prev):
                    bad.append(f"{tag} iterates of {name} not monotone at n={n}")
                    break
                dist_prev = dist
            else:
                # All later iterates stay within the monotone-shrinking
                # distance of the fixed point, so interiority persists.
                if np.max(dist_prev) >= margin:
                    bad.append(f"{tag} iterates of {name} not absorbed by n={n_parabolic}")

    # J-symmetry (ii): exact by construction, checked anyway
    if abs(-dsys.e1.center - dsys.eq1.center) > 1e-12 or abs(dsys.e1.radius - dsys.eq1.radius) > 1e-12:
        bad.append("J.E1 != Eq1")
    if dsys.middle_active and (abs(dsys.er.center) > 1e-12):
        bad.append("J.Er != Er")
    return bad


@lru_cache(maxsize=32)
def build_disk_system(q: int, c_init: float = 2.0) -> DiskSystem:
    """Construct and verify the disk system, growing c until admissible.

    Starts at c_init and multiplies c by 1.5 (at most 40 steps) until all
    closure inclusions hold on boundary samples; the decisive condition is
    that the inverse middle branches send a_{q-1} and b_1 into E_r.
    """
    if c_init <= 1.0:
        raise DomainError("c_init must be > 1")
    grp = hecke_group(q)
    lam = grp.lam
    a1 = -(2.0 * lam - 1.0) / (2.0 * lam + 1.0)
    b1 = (5.0 * lam + 1.0) / (5.0 * lam - 1.0)
    e1 = _chord_disk(a1, b1)
    eq1 = _chord_disk(-b1, -a1)
    if q == 3:
        dsys = DiskSystem(q=3, c_param=c_init, e1=e1, er=None, eq1=eq1, middle_active=False)
        bad = verify_disk_system(q, dsys)
        if bad:
            raise DiskConstructionError("; ".join(bad))
        return dsys
    c = c_init
    last_bad: list[str] = []
    for _ in range(40):
        br = (c * lam - 1.0) / (c * lam + 1.0)
        dsys = DiskSystem(
            q=q, c_param=c, e1=e1, er=_chord_disk(-br, br), eq1=eq1, middle_active=True
        )
        last_bad = verify_disk_system(q, dsys)
        if not last_bad:
            return dsys
        c *= 1.5
    raise DiskConstructionError(
        f"no admissible c found for q={q}; last violations: {'; '.join(last_bad)}"
    )


# ---------------------------------------------------------------------------
# Block builders
# ---------------------------------------------------------------------------


def _principal_power_array(base: np.ndarray, expo: complex) -> np.ndarray:
    if np.any((base.real <= 0.0) & (base.imag == 0.0)):
        raise BranchCutError("power base on the branch cut during assembly")
    return np.exp(expo * np.log(base))


def _source_powers(w: np.ndarray, center: complex, order: int) -> np.ndarray:
    """(w - center)^l for l = 0..order, stacked on the last axis."""
    out = np.empty(w.shape + (order + 1,), dtype=complex)
    out[..., 0] = 1.0
    diff = w - center
    for l in range(1, order + 1):
        out[..., l] = out[..., l - 1] * diff
    return out


def middle_branch_values(
    q: int, s: complex, zpts: np.ndarray, source_center: complex, order: int,
    ks: list[int], twisted: bool = False,
) -> np.ndarray:
    """V[p, l] = sum_{k in ks} j_s(h_k^{-1}, z_p) * (sigma h_k^{-1} z_p - c)^l.

    ``twisted`` composes with J, i.e. evaluates the source at -h_k^{-1}.z
    (the weight is unchanged because j_s(J, .) = 1).
    """
    grp = hecke_group(q)
    v = np.zeros(zpts.shape + (order + 1,), dtype=complex)
    sign = -1.0 if twisted else 1.0
    for k in ks:
        minv = np.asarray(grp.h[k].inv().mat, dtype=float)
        den = minv[1, 0] * zpts + minv[1, 1]
        jfac = _principal_power_array(1.0 / (den * den), s)
        w = sign * (minv[0, 0] * zpts + minv[0, 1]) / den
        v += jfac[..., None] * _source_powers(w, source_center, order)
    return v


def parabolic_values_truncate(
    q: int, s: complex, zpts: np.ndarray, side: str, source_center: complex,
    order: int, n_tail: int, twisted: bool = False, n_start: int = 1,
) -> np.ndarray:
    """Direct partial sum over n of the parabolic branch family.

    side='right' sums tau_s(h_{q-1}^n) (requires Re(1+z) > 0 on the target),
    side='left' sums tau_s(h_1^n) (requires Re(1-z) > 0); with ``twisted``
    the source argument is reflected through J.
    """
    lam = hecke_group(q).lam
    v = np.zeros(zpts.shape + (order + 1,), dtype=complex)
    sign = -1.0 if twisted else 1.0
    for n in range(n_start, n_tail + 1):
        t = n * lam
        if side == "right":
            den = (t * (zpts + 1.0) + 2.0) / 2.0
            w = ((2.0 - t) * zpts - t) / (2.0 * den)
        else:
            den = (t * (1.0 - zpts) + 2.0) / 2.0
            w = ((2.0 - t) * zpts + t) / (2.0 * den)
        jfac = _principal_power_array(1.0 / (den * den), s)
        v += jfac[..., None] * _source_powers(sign * w, source_center, order)
    return v


def parabolic_tail_bound(
    q: int, s: complex, target: Disk, side: str, n_tail: int
) -> float:
    """Sup-norm estimate of the discarded branch sum, n > n_tail.

    Uses |j_s(h^{-n}, z)| <= 4^sigma e^{pi |Im s|} / (n lam xi + 2)^{2 sigma}
    with xi = min Re(1 +- z) over the closed target disk, and an integral
    comparison for the n-sum.
    """
    sig = s.real
    if sig <= 0.5:
        raise ModeError("tail bound needs Re s > 1/2")
    lam = hecke_group(q).lam
    if side == "right":
        xi = 1.0 + target.center.real - target.radius
    else:
        xi = 1.0 - target.center.real - target.radius
    if xi <= 0.0:
        raise DomainError("target disk touches the parabolic fixed point")
    amp = 4.0**sig * math.exp(math.pi * abs(s.imag))
    return amp * (n_tail * lam * xi + 2.0) ** (1.0 - 2.0 * sig) / (lam * xi * (2.0 * sig - 1.0))


def parabolic_values_hurwitz(
    q: int, s: complex, zpts: np.ndarray, side: str, source_center: complex,
    order: int, twisted: bool = False, n_start: int = 1,
) -> np.ndarray:
    """Closed-form branch sums via the Hurwitz zeta function.

    With u(z) = 2/(lam (1+z)) one has h_{q-1}^{-n}.z + 1 = (2/lam)/(n+u), so
    after re-expanding the source monomial about the parabolic fixed point
    -1 the n-sum of j_s(h_{q-1}^{-n}, z) (h_{q-1}^{-n}.z - c)^l becomes

      4^s (lam(1+z))^{-2s} sum_m C(l,m) (-1-c)^{l-m} (2/lam)^m zeta(2s+m, n_start+u).

    The left family mirrors through z -> -z with v(z) = 2/(lam(1-z)) and
    expansion point +1; ``twisted`` reflects the source argument through J.
    All bases stay in the right half plane on valid disk systems, so the
    principal-branch power splitting is exact.
    """
    lam = hecke_group(q).lam
    pole_dist = min(abs(2 * s + m - 1.0) for m in range(order + 1))
    if pole_dist < 2e-6:
        raise PoleError(f"s = {s} within 1e-6 of the pole set (1-k)/2")
    if side == "right":
        base = lam * (1.0 + zpts)
    else:
        base = lam * (1.0 - zpts)
    if np.any(base.real <= 0.0):
        raise DomainError("quadrature circle crosses Re z = -+1; disk system invalid")
    u = 2.0 / base
    if np.any((n_start + u).real <= 0.0):
        raise DomainError("Re(n_start + u) <= 0 on quadrature circle")
    pref = (4.0**s) * _principal_power_array(base, -2.0 * s)
    step = (2.0 / lam) if side == "right" else (-2.0 / lam)
    zet = np.empty(zpts.shape + (order + 1,), dtype=complex)
    for m in range(order + 1):
        zet[..., m] = hurwitz_zeta(2.0 * s + m, n_start + u) * step**m
    # Reflecting the source through J is an expansion about the reflected
    # center: (-w - c)^l = (-1)^l (w - (-c))^l.
    center = -source_center if twisted else source_center
    off = (-1.0 - center) if side == "right" else (1.0 - center)
    v = np.empty(zpts.shape + (order + 1,), dtype=complex)
    for l in range(order + 1):
        acc = np.zeros(zpts.shape, dtype=complex)
        for m in range(l + 1):
            acc += comb(l, m) * off ** (l - m) * zet[..., m]
        if twisted:
            acc *= (-1.0) ** l
        v[..., l] = acc
    return pref[..., None] * v


def _richardson_levels(n0: int, count: int) -> list[int]:
    return [n0 * (2**i) for i in range(count)]


def parabolic_values_richardson(
    q: int, s: complex, zpts: np.ndarray, side: str, source_center: complex,
    order: int, n0: int = 64, levels: int = 8, twisted: bool = False,
) -> np.ndarray:
    """Richardson-extrapolated direct sums (truncate-route acceleration).

    The tail of the partial sum is a power series in 1/N with exponent
    ladder 2s-1+j, so eliminating the first ``levels - 1`` exponents from
    partial sums at N, 2N, 4N, ... recovers the limit from direct-summation
    data alone.  Used where plain truncation converges too slowly for the
    mode-agreement checks (sigma close to 1/2).
    """
    ns = _richardson_levels(n0, levels)
    partial = []
    acc = np.zeros(zpts.shape + (order + 1,), dtype=complex)
    prev = 0
    for n in ns:
        acc = acc + parabolic_values_truncate(
            q, s, zpts, side, source_center, order, n, twisted=twisted, n_start=prev + 1
        )
        partial.append(acc.copy())
        prev = n
    k = len(ns)
    rhs = np.zeros(k, dtype=complex)
    rhs[0] = 1.0
    mat = np.ones((k, k), dtype=complex)
    for j in range(1, k):
        beta = 2.0 * s - 1.0 + (j - 1)
        mat[j] = [complex(n) ** (-beta) for n in ns]
    w = np.linalg.solve(mat, rhs)
    out = np.zeros_like(partial[0])
    for wi, pi in zip(w, partial):
        out = out + wi * pi
    return out


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------


@dataclass
class OperatorMatrix:
    """Square finite-rank matrix of the transfer operator at parameter s.

    ``matrix`` has one (order+1)-sized block row/column per active disk, in
    the order given by ``disk_names``.  ``tail_bound`` is the reported
    entrywise bound for the discarded parabolic tail (0 in hurwitz mode).
    """

    q: int
    s: complex
    order: int
    mode: str  # truncate | hurwitz
    symmetry: str  # full | plus | minus
    matrix: np.ndarray
    disk_names: list[str]
    disks: list[Disk]
    c_param: float
    n_tail: int = 0
    tail_bound: float = 0.0

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def block(self, i: int, j: int) -> np.ndarray:
        m = self.order + 1
        return self.matrix[i * m : (i + 1) * m, j * m : (j + 1) * m]


def _parabolic_block(
    q, s, target: Disk, side, source_center, order, mode, n_tail, twisted, richardson
):
    zp = target.nodes()
    if mode == "hurwitz":
        v = parabolic_values_hurwitz(q, s, zp, side, source_center, order, twisted=twisted)
        bound = 0.0
    else:
        if s.real <= 0.5 + TRUNCATE_DELTA:
            raise ModeError(
                f"truncate mode needs Re s > {0.5 + TRUNCATE_DELTA}; use hurwitz mode"
            )
        if richardson:
            v = parabolic_values_richardson(
                q, s, zp, side, source_center, order, levels=richardson, twisted=twisted
            )
        else:
            v = parabolic_values_truncate(
                q, s, zp, side, source_center, order, n_tail, twisted=twisted
            )
        bound = parabolic_tail_bound(q, s, target, side, n_tail)
    return coefficients_from_samples(v, target, order), bound


def _middle_block(q, s, target: Disk, source_center, order, ks, twisted=False):
    zp = target.nodes()
    v = middle_branch_values(q, s, zp, source_center, order, ks, twisted=twisted)
    return coefficients_from_samples(v, target, order)


def assemble(
    q: int,
    s: complex,
    order: int,
    mode: str = "hurwitz",
    symmetry: str = "full",
    n_tail: int = 400,
    c_init: float = 2.0,
    nodes: int | None = None,
    richardson: int = 0,
    dsys: DiskSystem | None = None,
) -> OperatorMatrix:
    """Assemble the finite-rank transfer-operator matrix at parameter s.

    ``mode='truncate'`` sums parabolic branches directly to n_tail (needs
    Re s > 0.51; set ``richardson`` > 0 for extrapolated partial sums) and
    reports an entrywise tail bound; ``mode='hurwitz'`` uses the closed-form
    continuation.  ``symmetry`` selects the full operator or its +- parts.
    """
    s = complex(s)
    if mode not in ("truncate", "hurwitz"):
        raise ModeError(f"unknown mode {mode!r}")
    if symmetry not in ("full", "plus", "minus"):
        raise DomainError(f"unknown symmetry {symmetry!r}")
    if dsys is None:
        dsys = build_disk_system(q, c_init)
    p = nodes or default_node_count(order)
    dsys = dsys.with_nodes(p)
    m1 = order + 1
    mid_ks = list(range(2, q - 1))
    tail_max = 0.0

    def par(target, side, source_center, twisted=False):
        nonlocal tail_max
        blk, bound = _parabolic_block(
            q, s, target, side, source_center, order, mode, n_tail, twisted, richardson
        )
        # entrywise bound: scalar tail times source/target basis factors
        if bound:
            rho_t = target.radius
            bound *= max(1.0, rho_t ** (-order))
        tail_max = max(tail_max, bound)
        return blk

    if symmetry == "full":
        names = [n for n, _ in dsys.disks()]
        disks = [d for _, d in dsys.disks()]
        nblk = len(names)
        mat = np.zeros((nblk * m1, nblk * m1), dtype=complex)
        idx = {n: i for i, n in enumerate(names)}

        def put(ti, si, blk):
            mat[ti * m1 : (ti + 1) * m1, si * m1 : (si + 1) * m1] = blk

        e1, eq1 = dsys.e1, dsys.eq1
        zq1 = eq1.center
        z1 = e1.center
        put(idx["e1"], idx["eq1"], par(e1, "right", zq1))
        put(idx["eq1"], idx["e1"], par(eq1, "left", z1))
        if dsys.middle_active:
            er = dsys.er
            zr = er.center
            put(idx["e1"], idx["er"], _middle_block(q, s, e1, zr, order, mid_ks))
            put(idx["er"], idx["e1"], par(er, "left", z1))
            put(idx["er"], idx["er"], _middle_block(q, s, er, zr, order, mid_ks))
            put(idx["er"], idx["eq1"], par(er, "right", zq1))
            put(idx["eq1"], idx["er"], _middle_block(q, s, eq1, zr, order, mid_ks))
        return OperatorMatrix(
            q=q, s=s, order=order, mode=mode, symmetry=symmetry, matrix=mat,
            disk_names=names, disks=disks, c_param=dsys.c_param,
            n_tail=(n_tail if mode == "truncate" else 0), tail_bound=tail_max,
        )

    # plus / minus reduction on (E_{q-1}, E_r)
    sign = 1.0 if symmetry == "plus" else -1.0
    eq1 = dsys.eq1
    zq1 = eq1.center
    if not dsys.middle_active:
        blk = par(eq1, "left", zq1, twisted=True)
        mat = sign * blk
        return OperatorMatrix(
            q=q, s=s, order=order, mode=mode, symmetry=symmetry, matrix=mat,
            disk_names=["eq1"], disks=[eq1], c_param=dsys.c_param,
            n_tail=(n_tail if mode == "truncate" else 0), tail_bound=tail_max,
        )
    er = dsys.er
    zr = er.center
    mhalf = (q + 1) // 2
    # For q even the middle branch h_m straddles the symmetry axis and must
    # carry weight 1/2 in both the plain and the J-twisted sum (as in the
    # even functional equation); otherwise the factorization identity fails.
    if q % 2 == 0:
        plain = [(1.0, list(range(mhalf + 1, q - 1))), (0.5, [mhalf])]
        twist = [(1.0, list(range(2, mhalf))), (0.5, [mhalf])]
    else:
        plain = [(1.0, list(range(mhalf, q - 1)))]
        twist = [(1.0, list(range(2, mhalf)))]
    mat = np.zeros((2 * m1, 2 * m1), dtype=complex)

    def mid_combo(target):
        out = np.zeros((m1, m1), dtype=complex)
        for wgt, ks in plain:
            if ks:
                out += wgt * _middle_block(q, s, target, zr, order, ks)
        for wgt, ks in twist:
            if ks:
                out += sign * wgt * _middle_block(q, s, target, zr, order, ks, twisted=True)
        return out

    mat[:m1, :m1] = sign * par(eq1, "left", zq1, twisted=True)
    mat[:m1, m1:] = mid_combo(eq1)
    mat[m1:, :m1] = par(er, "right", zq1) + sign * par(er, "left", zq1, twisted=True)
    mat[m1:, m1:] = mid_combo(er)
    return OperatorMatrix(
        q=q, s=s, order=order, mode=mode, symmetry=symmetry, matrix=mat,
        disk_names=["eq1", "er"], disks=[eq1, er], c_param=dsys.c_param,
        n_tail=(n_tail if mode == "truncate" else 0), tail_bound=tail_max,
    )


def save_operator(a: OperatorMatrix, path: str) -> None:
    """Binary dump: one JSON header line, then row-major complex doubles."""
    header = {
        "q": a.q, "s": [a.s.real, a.s.imag], "order": a.order, "mode": a.mode,
        "symmetry": a.symmetry, "size": a.size, "disk_names": a.disk_names,
        "disks": [[d.center.real, d.center.imag, d.radius] for d in a.disks],
        "c_param": a.c_param, "n_tail": a.n_tail, "tail_bound": a.tail_bound,
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        fh.write(np.ascontiguousarray(a.matrix, dtype=np.complex128).tobytes())


def load_operator(path: str) -> OperatorMatrix:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        raw = fh.read()
    n = header["size"]
    mat = np.frombuffer(raw, dtype=np.complex128).reshape(n, n).copy()
    disks = [Disk(complex(re, im), r) for re, im, r in header["disks"]]
    return OperatorMatrix(
        q=header["q"], s=complex(*header["s"]), order=header["order"],
        mode=header["mode"], symmetry=header["symmetry"], matrix=mat,
        disk_names=header["disk_names"], disks=disks, c_param=header["c_param"],
        n_tail=header["n_tail"], tail_bound=header["tail_bound"],
    )


def block_involution(a: OperatorMatrix) -> np.ndarray:
    """Matrix of the J-symmetry in the Taylor basis (exact signs/swaps)."""
    if a.symmetry != "full":
        raise DomainError("involution is defined for the full operator")
    m1 = a.order + 1
    d = np.diag([(-1.0) ** l for l in range(m1)])
    n = len(a.disk_names)
    out = np.zeros((n * m1, n * m1))
    idx = {nm: i for i, nm in enumerate(a.disk_names)}
    pairs = [("e1", "eq1"), ("eq1", "e1")] + ([("er", "er")] if "er" in idx else [])
    for src, dst in pairs:
        out[idx[dst] * m1 : (idx[dst] + 1) * m1, idx[src] * m1 : (idx[src] + 1) * m1] = d
    return out


def coefficient_decay(a: OperatorMatrix) -> tuple[float, float]:
    """Fit max-entry magnitude per source-monomial column l to C * rho^l.

    Returns (C, rho); rho < 1 is the numerically observable footprint of
    nuclearity: the branch preimages sit compactly inside the source disks,
    so higher monomials enter with geometrically shrinking weight.  (The
    raw coefficient ROWS need not decay on the middle disk for q >= 4, as
    the parabolic limit points +-1 lie outside it; trace arguments work on
    strictly smaller concentric disks where rows decay too.)
    """
    m1 = a.order + 1
    nblk = len(a.disk_names)
    cols = np.zeros(m1)
    for j in range(nblk):
        for l in range(m1):
            cols[l] = max(cols[l], np.max(np.abs(a.matrix[:, j * m1 + l])))
    mask = cols > 1e-300
    ls = np.arange(m1)[mask]
    slope, intercept = np.polyfit(ls, np.log(cols[mask]), 1)
    return float(np.exp(intercept)), float(np.exp(slope))
