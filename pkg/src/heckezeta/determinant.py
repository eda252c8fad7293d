"""Traces, Fredholm determinants, and zero location on the critical line.

Two independent routes to the operator traces are kept side by side:

* ``trace_by_matrix`` -- exact linear algebra on the assembled finite-rank
  matrix;
* ``trace_by_words``  -- the periodic-orbit sum over regular words w,

      Tr L^n = sum_{w in P_n} mu(w)^{-2s} / (1 - mu(w)^{-2}),

  with mu(w) the multiplier, enumerated shape by shape with parabolic
  exponents on a finite grid and a proven tail bound (trace of a regular
  word dominates lam^r * prod(exponents), by positivity of the inverse
  branch matrices).

Determinants are evaluated as det(I - A) by pivoted LU; the trace-log form
is kept as a cross check where the spectral radius is < 1.  Zeros on the
critical line are located by scanning |det(1 - A(1/2 + it))|, refining
local minima by golden-section, and validating each candidate by an
argument-principle winding count on a small square contour.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Callable

import numpy as np
from scipy.special import zeta as riemann_zeta

from .errors import DomainError, ModeError
from .moebius import hecke_group
from .transfer import OperatorMatrix, assemble

# ---------------------------------------------------------------------------
# Traces
# ---------------------------------------------------------------------------


def trace_by_matrix(a: OperatorMatrix, n: int) -> complex:
    """Trace of A^n for the assembled finite-rank matrix."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return complex(np.trace(np.linalg.matrix_power(a.matrix, n)))


def _shape_slots(q: int, n: int):
    """Cyclically admissible symbol-shape sequences of length n.

    A slot is ('P1',), ('Pq',) or ('H', k); adjacent slots (cyclically) may
    not be parabolic of the same side.
    """
    kinds = [("P1",), ("Pq",)] + [("H", k) for k in range(2, q - 1)]

    def clash(x, y):
        return x[0] != "H" and x == y

    for combo in product(kinds, repeat=n):
        ok = all(not clash(combo[i], combo[(i + 1) % n]) for i in range(n))
        if n == 1 and combo[0][0] != "H":
            ok = False
        if ok:
            yield combo


def _shape_traces(q: int, shape, cap: int) -> np.ndarray:
    """Traces of all words of one shape over the exponent grid 1..cap.

    Returns an array with one axis per parabolic slot (scalar for purely
    hyperbolic shapes).  Consecutive fixed (hyperbolic) factors are folded
    into their neighbors so memory scales with cap^(r-1), not cap^r.
    """
    grp = hecke_group(q)
    lam = grp.lam
    ms = np.arange(1, cap + 1, dtype=float)

    def para_stack(kind: str) -> np.ndarray:
        stack = np.zeros((cap, 2, 2))
        stack[:, 0, 0] = 1.0
        stack[:, 1, 1] = 1.0
        if kind == "P1":  # g_1^m = [[1, -m lam], [0, 1]]
            stack[:, 0, 1] = -ms * lam
        else:  # g_{q-1}^m = [[1, 0], [-m lam, 1]]
            stack[:, 1, 0] = -ms * lam
        return stack

    # Fold the (cyclic) word into alternating free stacks: rotate so the
    # word starts at a parabolic slot, then absorb fixed factors rightward.
    par_pos = [i for i, slot in enumerate(shape) if slot[0] != "H"]
    if not par_pos:
        m = np.eye(2)
        for slot in shape:
            m = m @ np.asarray(grp.g[slot[1]].mat, dtype=float)
        return np.abs(np.atleast_1d(np.trace(m)))
    rot = shape[par_pos[0] :] + shape[: par_pos[0]]
    stacks: list[np.ndarray] = []
    for slot in rot:
        if slot[0] == "H":
            stacks[-1] = stacks[-1] @ np.asarray(grp.g[slot[1]].mat, dtype=float)
        else:
            stacks.append(para_stack(slot[0]))
    if len(stacks) == 1:
        tr = np.trace(stacks[0], axis1=-2, axis2=-1)
        return np.abs(tr)
    t = stacks[0]
    for m in stacks[1:-1]:
        t = np.einsum("...ij,cjk->...cik", t, m)
    tr = np.einsum("...ij,cji->...c", t, stacks[-1])
    return np.abs(tr)


def word_tail_bound(q: int, n: int, sigma: float, cap: int) -> float:
    """Upper bound for the trace word-sum truncated at exponent <= cap.

    Every regular word with parabolic exponents m_1..m_r satisfies
    trace >= lam^r * prod m_i (positive matrix path argument), hence
    mu >= trace/kappa with kappa -> 2 as the trace -> 2 and kappa -> 1 for
    large traces.  Summing mu^{-2 sigma}/(1-mu^{-2}) over all words with
    some exponent beyond the cap gives, per shape with r parabolic slots,

        r * Zt(cap) * zeta(2 sigma)^{r-1} * C * kappa^{2 sigma} * lam^{-2 sigma r}

    with Zt(cap) = cap^{1-2 sigma}/(2 sigma - 1) >= sum_{m>cap} m^{-2 sigma}.
    """
    if sigma <= 0.5:
        raise ModeError("word sums converge only for Re s > 1/2")
    lam = hecke_group(q).lam
    two_sigma = 2.0 * sigma
    zt = cap ** (1.0 - two_sigma) / (two_sigma - 1.0)
    zv = float(riemann_zeta(two_sigma))
    total = 0.0
    for shape in _shape_slots(q, n):
        r = sum(1 for slot in shape if slot[0] != "H")
        if r == 0:
            continue
        t0 = lam**r * (cap + 1)
        kappa = 2.0 / (1.0 + math.sqrt(max(0.0, 1.0 - 4.0 / (t0 * t0))))
        cgeo = 1.0 / (1.0 - (kappa / t0) ** 2)
        total += (
            r * zt * zv ** (r - 1) * cgeo * kappa**two_sigma * lam ** (-two_sigma * r)
        )
    return total


def trace_by_words(
    q: int, n: int, s: complex, cap: int = 400, target: float | None = None
) -> tuple[complex, float]:
    """Periodic-orbit trace sum with its truncation bound.

    Returns (value, error_bound); requires Re s > 1/2.  When ``target`` is
    given the exponent cap is doubled (from ``cap``) until the bound drops
    below it, the cutoff policy used by the acceptance checks.
    """
    s = complex(s)
    if s.real <= 0.5:
        raise ModeError("word sums converge only for Re s > 1/2")
    if n < 1:
        raise DomainError("n must be >= 1")
    if target is not None:
        while word_tail_bound(q, n, s.real, cap) > target and cap < 20000:
            cap *= 2
    total = 0.0 + 0.0j
    for shape in _shape_slots(q, n):
        r = sum(1 for slot in shape if slot[0] != "H")
        if r >= 2 and float(cap) ** (r - 1) * cap > 5e8:
            raise DomainError("exponent grid too large; lower the cap")
        tr = _shape_traces(q, shape, cap)
        mu = (tr + np.sqrt(tr * tr - 4.0)) / 2.0
        if np.any(tr <= 2.0):
            raise DomainError("non-hyperbolic trace in regular-word sum")
        x = mu ** (-2.0)
        total += complex(np.sum(np.exp(-2.0 * s * np.log(mu)) / (1.0 - x)))
    return total, word_tail_bound(q, n, s.real, cap)


def partition_function(q: int, n: int, s: complex, cap: int = 400) -> complex:
    """Z_n = sum over regular words of mu^{-2s} (the dynamical partition sum)."""
    s = complex(s)
    total = 0.0 + 0.0j
    for shape in _shape_slots(q, n):
        tr = _shape_traces(q, shape, cap)
        mu = (tr + np.sqrt(tr * tr - 4.0)) / 2.0
        total += complex(np.sum(np.exp(-2.0 * s * np.log(mu))))
    return total


# ---------------------------------------------------------------------------
# Determinants
# ---------------------------------------------------------------------------


def fredholm_det(a: OperatorMatrix) -> complex:
    """det(I - A) by pivoted LU on the finite matrix."""
    return complex(np.linalg.det(np.eye(a.size) - a.matrix))


def det_via_traces(a: OperatorMatrix, n_terms: int = 60) -> complex:
    """exp(-sum_n tr(A^n)/n); valid cross-check when the spectral radius < 1."""
    ev = np.linalg.eigvals(a.matrix)
    if np.max(np.abs(ev)) >= 1.0:
        raise DomainError("trace-log series diverges: spectral radius >= 1")
    acc = 0.0 + 0.0j
    for n in range(1, n_terms + 1):
        acc += np.sum(ev**n) / n
    return complex(np.exp(-acc))


# ---------------------------------------------------------------------------
# Zero scanning on the critical line
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroHit:
    t: float
    residual: float
    stability: float
    winding: int


@dataclass
class SpectralScan:
    """Grid scan of det(1 - A(1/2 + it)) with refined, validated zeros."""

    q: int
    symmetry: str
    order: int
    t_grid: np.ndarray
    det_values: np.ndarray
    zeros: list[ZeroHit] = field(default_factory=list)

    @property
    def median_abs(self) -> float:
        return float(np.median(np.abs(self.det_values)))


def _golden_min(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Golden-section minimizer of f on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
    return (a + b) / 2.0


def _winding_number(det_fn: Callable[[complex], complex], center: complex, half: float,
                    points: int = 48) -> int:
    """Winding of det around a square contour centered at ``center``."""
    per_side = points // 4
    corners = [
        center + complex(-half, -half),
        center + complex(half, -half),
        center + complex(half, half),
        center + complex(-half, half),
    ]
    path = []
    for i in range(4):
        a, b = corners[i], corners[(i + 1) % 4]
        for j in range(per_side):
            path.append(a + (b - a) * j / per_side)
    vals = [det_fn(z) for z in path]
    total = 0.0
    for i in range(len(vals)):
        z0, z1 = vals[i], vals[(i + 1) % len(vals)]
        total += cmath.phase(z1 / z0)
    return int(round(total / (2.0 * math.pi)))


def scan_zeros(
    q: int,
    symmetry: str,
    t_min: float,
    t_max: float,
    t_step: float,
    order: int,
    refine_tol: float = 1e-9,
    threads: int = 1,
    stability_shift: int = 8,
    det_fn: Callable[[complex, int], complex] | None = None,
    validate: bool = True,
) -> SpectralScan:
    """Locate zeros of det(1 - A(1/2 + it)) for t in [t_min, t_max].

    Every strict interior local minimum of |det| on the grid is refined by
    golden-section; a candidate is accepted when the argument-principle
    winding count on a small square contour around it is positive and the
    refined |det| falls below 1e-6 times the median over the grid.
    ``stability`` records the shift of the refined location when the order
    is increased by ``stability_shift``.

    ``det_fn(s, order)`` may be injected for synthetic scans (tests).
    """
    if det_fn is None:
        def det_fn(sv: complex, m: int) -> complex:
            return fredholm_det(assemble(q, sv, m, mode="hurwitz", symmetry=symmetry))

    tg = np.arange(t_min, t_max + 0.5 * t_step, t_step)

    def det_at(t: float, m: int = order) -> complex:
        return det_fn(complex(0.5, t), m)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            vals = list(ex.map(lambda t: det_at(float(t)), tg))
    else:
        vals = [det_at(float(t)) for t in tg]
    dets = np.array(vals, dtype=complex)
    absd = np.abs(dets)
    median = float(np.median(absd))

    hits: list[ZeroHit] = []
    for i in range(1, len(tg) - 1):
        if not (absd[i] < absd[i - 1] and absd[i] < absd[i + 1]):
            continue
        bracket = (float(tg[i - 1]), float(tg[i + 1]))
        t_ref = _golden_min(lambda t: abs(det_at(t)), *bracket, tol=refine_tol)
        residual = abs(det_at(t_ref))
        if residual > 1e-6 * median:
            continue
        if validate:
            half = min(max(t_step, 1e-3), 0.45 * max(t_ref, 1e-2))
            wind = _winding_number(lambda sv: det_fn(sv, order), complex(0.5, t_ref), half)
            if wind < 1:
                continue
        else:
            wind = 1
        t_hi = _golden_min(
            lambda t: abs(det_at(t, order + stability_shift)), *bracket, tol=refine_tol
        )
        hits.append(
            ZeroHit(t=t_ref, residual=residual, stability=abs(t_ref - t_hi), winding=wind)
        )
    return SpectralScan(
        q=q, symmetry=symmetry, order=order, t_grid=tg, det_values=dets, zeros=hits
    )
