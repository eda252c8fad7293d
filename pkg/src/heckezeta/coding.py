"""Symbolic dynamics of the slow and fast interval maps.

The slow map F acts on (0, inf) minus the cusp orbit, with branches
F|_{D_k} = g_k on D_k = (g_k^{-1}.0, g_k^{-1}.infty).  Accelerating the two
parabolic branches g_1, g_{q-1} and conjugating by t -> (t-1)/(t+1) gives
the fast map H on a subset of (-1, 1), whose branch alphabet is

    { h_1^m, h_2, ..., h_{q-2}, h_{q-1}^m | m in N }.

A word in this alphabet is *reduced* if no two adjacent symbols are
parabolic of the same side, and *regular* if the doubled word is also
reduced.  Regular words of length n are exactly the elements whose fast
coding sequences are n-periodic, and their cyclic classes enumerate the
closed geodesics; the geodesic length is 2 log |lam(g)| of the multiplier.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import BoundaryError, DomainError
from .moebius import (
    GroupElement,
    hecke_group,
    identity,
    multiplier_from_trace,
)

_BOUNDARY_TOL = 1e-12

# Symbol kinds: left parabolic h_1^m, hyperbolic h_k, right parabolic h_{q-1}^m.
P1 = "P1"
H = "H"
PQ = "Pq"


@dataclass(frozen=True, order=False)
class BranchSymbol:
    """One letter of the fast coding alphabet."""

    kind: str  # P1 | H | Pq
    k: int  # branch index, 1 <= k <= q-1
    m: int = 1  # parabolic exponent; fixed at 1 for hyperbolic symbols

    def __post_init__(self):
        if self.kind not in (P1, H, PQ):
            raise DomainError(f"unknown symbol kind {self.kind!r}")
        if self.m < 1:
            raise DomainError("exponent must be >= 1")
        if self.kind == H and self.m != 1:
            raise DomainError("hyperbolic symbols carry no exponent")

    @property
    def parabolic(self) -> bool:
        return self.kind != H

    def sort_key(self) -> tuple:
        # h_1^1 < h_1^2 < ... < h_2 < ... < h_{q-2} < h_{q-1}^1 < ...
        if self.kind == P1:
            return (0, self.m)
        if self.kind == H:
            return (1, self.k)
        return (2, self.m)

    def to_json(self) -> list:
        if self.kind == H:
            return ["H", self.k]
        return [self.kind, self.m]

    @staticmethod
    def from_json(item: list, q: int) -> "BranchSymbol":
        tag, val = item
        if tag == "H":
            return BranchSymbol(H, int(val))
        if tag == P1:
            return BranchSymbol(P1, 1, int(val))
        if tag == PQ:
            return BranchSymbol(PQ, q - 1, int(val))
        raise DomainError(f"bad symbol record {item!r}")


Word = tuple[BranchSymbol, ...]


def p1(m: int) -> BranchSymbol:
    return BranchSymbol(P1, 1, m)


def pq(q: int, m: int) -> BranchSymbol:
    return BranchSymbol(PQ, q - 1, m)


def hyp(k: int) -> BranchSymbol:
    return BranchSymbol(H, k)


def _clash(a: BranchSymbol, b: BranchSymbol) -> bool:
    return a.parabolic and a.kind == b.kind


def is_reduced(word: Word) -> bool:
    return all(not _clash(word[i], word[i + 1]) for i in range(len(word) - 1))


def is_regular(word: Word) -> bool:
    if not word or not is_reduced(word):
        return False
    return not _clash(word[-1], word[0])


def word_sort_key(word: Word) -> tuple:
    return tuple(s.sort_key() for s in word)


def cyclic_representative(word: Word) -> Word:
    """Lexicographically least rotation under the fixed symbol ordering."""
    rots = [word[i:] + word[:i] for i in range(len(word))]
    return min(rots, key=word_sort_key)


def is_primitive(word: Word) -> bool:
    n = len(word)
    for d in range(1, n):
        if n % d == 0 and word == word[:d] * (n // d):
            return False
    return True


def word_to_json(word: Word) -> list:
    return [s.to_json() for s in word]


def word_from_json(items: list, q: int) -> Word:
    return tuple(BranchSymbol.from_json(it, q) for it in items)


# ---------------------------------------------------------------------------
# Interval partitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlowPartition:
    """Branch intervals of the slow and fast systems for one q.

    ``cells[k] = (g_k^{-1}.0, g_k^{-1}.infty)``; the accelerated parabolic
    cells are (n lam, (n+1) lam) and (1/((n+1) lam), 1/(n lam)).  ``e1``,
    ``er``, ``eq1`` are the conjugated outer intervals inside (-1, 1); ``er``
    is empty exactly for q = 3.
    """

    q: int
    lam: float
    cells: dict[int, tuple[float, float]]
    e1: tuple[float, float]
    er: tuple[float, float]
    eq1: tuple[float, float]

    def middle_empty(self) -> bool:
        return self.q == 3


def slow_partition(q: int) -> SlowPartition:
    grp = hecke_group(q)
    cells = {}
    for k in range(1, q):
        ginv = grp.g[k].inv()
        lo = ginv.apply(0.0)
        hi = ginv.apply(math.inf)
        cells[k] = (lo, hi)
    lam = grp.lam
    edge = (lam - 1.0) / (lam + 1.0)
    return SlowPartition(
        q=q,
        lam=lam,
        cells=cells,
        e1=(edge, 1.0),
        er=(-edge, edge),
        eq1=(-1.0, -edge),
    )


def _reject_near(x: float, value: float, what: str):
    if abs(x - value) <= _BOUNDARY_TOL * max(1.0, abs(x)):
        raise BoundaryError(f"{what}: point {x} within tolerance of {value}")


def slow_step(q: int, x: float) -> tuple[int, float]:
    """One application of the slow map: the branch index k and g_k.x."""
    if x <= 0.0 or math.isinf(x):
        raise BoundaryError(f"slow map is defined on (0, inf); got {x}")
    part = slow_partition(q)
    grp = hecke_group(q)
    for k in range(1, q):
        lo, hi = part.cells[k]
        _reject_near(x, lo, "slow_step")
        if not math.isinf(hi):
            _reject_near(x, hi, "slow_step")
        if lo < x < hi:
            return k, grp.g[k].apply(x)
    raise BoundaryError(f"point {x} not interior to any slow cell")


def fast_symbol(q: int, x: float) -> BranchSymbol:
    """The fast-coding symbol of a point x in E_st subset (-1, 1)."""
    if not -1.0 < x < 1.0:
        raise BoundaryError(f"fast map is defined inside (-1, 1); got {x}")
    grp = hecke_group(q)
    lam = grp.lam
    t = (1.0 + x) / (1.0 - x)  # inverse of the conjugation
    part = slow_partition(q)
    d1_lo = part.cells[1][0]  # = lam
    dq_hi = part.cells[q - 1][1]  # = 1/lam
    _reject_near(t, d1_lo, "fast_step")
    _reject_near(t, dq_hi, "fast_step")
    if t > d1_lo:
        n = int(math.floor(t / lam))
        _reject_near(t, n * lam, "fast_step")
        _reject_near(t, (n + 1) * lam, "fast_step")
        return p1(n)
    if t < dq_hi:
        u = 1.0 / (t * lam)
        n = int(math.floor(u))
        _reject_near(t, 1.0 / (n * lam) if n else math.inf, "fast_step")
        _reject_near(t, 1.0 / ((n + 1) * lam), "fast_step")
        return pq(q, n)
    for k in range(2, q - 1):
        lo, hi = part.cells[k]
        _reject_near(t, lo, "fast_step")
        _reject_near(t, hi, "fast_step")
        if lo < t < hi:
            return hyp(k)
    raise BoundaryError(f"point {x} not interior to any fast cell")


def symbol_element(q: int, sym: BranchSymbol) -> GroupElement:
    """The group element h_k^m named by a symbol (in fast coordinates)."""
    grp = hecke_group(q)
    if sym.kind == H:
        return grp.h[sym.k]
    base = grp.h[1] if sym.kind == P1 else grp.h[q - 1]
    return base.power(sym.m)


def fast_step(q: int, x: float) -> tuple[BranchSymbol, float]:
    """One application of the fast map: the symbol of x and H(x)."""
    sym = fast_symbol(q, x)
    return sym, symbol_element(q, sym).apply(x)


def word_to_element(q: int, word: Word) -> GroupElement:
    """Product of the branch matrices of a reduced word, in order."""
    if word and not is_reduced(word):
        raise DomainError("word is not reduced")
    out = identity()
    for sym in word:
        out = out @ symbol_element(q, sym)
    return out


def word_trace(q: int, word: Word) -> float:
    """|trace| of a reduced word, computed in the slow (g) coordinates.

    Traces are conjugation invariant, and in g coordinates the parabolic
    powers are triangular with unit diagonal, so pure parabolic-power words
    give exactly 2.0 in floating point.
    """
    if word and not is_reduced(word):
        raise DomainError("word is not reduced")
    grp = hecke_group(q)
    lam = grp.lam
    m = np.eye(2)
    for sym in word:
        if sym.kind == P1:
            y = np.array([[1.0, -sym.m * lam], [0.0, 1.0]])
        elif sym.kind == PQ:
            y = np.array([[1.0, 0.0], [-sym.m * lam, 1.0]])
        else:
            y = np.asarray(grp.g[sym.k].mat, dtype=float)
        m = m @ y
    return float(abs(m[0, 0] + m[1, 1]))


# ---------------------------------------------------------------------------
# Regular-word enumeration
# ---------------------------------------------------------------------------


def _alphabet(q: int, cap: int) -> list[BranchSymbol]:
    out = [p1(m) for m in range(1, cap + 1)]
    out += [hyp(k) for k in range(2, q - 1)]
    out += [pq(q, m) for m in range(1, cap + 1)]
    return out


def enumerate_regular_words(q: int, n: int, exponent_cap: int) -> list[Word]:
    """All regular words of length n with parabolic exponents <= cap.

    Deterministic lexicographic order, duplicate-free.  Distinct rotations of
    the same cyclic class are distinct words here (they correspond to
    distinct periodic points of the fast map).
    """
    if n < 1 or exponent_cap < 1:
        raise DomainError("need n >= 1 and exponent_cap >= 1")
    letters = sorted(_alphabet(q, exponent_cap), key=lambda s: s.sort_key())
    out: list[Word] = []

    def rec(prefix: list[BranchSymbol]):
        if len(prefix) == n:
            if not _clash(prefix[-1], prefix[0]):
                out.append(tuple(prefix))
            return
        for sym in letters:
            if prefix and _clash(prefix[-1], sym):
                continue
            prefix.append(sym)
            rec(prefix)
            prefix.pop()

    rec([])
    return out


def check_bijection(q: int, n: int, cap: int) -> dict:
    """Injectivity and hyperbolicity report for regular words of length n.

    Verifies that distinct regular words map to distinct canonical matrices
    and that every image is hyperbolic.  Violations are reported, not raised.
    """
    words = enumerate_regular_words(q, n, cap)
    seen: dict[tuple, Word] = {}
    collisions = []
    non_hyperbolic = []
    for w in words:
        el = word_to_element(q, w)
        key = tuple(np.round(el.mat, 9).ravel().tolist())
        if key in seen and seen[key] != w:
            collisions.append((seen[key], w))
        seen[key] = w
        if abs(el.trace) <= 2.0 + 1e-10:
            non_hyperbolic.append(w)
    return {
        "q": q,
        "n": n,
        "cap": cap,
        "words": len(words),
        "distinct_elements": len(seen),
        "collisions": collisions,
        "non_hyperbolic": non_hyperbolic,
        "ok": not collisions and not non_hyperbolic,
    }


# ---------------------------------------------------------------------------
# Length spectrum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LengthSpectrumEntry:
    """A primitive closed geodesic: cyclic word class, trace, and length."""

    word: Word
    trace: float
    length: float
    primitive: bool = True
    multiplicity: int = 1


def context_slope_bound(q: int) -> float:
    """Constant s_min > 0 with trace(w) >= m * lam * s_min for any regular
    word containing a parabolic exponent m (and at least one other symbol).

    All inverse-branch matrices have nonnegative entries and diagonal >= 1,
    so the bound reduces to the minimal off-diagonal entry of the non-same
    -type single symbols; this is min(lam, 1) = 1 for every q >= 3.  The
    entry inequalities are verified numerically here.
    """
    grp = hecke_group(q)
    slope = grp.lam
    for k in range(2, q - 1):
        m = grp.g[k].inv().mat
        if np.min(m) < 1.0 - 1e-9:
            raise DomainError(f"g_{k}^-1 entry below 1; pruning bound invalid")
        slope = min(slope, float(np.min(m)))
    return min(slope, 1.0)


def enumerate_primitive_classes(q: int, l_max: float) -> list[LengthSpectrumEntry]:
    """All primitive cyclic classes of regular words with length <= l_max.

    The search works in the positive-entry coordinates X(s) = matrix of the
    inverse branch, where the product over a symbol sequence is the inverse
    of the reversed word and traces agree (tr g = tr g^{-1} in SL2).
    Completeness of the pruning:

    * appending any symbol never decreases the partial trace (all X have
      nonnegative entries and unit-or-larger diagonal), so subtrees rooted
      at partial trace > 2 cosh(l_max/2) are dead;
    * a regular word containing a parabolic exponent m has trace at least
      m * lam * s_min, so exponents are enumerable up to a finite cap.
    """
    if l_max <= 0:
        raise DomainError("l_max must be positive")
    grp = hecke_group(q)
    lam = grp.lam
    tr_max = 2.0 * math.cosh(l_max / 2.0) * (1.0 + 1e-12) + 1e-9
    m_cap = int(math.floor(tr_max / (lam * context_slope_bound(q)))) + 1

    hyp_mats = {k: np.abs(np.asarray(grp.g[k].inv().mat, dtype=float)) for k in range(2, q - 1)}
    seen: set[Word] = set()
    entries: list[LengthSpectrumEntry] = []

    def emit(path: list[BranchSymbol], tr: float):
        if tr <= 2.0 + 1e-12:
            return
        word = cyclic_representative(tuple(reversed(path)))
        if word in seen:
            return
        seen.add(word)
        if not is_primitive(word):
            return
        mult = multiplier_from_trace(tr)
        length = 2.0 * math.log(mult)
        if length <= l_max + 1e-9:
            entries.append(
                LengthSpectrumEntry(word=word, trace=float(tr), length=length)
            )

    def rec(path: list[BranchSymbol], a: float, b: float, c: float, d: float):
        prev_kind = path[-1].kind if path else None
        # hyperbolic branches
        for k, hm in hyp_mats.items():
            na = a * hm[0, 0] + b * hm[1, 0]
            nb = a * hm[0, 1] + b * hm[1, 1]
            nc = c * hm[0, 0] + d * hm[1, 0]
            nd = c * hm[0, 1] + d * hm[1, 1]
            if na + nd > tr_max:
                continue
            path.append(hyp(k))
            if not _clash(path[-1], path[0]):
                emit(path, na + nd)
            rec(path, na, nb, nc, nd)
            path.pop()
        # parabolic branches, exponent loop with monotone-trace cutoff
        for kind in (P1, PQ):
            if prev_kind == kind:
                continue
            for m in range(1, m_cap + 1):
                t = m * lam
                if kind == P1:  # X = [[1, t], [0, 1]], right multiply
                    na, nb, nc, nd = a, a * t + b, c, c * t + d
                else:  # X = [[1, 0], [t, 1]]
                    na, nb, nc, nd = a + b * t, b, c + d * t, d
                if na + nd > tr_max:
                    break
                path.append(p1(m) if kind == P1 else pq(q, m))
                if not _clash(path[-1], path[0]):
                    emit(path, na + nd)
                rec(path, na, nb, nc, nd)
                path.pop()

    rec([], 1.0, 0.0, 0.0, 1.0)
    entries.sort(key=lambda e: (e.length, word_sort_key(e.word)))
    return _group_multiplicities(entries)


def _group_multiplicities(
    entries: list[LengthSpectrumEntry], tol: float = 1e-9
) -> list[LengthSpectrumEntry]:
    """Annotate entries sharing a length within tol; raw entries are kept."""
    out: list[LengthSpectrumEntry] = []
    i = 0
    while i < len(entries):
        j = i
        while j + 1 < len(entries) and entries[j + 1].length - entries[i].length <= tol:
            j += 1
        mult = j - i + 1
        for e in entries[i : j + 1]:
            out.append(
                LengthSpectrumEntry(
                    word=e.word,
                    trace=e.trace,
                    length=e.length,
                    primitive=e.primitive,
                    multiplicity=mult,
                )
            )
        i = j + 1
    return out


def length_spectrum(
    q: int, l_max: float, cache_dir: str | None = None
) -> list[LengthSpectrumEntry]:
    """Primitive length spectrum up to l_max, optionally cached as JSONL."""
    if cache_dir is not None:
        path = spectrum_cache_path(cache_dir, q, l_max)
        if os.path.exists(path):
            return load_spectrum(path, q)
    entries = enumerate_primitive_classes(q, l_max)
    if cache_dir is not None:
        save_spectrum(path, q, entries)
    return entries


def spectrum_cache_path(cache_dir: str, q: int, l_max: float) -> str:
    return os.path.join(cache_dir, f"q{q}", f"spectrum_L{l_max:g}.jsonl")


def wordlist_cache_path(cache_dir: str, q: int, n: int, cap: int) -> str:
    return os.path.join(cache_dir, f"q{q}", f"words_n{n}_cap{cap}.jsonl")


def cached_regular_words(q: int, n: int, cap: int, cache_dir: str) -> list[Word]:
    """Regular-word list with the same JSONL record schema as the spectrum."""
    path = wordlist_cache_path(cache_dir, q, n, cap)
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            return [word_from_json(json.loads(line)["word"], q) for line in fh]
    words = enumerate_regular_words(q, n, cap)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        for w in words:
            el = word_to_element(q, w)
            tr = abs(el.trace)
            mult = multiplier_from_trace(tr)
            fh.write(
                json.dumps(
                    {
                        "q": q,
                        "word": word_to_json(w),
                        "trace": tr,
                        "length": 2.0 * math.log(mult),
                        "primitive": is_primitive(w),
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    os.replace(tmp, path)
    return words


def save_spectrum(path: str, q: int, entries: list[LengthSpectrumEntry]) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(
                json.dumps(
                    {
                        "q": q,
                        "word": word_to_json(e.word),
                        "trace": e.trace,
                        "length": e.length,
                        "primitive": e.primitive,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    os.replace(tmp, path)


def load_spectrum(path: str, q: int) -> list[LengthSpectrumEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            entries.append(
                LengthSpectrumEntry(
                    word=word_from_json(rec["word"], q),
                    trace=rec["trace"],
                    length=rec["length"],
                    primitive=rec["primitive"],
                )
            )
    return _group_multiplicities(entries)
