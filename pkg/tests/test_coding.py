import itertools
import math

import numpy as np
import pytest

from heckezeta.coding import (
    BranchSymbol,
    check_bijection,
    cyclic_representative,
    enumerate_regular_words,
    fast_step,
    hyp,
    is_primitive,
    is_reduced,
    is_regular,
    length_spectrum,
    load_spectrum,
    p1,
    pq,
    slow_partition,
    slow_step,
    spectrum_cache_path,
    word_to_element,
)
from heckezeta.errors import BoundaryError, DomainError
from heckezeta.moebius import hecke_group, multiplier_from_trace


def brute_regular_words(q, n, cap):
    """Independent oracle: filter all symbol tuples by the definitions."""
    alphabet = [p1(m) for m in range(1, cap + 1)]
    alphabet += [hyp(k) for k in range(2, q - 1)]
    alphabet += [pq(q, m) for m in range(1, cap + 1)]
    out = []
    for combo in itertools.product(alphabet, repeat=n):
        if is_reduced(combo) and is_regular(combo):
            out.append(combo)
    return set(out)


# ---------------------------------------------------------------------------
# partitions and steps
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("q", [3, 4, 5, 8])
def test_partition_endpoints_two_ways(q):
    part = slow_partition(q)
    grp = hecke_group(q)
    s = math.sin(math.pi / q)
    # closed form: cell k = (xi_{k+1}/xi_k, xi_k/xi_{k-1}) with xi_j = sin(j pi/q)
    for k in range(1, q):
        lo, hi = part.cells[k]
        xi = lambda j: math.sin(j * math.pi / q)
        assert lo == pytest.approx(xi(k + 1) / xi(k), abs=1e-12)
        if k == 1:
            assert math.isinf(hi)
        else:
            assert hi == pytest.approx(xi(k) / xi(k - 1), abs=1e-12)
    assert part.cells[1][0] == pytest.approx(grp.lam, abs=1e-12)
    assert part.cells[q - 1][1] == pytest.approx(1.0 / grp.lam, abs=1e-12)


def test_er_empty_exactly_for_q3():
    assert slow_partition(3).er[0] == pytest.approx(slow_partition(3).er[1])
    p5 = slow_partition(5)
    assert p5.er[1] > p5.er[0]


def test_slow_step_examples():
    k, y = slow_step(3, 2.5)
    assert (k, y) == (1, pytest.approx(1.5))
    k, y = slow_step(3, 0.4)
    assert k == 2 and y == pytest.approx(0.4 / 0.6)
    k, _ = slow_step(4, 1.0)
    assert k == 2


def test_slow_step_boundary_rejected():
    with pytest.raises(BoundaryError):
        slow_step(3, 1.0)  # endpoint of both cells
    with pytest.raises(BoundaryError):
        slow_step(3, -0.3)


def test_fast_step_cells():
    x = (2.5 - 1) / (2.5 + 1)
    sym, y = fast_step(3, x)
    assert sym == p1(2)  # 2.5 in (2 lam, 3 lam) for lam = 1
    assert -1 < y < 1
    x = (5.2 - 1) / (5.2 + 1)
    sym, _ = fast_step(3, x)
    assert sym == p1(5)
    # middle branch for q = 4
    x = (1.0 - 1) / (1.0 + 1)
    sym, _ = fast_step(4, x)
    assert sym == hyp(2)


def test_fast_step_is_accelerated_slow_step():
    rng = np.random.default_rng(5)
    grp = hecke_group(5)
    for _ in range(200):
        x = float(rng.uniform(-0.99, 0.99))
        try:
            sym, y = fast_step(5, x)
        except BoundaryError:
            continue
        # pull back to slow coordinates and iterate the slow map
        t = (1 + x) / (1 - x)
        if sym.kind == "H":
            k, t2 = slow_step(5, t)
            assert k == sym.k
        else:
            expect_k = 1 if sym.kind == "P1" else 4
            for _ in range(sym.m):
                k, t = slow_step(5, t)
                assert k == expect_k
            t2 = t
        assert (t2 - 1) / (t2 + 1) == pytest.approx(y, abs=1e-9)


def test_fast_codomain_property():
    rng = np.random.default_rng(17)
    part = slow_partition(6)
    for _ in range(1000):
        x = float(rng.uniform(-0.999, 0.999))
        try:
            sym, y = fast_step(6, x)
        except BoundaryError:
            continue
        assert -1 - 1e-10 < y < 1 + 1e-10
        if sym.kind == "P1":
            assert y < part.e1[0] + 1e-10  # lands in E minus E_1
        if sym.kind == "Pq":
            assert y > part.eq1[1] - 1e-10


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------


def test_enumerate_against_brute_force():
    for q, n, cap in [(3, 1, 3), (3, 2, 2), (3, 3, 2), (4, 1, 2), (4, 2, 2), (5, 2, 2)]:
        got = enumerate_regular_words(q, n, cap)
        assert len(set(got)) == len(got)
        assert set(got) == brute_regular_words(q, n, cap)


def test_enumerate_examples():
    assert enumerate_regular_words(3, 1, 5) == []
    assert enumerate_regular_words(4, 1, 5) == [(hyp(2),)]
    words = enumerate_regular_words(5, 1, 1)
    assert words == [(hyp(2),), (hyp(3),)]
    # q=3, length 2: both orderings of h_1^a h_2^b are distinct regular words
    w32 = enumerate_regular_words(3, 2, 2)
    assert len(w32) == 8
    assert (p1(1), pq(3, 2)) in w32 and (pq(3, 2), p1(1)) in w32


def test_lexicographic_order():
    words = enumerate_regular_words(5, 2, 2)
    keys = [tuple(s.sort_key() for s in w) for w in words]
    assert keys == sorted(keys)


def test_word_to_element_values():
    el = word_to_element(3, (p1(1), pq(3, 1)))
    assert abs(el.trace) == pytest.approx(3.0, abs=1e-12)
    el4 = word_to_element(4, (hyp(2),))
    assert abs(el4.trace) == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    assert word_to_element(5, ()).is_identity()


def test_word_to_element_rejects_non_reduced():
    with pytest.raises(DomainError):
        word_to_element(3, (p1(1), p1(2)))


def test_symbol_invariants():
    with pytest.raises(DomainError):
        BranchSymbol("H", 2, 3)  # hyperbolic symbols carry no exponent
    with pytest.raises(DomainError):
        BranchSymbol("P1", 1, 0)


def test_check_bijection_counts():
    rep = check_bijection(3, 2, 3)
    assert rep["words"] == 18 and rep["distinct_elements"] == 18 and rep["ok"]
    rep = check_bijection(5, 1, 1)
    assert rep["words"] == 2 and rep["ok"]
    rep = check_bijection(3, 1, 4)
    assert rep["words"] == 0 and rep["ok"]  # vacuous


@pytest.mark.parametrize("q", [3, 4])
def test_semigroup_freeness_small_scale(q):
    # reduced words of length <= 3 with exponents <= 3 map injectively
    seen = {}
    for n in (1, 2, 3):
        alphabet = [p1(m) for m in range(1, 4)]
        alphabet += [hyp(k) for k in range(2, q - 1)]
        alphabet += [pq(q, m) for m in range(1, 4)]
        for combo in itertools.product(alphabet, repeat=n):
            if not is_reduced(combo):
                continue
            el = word_to_element(q, combo)
            key = tuple(np.round(el.mat, 9).ravel())
            assert key not in seen or seen[key] == combo
            seen[key] = combo


def test_parabolic_powers_have_trace_two():
    for q in (3, 5, 8):
        for m in (1, 2, 7):
            el = word_to_element(q, (p1(m),))
            assert abs(el.trace) == pytest.approx(2.0, abs=1e-12)
            el = word_to_element(q, (pq(q, m),))
            assert abs(el.trace) == pytest.approx(2.0, abs=1e-12)


# ---------------------------------------------------------------------------
# length spectrum
# ---------------------------------------------------------------------------


def test_spectrum_q3_shortest():
    entries = length_spectrum(3, 2.0)
    assert len(entries) == 1
    assert entries[0].length == pytest.approx(2 * math.log((3 + math.sqrt(5)) / 2), abs=1e-12)
    assert entries[0].trace == pytest.approx(3.0, abs=1e-12)


def test_spectrum_q4_shortest():
    entries = length_spectrum(4, 1.8)
    assert len(entries) == 1
    assert entries[0].length == pytest.approx(2 * math.log(1 + math.sqrt(2)), abs=1e-12)


def test_spectrum_entries_are_consistent():
    entries = length_spectrum(5, 6.0)
    assert entries
    for e in entries:
        assert abs(e.trace) > 2.0
        mult = multiplier_from_trace(e.trace)
        assert e.length == pytest.approx(2 * math.log(mult), abs=1e-10)
        assert e.word == cyclic_representative(e.word)
        assert is_primitive(e.word) and is_regular(e.word)


def test_spectrum_completeness_against_word_enumeration():
    # brute force: all regular words of length <= 4 with generous caps,
    # deduplicated into primitive cyclic classes below the length cutoff
    q, l_max = 3, 4.0
    tr_max = 2 * math.cosh(l_max / 2)
    classes = set()
    for n in (1, 2, 3, 4):
        for w in enumerate_regular_words(q, n, 12):
            el = word_to_element(q, w)
            if abs(el.trace) <= 2.0 or abs(el.trace) > tr_max:
                continue
            rep = cyclic_representative(w)
            if is_primitive(rep):
                classes.add(rep)
    entries = length_spectrum(q, l_max)
    assert {e.word for e in entries} == classes


def test_multiplicity_grouping():
    # q = 4 is arithmetic: length multiplicities occur
    entries = length_spectrum(4, 5.0)
    lengths = [e.length for e in entries]
    for e in entries:
        same = sum(1 for l in lengths if abs(l - e.length) <= 1e-9)
        assert e.multiplicity == same


def test_spectrum_cache_roundtrip(tmp_path):
    entries = length_spectrum(4, 4.0, cache_dir=str(tmp_path))
    path = spectrum_cache_path(str(tmp_path), 4, 4.0)
    loaded = load_spectrum(path, 4)
    assert [e.word for e in loaded] == [e.word for e in entries]
    assert all(
        a.length == b.length and a.trace == b.trace for a, b in zip(loaded, entries)
    )
    again = length_spectrum(4, 4.0, cache_dir=str(tmp_path))
    assert [e.word for e in again] == [e.word for e in entries]
