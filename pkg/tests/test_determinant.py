import math

import numpy as np
import pytest

from heckezeta.analytic import Disk
from heckezeta.determinant import (
    OperatorMatrix,
    det_via_traces,
    fredholm_det,
    partition_function,
    scan_zeros,
    trace_by_matrix,
    trace_by_words,
    word_tail_bound,
)
from heckezeta.errors import ModeError
from heckezeta.transfer import assemble


def _dummy_operator(mat: np.ndarray) -> OperatorMatrix:
    n = mat.shape[0]
    return OperatorMatrix(
        q=0, s=0j, order=n - 1, mode="hurwitz", symmetry="full", matrix=mat,
        disk_names=["e1"], disks=[Disk(0.0, 1.0)], c_param=2.0,
    )


def test_trace_n1_is_diagonal_sum():
    a = assemble(4, 2.0, 12)
    assert trace_by_matrix(a, 1) == pytest.approx(np.trace(a.matrix), abs=1e-14)


def test_trace_conjugate_symmetry():
    s = complex(1.2, 0.8)
    a = assemble(3, s, 16)
    b = assemble(3, s.conjugate(), 16)
    for n in (1, 2):
        assert trace_by_matrix(a, n) == pytest.approx(
            trace_by_matrix(b, n).conjugate(), abs=1e-12
        )


def test_trace_by_words_values():
    # q=3, n=1: no regular words at all
    val, bound = trace_by_words(3, 1, 2.0, cap=10)
    assert val == 0 and bound == 0
    # q=4, n=1: the single word h_2 with multiplier 1 + sqrt(2)
    val, bound = trace_by_words(4, 1, 2.0, cap=10)
    lam = 1 + math.sqrt(2)
    assert val == pytest.approx(lam**-4 / (1 - lam**-2), abs=1e-14)
    assert bound == 0


@pytest.mark.parametrize("q,n,s", [(3, 2, 2.0), (4, 1, 2.0), (5, 2, 1.5), (5, 3, 2.0)])
def test_trace_identity_matrix_vs_words(q, n, s):
    a = assemble(q, s, 24, mode="hurwitz")
    tm = trace_by_matrix(a, n)
    tw, bound = trace_by_words(q, n, s, cap=400, target=1e-6)
    stability = abs(trace_by_matrix(assemble(q, s, 32), n) - tm)
    combined = bound + stability + 1e-13
    assert abs(tm - tw) <= combined


def test_word_sum_cap_doubling_within_bound():
    for q, n, s in [(3, 2, 1.5), (5, 2, 1.2)]:
        v1, b1 = trace_by_words(q, n, s, cap=100)
        v2, _ = trace_by_words(q, n, s, cap=200)
        assert abs(v1 - v2) <= b1


def test_word_tail_bound_decreases():
    assert word_tail_bound(3, 2, 1.5, 800) < word_tail_bound(3, 2, 1.5, 200)


def test_words_mode_error_below_half():
    with pytest.raises(ModeError):
        trace_by_words(3, 2, 0.4)


def test_partition_function_single_word():
    lam = 1 + math.sqrt(2)
    assert partition_function(4, 1, 2.0, 20) == pytest.approx(lam**-4, abs=1e-14)


def test_fredholm_det_zero_matrix():
    a = _dummy_operator(np.zeros((5, 5), dtype=complex))
    assert fredholm_det(a) == pytest.approx(1.0)


def test_det_lu_vs_trace_log():
    a = assemble(3, 2.0, 24)
    assert abs(fredholm_det(a) - det_via_traces(a)) < 1e-12
    a5 = assemble(5, 2.0, 20)
    assert abs(fredholm_det(a5) - det_via_traces(a5)) < 1e-12


@pytest.mark.parametrize("q", [3, 4, 5, 7])
def test_factorization(q):
    for s in (2.0, complex(0.5, 5.0)):
        det_f = fredholm_det(assemble(q, s, 24))
        dp = fredholm_det(assemble(q, s, 24, symmetry="plus"))
        dm = fredholm_det(assemble(q, s, 24, symmetry="minus"))
        assert abs(det_f - dp * dm) / abs(det_f) <= 1e-8


def test_reality_on_real_axis():
    for s in (0.75, 1.5, 2.0, 3.0):
        d = fredholm_det(assemble(3, s, 16))
        assert abs(d.imag) <= 1e-10
    # hurwitz continuation below 1/2, away from poles
    for s in (0.3, 0.2, -0.15):
        d = fredholm_det(assemble(3, s, 16, mode="hurwitz"))
        assert np.isfinite(d.real) and abs(d.imag) <= 1e-9


def test_schwarz_symmetry_of_det():
    s = complex(0.8, 3.3)
    d1 = fredholm_det(assemble(5, s, 16))
    d2 = fredholm_det(assemble(5, s.conjugate(), 16))
    assert abs(d1 - d2.conjugate()) <= 1e-10


def test_det_truncation_convergence():
    for s in (2.0, complex(0.5, 9.5)):
        d24 = fredholm_det(assemble(3, s, 24))
        d32 = fredholm_det(assemble(3, s, 32))
        assert abs(d24 - d32) <= 1e-9


def test_scan_recovers_planted_zero():
    t0 = 3.3123456
    def planted(s, order):
        # analytic with simple zeros at 1/2 +- i t0 and no others nearby
        return 0.7 * (s - complex(0.5, t0)) * (s - complex(0.5, -t0))

    scan = scan_zeros(0, "synthetic", 3.0, 3.6, 0.05, 12, det_fn=planted)
    assert len(scan.zeros) == 1
    z = scan.zeros[0]
    assert z.t == pytest.approx(t0, abs=1e-7)
    assert z.winding == 1


def test_scan_finds_nothing_in_quiet_window():
    scan = scan_zeros(3, "minus", 1.0, 2.0, 0.1, 12)
    assert scan.zeros == []
    scan_p = scan_zeros(3, "plus", 1.0, 2.0, 0.1, 12)
    assert scan_p.zeros == []


def test_scan_threads_deterministic():
    def planted(s, order):
        return (s - complex(0.5, 1.25)) * 1.3

    a = scan_zeros(0, "x", 1.0, 1.5, 0.05, 8, det_fn=planted, threads=1)
    b = scan_zeros(0, "x", 1.0, 1.5, 0.05, 8, det_fn=planted, threads=4)
    assert np.array_equal(a.det_values, b.det_values)
    assert [z.t for z in a.zeros] == [z.t for z in b.zeros]
