"""Command-line front end.

Subcommands: generators, geodesics, trace, det, zeta, zeros, verify,
eigfun, extend.  Machine-readable results go to stdout (JSON by default,
CSV with --output csv); report-producing commands additionally write
delimited files and a rendered figure into --outdir.  Exit codes: 0 on
success, 1 on numerical failure (JSON error object on stderr), 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import coding, determinant, period, plots, transfer, zeta
from .errors import HeckeZetaError
from .moebius import classify, hecke_group, set_default_precision


def parse_complex(token: str) -> complex:
    """Accept forms like '2', '1.5', '0.5+9.5337i', '0.5-2j'."""
    try:
        return complex(token.replace("i", "j").replace(" ", ""))
    except ValueError as exc:
        raise HeckeZetaError(f"cannot parse complex number {token!r}") from exc


def _provenance(**kw) -> dict:
    return {k: v for k, v in kw.items() if v is not None}


def _cfmt(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, sort_keys=True))
        return
    writer = csv.writer(sys.stdout)
    keys = sorted(payload)
    writer.writerow(keys)
    writer.writerow([payload[k] for k in keys])


def _mat_rows(g) -> list[list[float]]:
    return [[float(x) for x in row] for row in g.mat]


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def cmd_generators(args) -> int:
    grp = hecke_group(args.q)
    report = {"q": args.q, "lambda": grp.lam, "generators": {}, "identities": {}}
    for name, g in (("T", grp.T), ("S", grp.S), ("U", grp.U)):
        report["generators"][name] = _mat_rows(g)
    for k in range(1, args.q):
        fp = classify(grp.g[k])
        report["generators"][f"g{k}"] = _mat_rows(grp.g[k])
        report["identities"][f"g{k}_kind"] = fp.kind
    s2 = grp.S @ grp.S
    ts = grp.T @ grp.S
    p = ts
    for _ in range(args.q - 1):
        p = p @ ts
    report["identities"]["S^2 = id"] = bool(s2.is_identity())
    report["identities"]["(TS)^q = id"] = bool(p.is_identity(1e-9))
    report["identities"]["Q g_k = g_{q-k} Q"] = bool(
        all((grp.Q @ grp.g[k]).close_to(grp.g[args.q - k] @ grp.Q) for k in range(1, args.q))
    )
    report["identities"]["h_k J = J h_{q-k}"] = bool(
        all((grp.h[k] @ grp.J).close_to(grp.J @ grp.h[args.q - k]) for k in range(1, args.q))
    )
    _emit(report, args.output)
    return 0


def cmd_geodesics(args) -> int:
    cache = args.cache or args.cache_dir
    entries = coding.length_spectrum(args.q, args.lmax, cache_dir=cache)
    os.makedirs(args.outdir, exist_ok=True)
    base = os.path.join(args.outdir, f"spectrum_q{args.q}_L{args.lmax:g}")
    with open(base + ".csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["length", "trace", "multiplicity", "word"])
        for e in entries:
            w.writerow([repr(e.length), repr(e.trace), e.multiplicity,
                        json.dumps(coding.word_to_json(e.word))])
    coding.save_spectrum(base + ".jsonl", args.q, entries)
    plots.save_spectrum_figure(entries, args.q, base + ".png")
    _emit(
        {
            "q": args.q,
            "l_max": args.lmax,
            "entries": len(entries),
            "shortest": entries[0].length if entries else None,
            "csv": base + ".csv",
            "jsonl": base + ".jsonl",
            "figure": base + ".png",
        },
        args.output,
    )
    return 0


def cmd_trace(args) -> int:
    s = parse_complex(args.s)
    if args.mode == "words":
        val, bound = determinant.trace_by_words(args.q, args.n, s)
        payload = _provenance(
            q=args.q, n=args.n, s=_cfmt(s), mode="words",
            value=_cfmt(val), error_bound=bound,
        )
    else:
        a = transfer.assemble(args.q, s, args.order, mode=args.op_mode)
        val = determinant.trace_by_matrix(a, args.n)
        payload = _provenance(
            q=args.q, n=args.n, s=_cfmt(s), mode="matrix", order=args.order,
            op_mode=args.op_mode, c_param=a.c_param, tail_bound=a.tail_bound,
            value=_cfmt(val),
        )
    _emit(payload, args.output)
    return 0


def cmd_det(args) -> int:
    s = parse_complex(args.s)
    a = transfer.assemble(
        args.q, s, args.order, mode=args.mode, symmetry=args.symmetry,
        n_tail=args.n_tail,
    )
    val = determinant.fredholm_det(a)
    _emit(
        _provenance(
            q=args.q, s=_cfmt(s), order=args.order, mode=args.mode,
            symmetry=args.symmetry, c_param=a.c_param, n_tail=a.n_tail or None,
            tail_bound=a.tail_bound, value=_cfmt(val), abs=abs(val),
        ),
        args.output,
    )
    return 0


def cmd_zeta(args) -> int:
    s = parse_complex(args.s)
    cache = args.cache_dir
    val, tail = zeta.euler_product(args.q, s, args.lmax, cache_dir=cache)
    _emit(
        _provenance(
            q=args.q, s=_cfmt(s), l_max=args.lmax, value=_cfmt(val),
            tail_bound=tail,
        ),
        args.output,
    )
    return 0


def cmd_zeros(args) -> int:
    scan = determinant.scan_zeros(
        args.q, args.symmetry, args.tmin, args.tmax, args.tstep, args.order,
        threads=args.threads,
    )
    os.makedirs(args.outdir, exist_ok=True)
    base = os.path.join(
        args.outdir, f"scan_q{args.q}_{args.symmetry}_{args.tmin:g}_{args.tmax:g}"
    )
    with open(base + ".csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "re_det", "im_det", "abs_det"])
        for t, d in zip(scan.t_grid, scan.det_values):
            w.writerow([repr(float(t)), repr(d.real), repr(d.imag), repr(abs(d))])
    zeros_payload = {
        "q": args.q,
        "symmetry": args.symmetry,
        "order": args.order,
        "t_range": [args.tmin, args.tmax, args.tstep],
        "zeros": [
            {
                "t": z.t,
                "residual": z.residual,
                "stability": z.stability,
                "winding": z.winding,
                "symmetry": args.symmetry,
                "q": args.q,
                "M": args.order,
            }
            for z in scan.zeros
        ],
    }
    with open(base + ".zeros.json", "w", encoding="utf-8") as fh:
        json.dump(zeros_payload, fh, sort_keys=True, indent=1)
    plots.save_scan_figure(scan, base + ".png")
    print(json.dumps(zeros_payload, sort_keys=True))
    return 0


def cmd_eigfun(args) -> int:
    s = complex(0.5, args.t)
    fe = period.extract_eigenfunction(args.q, s, args.symmetry, args.order)
    data = period.eigenfunction_to_json(fe)
    c_fit, rho = fe.decay_fit()
    data["decay"] = {"C": c_fit, "rho": rho}
    ts = np.geomspace(0.2, 5.0, 50)
    data["slow_equation_experiment"] = period.slow_equation_experiment(fe, ts)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(data, fh, sort_keys=True, indent=1)
    _emit(
        {
            "q": args.q,
            "t": args.t,
            "symmetry": args.symmetry,
            "order": args.order,
            "residual": fe.residual,
            "rho": rho,
            "out": args.out,
        },
        args.output,
    )
    return 0


def cmd_extend(args) -> int:
    s = parse_complex(args.s)
    with open(args.input, encoding="utf-8") as fh:
        poly = json.load(fh)
    center = complex(*poly["center"]) if isinstance(poly["center"], list) else complex(poly["center"])
    coeffs = [complex(re, im) for re, im in poly["coeffs"]]

    def psi0(x: float) -> complex:
        acc = 0.0 + 0.0j
        for c in reversed(coeffs):
            acc = acc * (x - center) + c
        return acc

    ext = period.extend_from_fundamental(args.q, s, psi0, args.steps)
    xs = np.linspace(ext.domain[0], ext.domain[1], args.samples)
    vals = np.array([ext(float(x)) for x in xs])
    os.makedirs(args.outdir, exist_ok=True)
    base = os.path.join(args.outdir, f"extend_q{args.q}_steps{args.steps}")
    with open(base + ".csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "re_psi", "im_psi"])
        for x, v in zip(xs, vals):
            w.writerow([repr(float(x)), repr(v.real), repr(v.imag)])
    plots.save_extension_figure(xs, vals, args.q, base + ".png")
    _emit(
        {
            "q": args.q,
            "s": _cfmt(s),
            "steps": args.steps,
            "domain": list(ext.domain),
            "csv": base + ".csv",
            "figure": base + ".png",
        },
        args.output,
    )
    return 0


# ---------------------------------------------------------------------------
# Invariant suite (verify)
# ---------------------------------------------------------------------------


def run_verify(q: int, seed: int = 0, order: int = 16) -> list[tuple[str, bool, str]]:
    """The full invariant suite for one q; returns (name, passed, detail)."""
    rng = np.random.default_rng(seed)
    rows: list[tuple[str, bool, str]] = []
    grp = hecke_group(q)

    def add(name, ok, detail=""):
        rows.append((name, bool(ok), detail))

    # group identities
    s2 = grp.S @ grp.S
    ts = grp.T @ grp.S
    p = ts
    for _ in range(q - 1):
        p = p @ ts
    dev = max(
        float(np.max(np.abs((grp.Q @ grp.g[k]).mat - (grp.g[q - k] @ grp.Q).mat)))
        for k in range(1, q)
    )
    devh = max(
        float(np.max(np.abs((grp.h[k] @ grp.J).mat - (grp.J @ grp.h[q - k]).mat)))
        for k in range(1, q)
    )
    add("group identities", s2.is_identity() and p.is_identity(1e-9)
        and dev <= 1e-10 and devh <= 1e-10, f"max dev {max(dev, devh):.2e}")

    # disk system: inclusions, orbit contraction, J-symmetry
    dsys = transfer.build_disk_system(q)
    bad = transfer.verify_disk_system(q, dsys)
    add("disk inclusions + contraction + J-symmetry", not bad,
        "; ".join(bad) if bad else f"c = {dsys.c_param}")

    # partition property of the fast map on sampled points
    part = coding.slow_partition(q)
    worst = ""
    ok = True
    for _ in range(1000):
        x = float(rng.uniform(-0.999, 0.999))
        try:
            sym, y = coding.fast_step(q, x)
        except HeckeZetaError:
            continue
        if not (-1.0 < y < 1.0):
            ok, worst = False, f"image {y} left (-1,1) at x={x}"
            break
        if sym.kind == "P1":
            lo = part.e1[0]
            if not (-1.0 < y < lo + 1e-10):
                ok, worst = False, f"h1-branch image {y} outside E - E1"
                break
        if sym.kind == "Pq":
            hi = part.eq1[1]
            if not (hi - 1e-10 < y < 1.0):
                ok, worst = False, f"hq1-branch image {y} outside E - Eq1"
                break
    add("fast-map partition property (1000 samples)", ok, worst)

    # mode agreement at s = 2
    ah = transfer.assemble(q, 2.0, order, mode="hurwitz")
    at = transfer.assemble(q, 2.0, order, mode="truncate", n_tail=400)
    diff = float(np.max(np.abs(ah.matrix - at.matrix)))
    add("mode agreement (s=2)", diff <= max(1e-10, at.tail_bound),
        f"entrywise {diff:.2e} <= {max(1e-10, at.tail_bound):.2e}")

    # Schwarz symmetry and real determinant
    sc = complex(0.75, 1.3)
    d1 = determinant.fredholm_det(transfer.assemble(q, sc, order))
    d2 = determinant.fredholm_det(transfer.assemble(q, sc.conjugate(), order))
    add("Schwarz symmetry", abs(d1 - d2.conjugate()) <= 1e-10, f"{abs(d1 - d2.conjugate()):.2e}")
    dr = determinant.fredholm_det(transfer.assemble(q, 1.7, order))
    add("real s gives real det", abs(dr.imag) <= 1e-10, f"Im = {dr.imag:.2e}")

    # commutation with the block involution
    jm = transfer.block_involution(ah)
    comm = float(np.max(np.abs(jm @ ah.matrix - ah.matrix @ jm)))
    add("J-involution commutes", comm <= 1e-10, f"{comm:.2e}")

    # factorization
    det_f = determinant.fredholm_det(ah)
    dp = determinant.fredholm_det(transfer.assemble(q, 2.0, order, symmetry="plus"))
    dm = determinant.fredholm_det(transfer.assemble(q, 2.0, order, symmetry="minus"))
    rel = abs(det_f - dp * dm) / abs(det_f)
    add("det factorization (s=2)", rel <= 1e-8, f"rel {rel:.2e}")

    # spectral radius sanity
    rad = float(np.max(np.abs(np.linalg.eigvals(ah.matrix))))
    add("spectral radius < 1 at s=2", rad < 1.0, f"{rad:.4f}")

    # determinism of repeated assembly
    b1 = transfer.assemble(q, complex(0.5, 2.0), order).matrix
    b2 = transfer.assemble(q, complex(0.5, 2.0), order).matrix
    add("determinism", np.array_equal(b1, b2), "")
    return rows


def cmd_verify(args) -> int:
    rows = run_verify(args.q, seed=args.seed)
    width = max(len(r[0]) for r in rows)
    all_ok = True
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
        all_ok &= ok
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="heckezeta",
        description="Selberg zeta functions of Hecke triangle groups via "
        "nuclear transfer operators",
    )
    ap.add_argument("--precision", choices=("double", "dd"), default="double")
    ap.add_argument("--output", choices=("json", "csv"), default="json")
    ap.add_argument("--cache-dir", default=None)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generators", help="print generator matrices and identities")
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_generators)

    p = sub.add_parser("geodesics", help="primitive length spectrum")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--lmax", type=float, required=True)
    p.add_argument("--cache", default=None)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_geodesics)

    p = sub.add_parser("trace", help="operator trace by words or matrix")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", required=True)
    p.add_argument("--mode", choices=("words", "matrix"), default="words")
    p.add_argument("--order", type=int, default=24)
    p.add_argument("--op-mode", choices=("truncate", "hurwitz"), default="hurwitz")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("det", help="Fredholm determinant det(1 - L)")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--s", required=True)
    p.add_argument("--order", type=int, default=24)
    p.add_argument("--mode", choices=("truncate", "hurwitz"), default="hurwitz")
    p.add_argument("--symmetry", choices=("full", "plus", "minus"), default="full")
    p.add_argument("--n-tail", type=int, default=400)
    p.set_defaults(func=cmd_det)

    p = sub.add_parser("zeta", help="Selberg zeta Euler product")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--s", required=True)
    p.add_argument("--lmax", type=float, required=True)
    p.set_defaults(func=cmd_zeta)

    p = sub.add_parser("zeros", help="scan the critical line for zeros")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--symmetry", choices=("full", "plus", "minus"), required=True)
    p.add_argument("--tmin", type=float, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--tstep", type=float, default=0.02)
    p.add_argument("--order", type=int, default=24)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eigfun", help="extract an eigenfunction at a zero")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--symmetry", choices=("plus", "minus"), required=True)
    p.add_argument("--order", type=int, default=24)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eigfun)

    p = sub.add_parser("extend", help="extend a period function from [1, 1+lam]")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--s", required=True)
    p.add_argument("--input", required=True,
                   help="JSON file {center: [re, im], coeffs: [[re, im], ...]}")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--samples", type=int, default=400)
    p.add_argument("--outdir", default=".")
    p.set_defaults(func=cmd_extend)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    set_default_precision(args.precision)
    np.random.seed(args.seed % (2**32))
    try:
        return args.func(args)
    except HeckeZetaError as exc:
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
