"""Period functions: slow functional equations, operator eigenfunctions,
transport between the fast and slow pictures, and domain extension.

The slow transfer operator acts on functions of t > 0 by

    (L_{F,s} psi)(t) = sum_{k=1}^{q-1} j_s(g_k^{-1}, t) psi(g_k^{-1}.t),

and period functions are its 1-eigenfunctions; the odd/even variants fold
in the reflection Q: t -> 1/t with weight t^{-2s}.  Eigenfunctions of the
fast operator at determinant zeros are extracted as null vectors of I - A
and evaluated through their per-disk Taylor series; transported to the slow
picture they give candidate period functions (an experiment, never an
assertion).  Solutions of the folded equations are determined by their
values on [1, 1+lam] and are extended interval by interval by the
functional-equation recursion.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContainmentError, DomainError
from .moebius import GroupElement, hecke_group, j_weight
from .transfer import assemble, parabolic_values_hurwitz

EQUATIONS = ("funceq", "mod1", "mod2", "mod3", "mod4")


def tau_term(g: GroupElement, s: complex, psi: Callable, t: float) -> complex:
    """(tau_s(g) psi)(t) = j_s(g^{-1}, t) psi(g^{-1}.t)."""
    ginv = g.inv()
    return j_weight(ginv, s, t) * psi(ginv.apply(t))


def reflection_term(q: int, s: complex, psi: Callable, t: float) -> complex:
    """(tau_s(Q) psi)(t) = t^{-2s} psi(1/t)."""
    if t <= 0:
        raise DomainError("reflection is evaluated on t > 0")
    return np.exp(-2.0 * complex(s) * math.log(t)) * psi(1.0 / t)


def slow_rhs(q: int, s: complex, psi: Callable, t: float, which: str) -> complex:
    """Right-hand side of the chosen functional equation at t."""
    s = complex(s)
    grp = hecke_group(q)
    m = (q + 1) // 2
    if which == "funceq":
        return sum(tau_term(grp.g[k], s, psi, t) for k in range(1, q))
    if which in ("mod1", "mod2"):
        if q % 2:
            raise DomainError(f"{which} applies to even q only")
        sign = 1.0 if which == "mod1" else -1.0
        out = sum(tau_term(grp.g[k], s, psi, t) for k in range(m + 1, q))
        out += 0.5 * tau_term(grp.g[m], s, psi, t)
        out += sign * 0.5 * tau_term(grp.Q @ grp.g[m], s, psi, t)
        out += sign * sum(
            tau_term(grp.Q @ grp.g[k], s, psi, t) for k in range(m + 1, q)
        )
        return out
    if which in ("mod3", "mod4"):
        if q % 2 == 0:
            raise DomainError(f"{which} applies to odd q only")
        sign = 1.0 if which == "mod3" else -1.0
        out = sum(tau_term(grp.g[k], s, psi, t) for k in range(m, q))
        out += sign * sum(tau_term(grp.Q @ grp.g[k], s, psi, t) for k in range(m, q))
        return out
    raise DomainError(f"unknown equation {which!r}; expected one of {EQUATIONS}")


@dataclass
class PeriodSamples:
    """Sampled candidate period function with a callable evaluator."""

    q: int
    s: complex
    points: np.ndarray
    values: np.ndarray
    evaluator: Callable
    parity: str = "none"  # none | even | odd

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if np.any(pts <= 1e-9):
            raise DomainError("sample points must stay inside (0, inf)")
        self.points = pts


def slow_residual(ps: PeriodSamples, which: str = "funceq") -> float:
    """max over samples of |psi(t) - RHS(t)| for the chosen equation."""
    worst = 0.0
    for t, v in zip(ps.points, ps.values):
        rhs = slow_rhs(ps.q, ps.s, ps.evaluator, float(t), which)
        worst = max(worst, abs(v - rhs))
    return worst


def parity_split(q: int, s: complex, psi: Callable) -> tuple[Callable, Callable]:
    """psi = psi_plus + psi_minus with psi_pm = (psi +- tau_s(Q) psi)/2."""

    def plus(t):
        return 0.5 * (psi(t) + reflection_term(q, s, psi, t))

    def minus(t):
        return 0.5 * (psi(t) - reflection_term(q, s, psi, t))

    return plus, minus


def odd_extension(q: int, s: complex, psi: Callable) -> Callable:
    """phi = psi on R^+ and -tau_s(S) psi on R^-; satisfies the same equation."""
    s = complex(s)

    def phi(t):
        if t > 0:
            return psi(t)
        if t < 0:
            base = 1.0 / (t * t)
            return -np.exp(s * np.log(base)) * psi(-1.0 / t)
        raise DomainError("odd extension undefined at 0")

    return phi


# ---------------------------------------------------------------------------
# Fast-operator eigenfunctions
# ---------------------------------------------------------------------------


@dataclass
class FastEigenfunction:
    """Null vector of I - A(s) reshaped into per-disk Taylor coefficients."""

    q: int
    s: complex
    symmetry: str
    disk_names: list[str]
    centers: list[complex]
    radii: list[float]
    coefficients: list[np.ndarray]
    residual: float
    sv_ratio: float
    operator_order: int

    def component(self, name: str) -> np.ndarray:
        return self.coefficients[self.disk_names.index(name)]

    def eval_component(self, name: str, z) -> complex | np.ndarray:
        i = self.disk_names.index(name)
        c = self.coefficients[i]
        zc = np.asarray(z, dtype=complex) - self.centers[i]
        out = np.zeros_like(zc)
        for ck in c[::-1]:
            out = out * zc + ck
        return out if out.ndim else complex(out)

    def _locate(self, z: complex) -> tuple[str, complex, float]:
        """Component owning z as a point of the fast-map domain E_st.

        The components are independent functions on overlapping disks, so
        selection goes by the interval partition of (-1, 1): Re z beyond
        the outer edge picks E_1 (represented as sign * f_{q-1}(-z) for the
        +- parts), the middle band picks E_r, the left band E_{q-1}.
        """
        grp = hecke_group(self.q)
        edge = (grp.lam - 1.0) / (grp.lam + 1.0)
        x = z.real
        if self.symmetry in ("plus", "minus"):
            sign = 1.0 if self.symmetry == "plus" else -1.0
            if x > edge:
                return "eq1", -z, sign
            if "er" in self.disk_names and abs(x) <= edge:
                return "er", z, 1.0
            return "eq1", z, 1.0
        # full-symmetry eigenfunctions store all components
        if x > edge:
            return "e1", z, 1.0
        if "er" in self.disk_names and abs(x) <= edge:
            return "er", z, 1.0
        return "eq1", z, 1.0

    def component_value(
        self, name: str, z: complex, refine_above: float = 0.3, depth: int = 4
    ) -> complex:
        """Component series at z; at relative radius above ``refine_above``
        the value is computed through the eigen-relation row (up to
        ``depth`` nested applications), whose branch preimages sit strictly
        deeper inside the disks, so truncation error contracts per level.
        """
        i = self.disk_names.index(name)
        rel = abs(z - self.centers[i]) / self.radii[i]
        if rel >= 1.2:
            raise DomainError(f"point {z} outside the {name} disk")
        if rel > refine_above and depth > 0 and self.symmetry in ("plus", "minus"):
            return complex(
                _pm_rhs_value(self, name, z, refine_above=refine_above, depth=depth - 1)
            )
        return complex(self.eval_component(name, z))

    def __call__(self, z: complex, refine_above: float = 0.3, depth: int = 4) -> complex:
        """Value of the glued eigenfunction on (a neighborhood of) E_st."""
        name, zz, sign = self._locate(complex(z))
        return sign * self.component_value(name, zz, refine_above, depth)

    def decay_fit(self) -> tuple[float, float]:
        """Fit |c_k| <= C rho^k on the coefficient tail; returns (C, rho).

        The fit uses the upper two thirds of the index range (the leading
        coefficients have not yet reached the asymptotic regime).
        """
        mags = np.max(np.abs(np.stack(self.coefficients)), axis=0)
        mask = mags > 1e-14 * np.max(mags)
        mask[: max(2, len(mags) // 3)] = False
        ks = np.arange(len(mags))[mask]
        slope, intercept = np.polyfit(ks, np.log(mags[mask]), 1)
        return float(np.exp(intercept)), float(np.exp(slope))


def extract_eigenfunction(
    q: int,
    zero: complex,
    symmetry: str,
    order: int,
    check_determination: bool = True,
) -> FastEigenfunction:
    """Extract the eigenfunction at a validated determinant zero.

    Takes the right singular vector of I - A(zero) with smallest singular
    value; warns when that value is not isolated (ratio to the next < 10).
    The leading nonvanishing Taylor coefficient of the E_{q-1} component is
    normalized to 1.  For q > 3 the reconstruction identity
    f_r = sum_{n>=0} tau_s(h_{q-1}^n) f_{q-1} is verified on the overlap
    E_{q-1} and E_r (to 1e-6).
    """
    a = assemble(q, complex(zero), order, mode="hurwitz", symmetry=symmetry)
    mat = np.eye(a.size) - a.matrix
    _, svals, vh = np.linalg.svd(mat)
    if svals[-1] > 1e-4:
        warnings.warn(
            f"smallest singular value {svals[-1]:.2e} is large; "
            "is s really a determinant zero?"
        )
    ratio = svals[-2] / max(svals[-1], 1e-300)
    if ratio < 10.0:
        warnings.warn(f"singular value not isolated (ratio {ratio:.2f}); "
                      "possible multiplicity")
    vec = np.conj(vh[-1])
    m1 = order + 1
    comps = [vec[i * m1 : (i + 1) * m1] for i in range(len(a.disk_names))]
    # normalize by the first nonvanishing coefficient of the E_{q-1} block
    ref = comps[a.disk_names.index("eq1")]
    scale = None
    for ck in ref:
        if abs(ck) > 1e-10 * np.max(np.abs(ref)):
            scale = ck
            break
    if scale is None:
        raise DomainError("E_{q-1} component vanishes; cannot normalize")
    comps = [c / scale for c in comps]
    residual = float(
        np.linalg.norm(mat @ (vec / scale)) / np.linalg.norm(vec / scale)
    )
    fe = FastEigenfunction(
        q=q,
        s=complex(zero),
        symmetry=symmetry,
        disk_names=list(a.disk_names),
        centers=[d.center for d in a.disks],
        radii=[d.radius for d in a.disks],
        coefficients=comps,
        residual=residual,
        sv_ratio=float(ratio),
        operator_order=order,
    )
    if check_determination and q > 3 and "er" in a.disk_names:
        err = determination_residual(fe)
        if err > 1e-6:
            warnings.warn(f"f_r determination residual {err:.2e} exceeds 1e-6")
    return fe


def determination_residual(fe: FastEigenfunction, n_pts: int = 25) -> float:
    """|f_r - sum_{n>=0} tau_s(h_{q-1}^n) f_{q-1}| on the disk overlap.

    Sampled at the overlap points best conditioned for both Taylor series
    (smallest maximum relative radius), where the comparison is limited by
    coefficient accuracy rather than series truncation.
    """
    i_r = fe.disk_names.index("er")
    i_q = fe.disk_names.index("eq1")
    lo = max(fe.centers[i_r].real - fe.radii[i_r], fe.centers[i_q].real - fe.radii[i_q])
    hi = min(fe.centers[i_r].real + fe.radii[i_r], fe.centers[i_q].real + fe.radii[i_q])
    if lo >= hi:
        raise DomainError("disks do not overlap")
    grid = np.linspace(lo, hi, 400)
    score = np.maximum(
        np.abs(grid - fe.centers[i_r].real) / fe.radii[i_r],
        np.abs(grid - fe.centers[i_q].real) / fe.radii[i_q],
    )
    pts = np.sort(grid[np.argsort(score)[:n_pts]]) + 0.0j
    direct = fe.eval_component("er", pts)
    order = len(fe.coefficients[i_q]) - 1
    v = parabolic_values_hurwitz(fe.q, fe.s, pts, "right", fe.centers[i_q], order)
    series = v @ fe.coefficients[i_q] + fe.eval_component("eq1", pts)
    return float(np.max(np.abs(direct - series)))


def _pm_rhs_value(
    fe: FastEigenfunction, name: str, z: complex,
    refine_above: float = 2.0, depth: int = 0,
) -> complex:
    """(L^{+-}_{H,s} f)(z) for the row of disk ``name``.

    The n = 1 parabolic terms and the middle branches are evaluated
    pointwise (recursively refined when ``depth`` > 0, since the preimages
    sit strictly deeper in the disks); the n >= 2 parabolic tails use the
    Hurwitz closed form on the Taylor coefficients.
    """
    q, s = fe.q, fe.s
    sign = 1.0 if fe.symmetry == "plus" else -1.0
    grp = hecke_group(q)
    zq1 = fe.centers[fe.disk_names.index("eq1")]
    cq1 = fe.coefficients[fe.disk_names.index("eq1")]
    order = len(cq1) - 1
    zarr = np.array([z], dtype=complex)

    def comp(nm: str, w: complex) -> complex:
        return fe.component_value(nm, w, refine_above=refine_above, depth=depth)

    # The first few parabolic terms are evaluated pointwise (their preimages
    # fall deep inside the disks and are refined recursively); the remaining
    # tail uses the closed form on the raw coefficients, sampled only in the
    # well-converged region near the parabolic limit points.
    n_point = 4
    left_j = 0.0 + 0.0j
    for n in range(1, n_point):
        hinv = grp.h[1].power(n).inv()
        left_j += j_weight(hinv, s, z) * comp("eq1", -hinv.apply(z))
    left_j += complex(
        (parabolic_values_hurwitz(q, s, zarr, "left", zq1, order, twisted=True,
                                  n_start=n_point) @ cq1)[0]
    )
    rhs = sign * left_j
    if name == "er":
        right = 0.0 + 0.0j
        for n in range(1, n_point):
            hinv = grp.h[q - 1].power(n).inv()
            right += j_weight(hinv, s, z) * comp("eq1", hinv.apply(z))
        right += complex(
            (parabolic_values_hurwitz(q, s, zarr, "right", zq1, order,
                                      n_start=n_point) @ cq1)[0]
        )
        rhs += right
    if "er" in fe.disk_names:
        mhalf = (q + 1) // 2
        if q % 2 == 0:
            plain = [(1.0, list(range(mhalf + 1, q - 1))), (0.5, [mhalf])]
            twist = [(1.0, list(range(2, mhalf))), (0.5, [mhalf])]
        else:
            plain = [(1.0, list(range(mhalf, q - 1)))]
            twist = [(1.0, list(range(2, mhalf)))]
        for wgt, ks in plain:
            for k in ks:
                hkinv = grp.h[k].inv()
                rhs += wgt * j_weight(hkinv, s, z) * comp("er", hkinv.apply(z))
        for wgt, ks in twist:
            for k in ks:
                hkinv = grp.h[k].inv()
                rhs += sign * wgt * j_weight(hkinv, s, z) * comp("er", -hkinv.apply(z))
    return rhs


def fast_equation_residual(fe: FastEigenfunction, zpts: np.ndarray) -> float:
    """Residual of f = L^{+-}_{H,s} f with the left side from the raw series.

    Meaningful at points whose canonical representative sits well inside a
    disk (the series truncation dominates elsewhere).
    """
    if fe.symmetry == "full":
        raise DomainError("pointwise residual implemented for the +- parts")
    worst = 0.0
    for z0 in np.atleast_1d(zpts):
        name, z, _ = fe._locate(complex(z0))
        lhs = fe.eval_component(name, complex(z))
        worst = max(worst, abs(lhs - _pm_rhs_value(fe, name, complex(z))))
    return worst


def transport_to_slow(fe: FastEigenfunction, t: float) -> complex:
    """psi(t) = j_s(Tconj, t) f(Tconj.t); requires Tconj.t inside a disk."""
    if t <= 0:
        raise DomainError("transport is defined on t > 0")
    z = (t - 1.0) / (t + 1.0)
    base = 2.0 / ((t + 1.0) * (t + 1.0))
    jfac = np.exp(complex(fe.s) * np.log(base))
    return complex(jfac * fe(complex(z)))


def transport_consistency(fe: FastEigenfunction, ts: np.ndarray) -> float:
    """Pulled-back fast eigen-relation residual at slow points.

    The conjugation intertwines the fast operators exactly, so this must
    vanish up to series truncation; the downstream
    slow functional-equation residual of the transported values is the
    experimental probe of the eigenfunction conjecture and is reported
    separately, never asserted.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    zs = (ts - 1.0) / (ts + 1.0)
    jfacs = np.exp(complex(fe.s) * np.log(2.0 / (ts + 1.0) ** 2))
    worst = 0.0
    for t, z, j in zip(ts, zs, jfacs):
        res = fast_equation_residual(fe, np.array([z + 0.0j]))
        worst = max(worst, abs(j) * res)
    return worst


def slow_equation_experiment(
    fe: FastEigenfunction, ts: np.ndarray, which: str = "funceq"
) -> dict:
    """Report (never assert) the slow-equation residuals of transported values."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    psi = lambda t: transport_to_slow(fe, t)
    vals = np.array([psi(float(t)) for t in ts])
    ps = PeriodSamples(q=fe.q, s=fe.s, points=ts, values=vals, evaluator=psi)
    res = slow_residual(ps, which)
    return {
        "q": fe.q,
        "s": [fe.s.real, fe.s.imag],
        "symmetry": fe.symmetry,
        "equation": which,
        "n_points": int(len(ts)),
        "max_residual": res,
        "max_value": float(np.max(np.abs(vals))),
    }


# ---------------------------------------------------------------------------
# Extension from the fundamental interval
# ---------------------------------------------------------------------------


class ExtendedPeriodFunction:
    """psi on [1, 1 + (n_steps+1) lam] from its values on [1, 1 + lam].

    Applies the functional-equation recursion (odd q, even-parity equation)

        psi(x) = psi(x - lam) - j_s(g_1^{-1} Q, x-lam) psi(1/(x-lam) + lam)
                 - sum_{k=2}^{m-1} [tau_s(Q g_k) + tau_s(g_k)] psi(x - lam)

    interval by interval; every evaluation argument is asserted to lie in
    the already-known region.
    """

    def __init__(self, q: int, s: complex, psi0: Callable, n_steps: int):
        if q % 2 == 0:
            raise DomainError("extension recursion implemented for odd q (mod3)")
        if n_steps < 0:
            raise DomainError("n_steps must be >= 0")
        self.q = q
        self.s = complex(s)
        self.psi0 = psi0
        self.n_steps = n_steps
        grp = hecke_group(q)
        self.lam = grp.lam
        m = (q + 1) // 2
        self._taus = []
        for k in range(2, m):
            self._taus.append(grp.g[k])
            self._taus.append(grp.Q @ grp.g[k])
        self.domain = (1.0, 1.0 + (n_steps + 1) * self.lam)

    def __call__(self, x: float) -> complex:
        lo, hi = self.domain
        if not (lo - 1e-12 <= x <= hi + 1e-12):
            raise DomainError(f"{x} outside extension domain {self.domain}")
        return self._eval(float(np.clip(x, lo, hi)))

    def _base(self, x: float) -> complex:
        # All side-term arguments must land in the fundamental interval
        # (the recursion's containment guarantee); fail loudly otherwise.
        if not (1.0 - 1e-12 <= x <= 1.0 + self.lam + 1e-9):
            raise ContainmentError(f"argument {x} outside [1, 1+lam]")
        return self.psi0(float(np.clip(x, 1.0, 1.0 + self.lam)))

    def _eval(self, x: float) -> complex:
        lam, s = self.lam, self.s
        if x <= 1.0 + lam + 1e-12:
            return self._base(x)
        y = x - lam
        out = self._eval(y)
        out -= np.exp(-2.0 * s * np.log(y)) * self._base(1.0 / y + lam)
        for g in self._taus:
            ginv = g.inv()
            out -= j_weight(ginv, s, y) * self._base(ginv.apply(y))
        return out


def extend_from_fundamental(
    q: int, s: complex, psi0: Callable, n_steps: int
) -> ExtendedPeriodFunction:
    """Extend psi from [1, 1+lam] to [1, 1+(n_steps+1) lam]; see the class."""
    return ExtendedPeriodFunction(q, s, psi0, n_steps)


# ---------------------------------------------------------------------------
# Asymptotic-coefficient fits and serialization
# ---------------------------------------------------------------------------


def asymptotics_report(psi: Callable, s: complex, t_small: float = 1e-3,
                       t_large: float = 1e3, n: int = 24) -> dict:
    """Least-squares fit of the leading expansion coefficients of psi.

    Fits psi(t) ~ C0 + C1 t on log-spaced small t and
    t^{2s} psi(t) ~ D0 + D1/t on log-spaced large t; the full asymptotic
    chains are not verifiable from samples, so only these leading pairs are
    reported (together with the sign-relation deviations |C_m - (-1)^{m+1} D_m|).
    """
    s = complex(s)
    ts = np.geomspace(t_small, 10 * t_small, n)
    vals = np.array([psi(float(t)) for t in ts])
    # quadratic fit so the reported leading pair is unbiased by curvature
    basis = np.vstack([np.ones_like(ts), ts, ts * ts]).T
    c_fit, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    tl = np.geomspace(t_large / 10, t_large, n)
    vl = np.array([psi(float(t)) for t in tl]) * np.exp(2.0 * s * np.log(tl))
    basis_l = np.vstack([np.ones_like(tl), 1.0 / tl, 1.0 / tl**2]).T
    d_fit, *_ = np.linalg.lstsq(basis_l, vl, rcond=None)
    return {
        "C": [complex(c_fit[0]), complex(c_fit[1])],
        "D": [complex(d_fit[0]), complex(d_fit[1])],
        "sign_relation_deviation": [
            abs(c_fit[0] + d_fit[0]),  # C0 = -D0
            abs(c_fit[1] - d_fit[1]),  # C1 = +D1
        ],
    }


def eigenfunction_to_json(fe: FastEigenfunction) -> dict:
    return {
        "q": fe.q,
        "s": [fe.s.real, fe.s.imag],
        "symmetry": fe.symmetry,
        "order": fe.operator_order,
        "residual": fe.residual,
        "sv_ratio": fe.sv_ratio,
        "disks": [
            {
                "name": name,
                "center": [c.real, c.imag],
                "radius": r,
                "coeffs": [[z.real, z.imag] for z in coef],
            }
            for name, c, r, coef in zip(
                fe.disk_names, fe.centers, fe.radii, fe.coefficients
            )
        ],
    }


def eigenfunction_from_json(data: dict) -> FastEigenfunction:
    names = [d["name"] for d in data["disks"]]
    centers = [complex(*d["center"]) for d in data["disks"]]
    radii = [float(d["radius"]) for d in data["disks"]]
    coeffs = [
        np.array([complex(re, im) for re, im in d["coeffs"]]) for d in data["disks"]
    ]
    return FastEigenfunction(
        q=int(data["q"]),
        s=complex(*data["s"]),
        symmetry=data["symmetry"],
        disk_names=names,
        centers=centers,
        radii=radii,
        coefficients=coeffs,
        residual=float(data["residual"]),
        sv_ratio=float(data["sv_ratio"]),
        operator_order=int(data["order"]),
    )
