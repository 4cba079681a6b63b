"""Scenario drivers producing :class:`ExperimentReport` tables.

Every scenario returns rows of ``(parameters, measured, target, residual,
error_estimate)`` plus named verdicts that are pure functions of the rows.
Rows are computed over a parameter grid (optionally on a thread pool) and
kept in grid order, so reruns are bit-identical.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import findim
from .deformation import ProfileKind, alpha_integral, make_profile
from .operator1d import Grid, assemble_witten_pair
from .spectral import eigenvalues, flat_logdet, richardson
from .torsion_zeta import (
    analytic_torsion_1d,
    coupled_operator,
    coupled_strength,
    harmonic_torsion_oracle,
    heat_trace,
    kernel_diagonal,
    zeta_tilde_prime0,
)

__all__ = [
    "Row",
    "ExperimentReport",
    "YModel",
    "run_eigencon",
    "run_supertrace",
    "run_circle_metric",
    "run_interval_metric",
    "run_gluing",
    "run_coupled_trace",
    "run_product",
    "SCENARIOS",
]

LOG2 = math.log(2.0)
CIRCLE_LENGTH = 8.0


@dataclass
class Row:
    check: str
    params: dict
    measured: float
    target: float
    error: float = 0.0
    tolerance: float | None = None
    passed: bool | None = None

    @property
    def residual(self) -> float:
        return self.measured - self.target

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "params": self.params,
            "measured": self.measured,
            "target": self.target,
            "residual": self.residual,
            "error_estimate": self.error,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


@dataclass
class ExperimentReport:
    scenario: str
    rows: list[Row]
    verdicts: dict[str, bool]
    notes: list[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def failing_rows(self) -> list[Row]:
        return [r for r in self.rows if r.passed is False]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "config": self.config,
            "verdicts": self.verdicts,
            "passed": self.passed,
            "notes": self.notes,
            "rows": [r.to_dict() for r in self.rows],
        }


def _pmap(fn: Callable, items: Sequence, threads: int = 1) -> list:
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _within(row: Row, tol: float) -> Row:
    row.tolerance = tol
    row.passed = bool(abs(row.residual) <= tol)
    return row


# ---------------------------------------------------------------------------
# eigenvalue convergence on the glued circle


def split_spectrum(k_max: int, plateau: float = 2.0) -> np.ndarray:
    """Lowest ``k_max`` eigenvalues of Neumann plus Dirichlet on two plateaus."""
    j = np.arange(0, k_max + 1)
    lam = np.concatenate([(j * math.pi / plateau) ** 2, (j[1:] * math.pi / plateau) ** 2])
    return np.sort(lam)[:k_max]


def _circle_function_op(T: float, n: int):
    prof = make_profile(T, ProfileKind.CIRCLE_PERIODIC)
    f_op, _ = assemble_witten_pair(prof, Grid(-2.0, 6.0, n, periodic=True))
    return prof, f_op


def _bracket(prof, n: int, k: int):
    """Dirichlet and Neumann cuts at the plateau midpoints ``s = -2, 2``."""
    out = {}
    for tag, cond in (("D", "rel"), ("N", "abs")):
        lam = []
        for a, b in ((-2.0, 2.0), (2.0, 6.0)):
            f_op, _ = assemble_witten_pair(prof, Grid(a, b, n // 2), cond, cond)
            lam.append(eigenvalues(f_op, k).eigenvalues)
        out[tag] = np.sort(np.concatenate(lam))[:k]
    return out["D"], out["N"]


def run_eigencon(
    T_list: Sequence[float] = (4, 8, 16, 32),
    k_max: int = 10,
    levels: Sequence[int] = (1000, 2000, 4000),
    threads: int = 1,
) -> ExperimentReport:
    """Glued Witten spectrum on ``S^1(8)`` against the split plateau spectrum."""
    if len(levels) != 3:
        raise ValueError("Richardson needs three grid levels")
    target = split_spectrum(k_max)
    delta = 0.5 * float(target[target > 1e-12][0])

    def one(T):
        vals = []
        for n in levels:
            _, op = _circle_function_op(T, n)
            vals.append(eigenvalues(op, k_max).eigenvalues)
        vals = np.array(vals)
        rich = [richardson(vals[:, k]) for k in range(k_max)]
        prof, op = _circle_function_op(T, levels[-1])
        lam_D, lam_N = _bracket(prof, levels[-1], k_max)
        fine = vals[-1]
        slack = 1e-8 * (1.0 + np.abs(fine))
        bracket_ok = bool(np.all(lam_N <= fine + slack) and np.all(fine <= lam_D + slack))
        return T, rich, bracket_ok

    results = _pmap(one, T_list, threads)
    rows, max_err, brackets = [], [], []
    for T, rich, ok in results:
        errs = []
        for k, r in enumerate(rich):
            row = Row("eigenvalue", {"T": T, "k": k + 1}, r.value, float(target[k]), r.error)
            rows.append(row)
            errs.append(abs(row.residual))
        max_err.append(max(errs))
        rows.append(Row("max_error", {"T": T}, max(errs), 0.0, max(r.error for r in rich)))
        brackets.append(ok)
        rows.append(Row("bracketing", {"T": T}, float(ok), 1.0, passed=ok))
    max_err = np.array(max_err)
    Ts = np.array(T_list, dtype=float)
    slope = float(np.polyfit(np.log(Ts), np.log(max_err), 1)[0]) if len(Ts) > 1 else float("nan")
    bound = 0.05 * (1.0 + float(target[-1]))
    last = rows[[i for i, r in enumerate(rows) if r.check == "max_error"][-1]]
    last.tolerance = bound
    last.passed = bool(last.measured <= bound)
    rows.append(Row("decay_exponent", {}, slope, -0.5, tolerance=None, passed=bool(slope <= -0.4)))
    verdicts = {
        "monotone": bool(np.all(np.diff(max_err) < 0)),
        "bound_at_largest_T": last.passed,
        "decay_exponent": bool(slope <= -0.4),
        "bracketing": all(brackets),
    }
    notes = [f"delta = {delta:.12g} (half the first nonzero split eigenvalue)"]
    return ExperimentReport("eigencon", rows, verdicts, notes)


# ---------------------------------------------------------------------------
# supertrace identity


def run_supertrace(
    T_list: Sequence[float] = (0, 4, 16),
    t_list: Sequence[float] = (0.1, 1.0, 10.0),
    n: int = 2000,
    n_discrete: int = 200,
    threads: int = 1,
) -> ExperimentReport:
    """``Tr e^{-t Delta_0} - Tr e^{-t Delta_1}`` on both engines."""
    rows = []

    def discrete(T):
        prof = make_profile(T, ProfileKind.CIRCLE_PERIODIC)
        cx = findim.discrete_witten("cycle", prof, n_discrete, interval=(-2.0, 6.0))
        out = [Row("discrete_cycle", {"T": T, "t": t}, cx.supertrace(t), 0.0) for t in t_list]
        return [_within(r, 1e-10) for r in out]

    def fd(T):
        prof = make_profile(T, ProfileKind.INTERVAL_ODD)
        grid = Grid(-2.0, 2.0, n)
        f_op, w_op = assemble_witten_pair(prof, grid, "abs", "rel")
        tol = 5.0 * grid.h**2 * (1.0 + T)
        out = []
        for t in t_list:
            st = heat_trace(f_op, t) - heat_trace(w_op, t)
            out.append(_within(Row("fd_interval", {"T": T, "t": t, "n": n}, st, 0.0), tol))
        return out

    for chunk in _pmap(discrete, T_list, threads):
        rows.extend(chunk)
    path = findim.discrete_witten("path", None, 64, interval=(0.0, 1.0))
    for t in t_list:
        rows.append(_within(Row("discrete_path_euler", {"T": 0.0, "t": t}, path.supertrace(t), 1.0), 1e-10))
    for chunk in _pmap(fd, T_list, threads):
        rows.extend(chunk)
    verdicts = {
        "discrete": all(r.passed for r in rows if r.check.startswith("discrete")),
        "finite_difference": all(r.passed for r in rows if r.check == "fd_interval"),
    }
    return ExperimentReport("supertrace", rows, verdicts)


# ---------------------------------------------------------------------------
# Ray-Singer metric drift on the circle and on the interval


def run_circle_metric(T_list: Sequence[float] = (0, 6), alpha_T: float = 8.0, tol: float = 0.05) -> ExperimentReport:
    """Deformed circle torsion against ``-log 2 - T`` and the ``alpha`` asymptotics."""
    rows = []
    for T in T_list:
        prof = make_profile(T, ProfileKind.CIRCLE_PERIODIC)
        tv = analytic_torsion_1d("circle", profile=prof)
        exact = harmonic_torsion_oracle(prof)
        err = abs(tv.log_torsion - exact)
        if T == 0:
            rows.append(_within(Row("log_torsion", {"T": T}, tv.log_torsion, -3.0 * LOG2, err), 1e-5))
        else:
            rows.append(_within(Row("log_torsion", {"T": T}, tv.log_torsion, -LOG2 - T, err), tol))
        rows.append(_within(Row("closed_form_agreement", {"T": T}, tv.log_torsion, exact), 1e-6))
    prof = make_profile(alpha_T, ProfileKind.CIRCLE_PERIODIC)
    ratio = alpha_integral(prof) / (2.0 * math.exp(alpha_T))
    rows.append(_within(Row("alpha_ratio", {"T": alpha_T}, ratio, 1.0), 0.02))
    verdicts = {
        "flat_value": all(r.passed for r in rows if r.check == "log_torsion" and r.params["T"] == 0),
        "drift": all(r.passed for r in rows if r.check == "log_torsion" and r.params["T"] != 0),
        "closed_form": all(r.passed for r in rows if r.check == "closed_form_agreement"),
        "alpha": rows[-1].passed,
    }
    return ExperimentReport("circle-metric", rows, verdicts)


def interval_torsion(T: float, i: int) -> tuple[float, float]:
    """``(log T_i(T), closed form)`` on ``[-2, 2]``: i=1 absolute with ``d - dq``, i=2 relative with ``d + dq``."""
    prof = make_profile(T, ProfileKind.INTERVAL_EVEN)
    cond, twist = ("abs", -1.0) if i == 1 else ("rel", 1.0)
    tv = analytic_torsion_1d("interval", conditions=(cond, cond), profile=prof, twist=twist)
    return tv.log_torsion, harmonic_torsion_oracle(prof, cond, twist)


def run_interval_metric(T_list: Sequence[float] = (0, 6), tol: float = 0.05) -> ExperimentReport:
    rows = []
    for T in T_list:
        vals = {}
        for i in (1, 2):
            val, exact = interval_torsion(T, i)
            vals[i] = val
            target = -1.5 * LOG2 if T == 0 else -LOG2 - T / 2.0
            rows.append(_within(Row("log_torsion", {"T": T, "i": i}, val, target, abs(val - exact)), 1e-5 if T == 0 else tol))
            rows.append(_within(Row("closed_form_agreement", {"T": T, "i": i}, val, exact), 1e-6))
        rows.append(_within(Row("symmetry", {"T": T}, vals[1], vals[2]), 1e-6))
    verdicts = {
        "flat_value": all(r.passed for r in rows if r.check == "log_torsion" and r.params["T"] == 0),
        "drift": all(r.passed for r in rows if r.check == "log_torsion" and r.params["T"] != 0),
        "closed_form": all(r.passed for r in rows if r.check == "closed_form_agreement"),
        "symmetry": all(r.passed for r in rows if r.check == "symmetry"),
    }
    return ExperimentReport("interval-metric", rows, verdicts)


# ---------------------------------------------------------------------------
# gluing formula


def gluing_sides(L: float, L1: float, rank: int = 1, n_bruteforce: int = 64) -> tuple[float, float, float]:
    """``(LHS, RHS, analytic MV torsion)`` for the flat circle cut into ``L1 + L2``.

    ``M1`` carries absolute and ``M2`` relative conditions; torsions are
    ``-1/2 log det' Delta_1`` from the closed-form determinants.
    """
    L2 = L - L1
    t_circle = -0.5 * flat_logdet(L, "P").value
    t1 = -0.5 * flat_logdet(L1, "DD").value  # one-forms, absolute
    t2 = -0.5 * flat_logdet(L2, "NN").value  # one-forms, relative
    lhs = rank * (t_circle - t1 - t2)
    mv = findim.torsion(findim.mv_complex_bruteforce(L, L1, n_bruteforce, rank=rank))
    chi_y = 2
    rhs = mv + 0.5 * chi_y * rank * LOG2
    return lhs, rhs, findim.torsion(findim.mv_complex(L, L1, rank=rank))


def run_gluing(
    L: float = CIRCLE_LENGTH,
    cuts: Sequence[Sequence[float]] = ((4, 4), (3, 5)),
    ranks: Sequence[int] = (1, 2),
    n_bruteforce: int = 64,
    tol: float = 1e-3,
) -> ExperimentReport:
    rows = []
    for L1, L2 in cuts:
        if abs(L1 + L2 - L) > 1e-12:
            raise ValueError(f"cut {L1}+{L2} does not add up to {L}")
        for r in ranks:
            lhs, rhs, mv_exact = gluing_sides(L, L1, r, n_bruteforce)
            p = {"L1": L1, "L2": L2, "rank": r}
            rows.append(_within(Row("gluing", p, lhs, rhs), tol))
            mv_brute = rhs - r * LOG2
            rows.append(_within(Row("mv_bruteforce_vs_closed_form", p, mv_brute, mv_exact), 1e-10))
    verdicts = {
        "gluing": all(r.passed for r in rows if r.check == "gluing"),
        "mv_agreement": all(r.passed for r in rows if r.check != "gluing"),
    }
    return ExperimentReport("gluing", rows, verdicts)


# ---------------------------------------------------------------------------
# coupled trace, tube envelopes and zeta-tilde


def tube_integral(T: float, t: float, cap: float = 1e6) -> tuple[float, float, bool]:
    """``int_{-1}^{1} k_{T~,+}(t, s, s) ds`` with ``T~ = t^{-7} T``."""
    Tt, capped = coupled_strength(T, t, cap)
    op = coupled_operator(Tt, capped)
    s, k, _ = kernel_diagonal(op.oneforms, t)
    m = (s >= -1.0) & (s <= 1.0)
    return float(np.trapezoid(k[m], s[m])), Tt, capped


def plateau_supertrace(T: float, t: float, cap: float = 1e6) -> float:
    """``int_1^2 (k_{T~,-} - k_{T~,+})(t, s, s) ds``."""
    Tt, capped = coupled_strength(T, t, cap)
    op = coupled_operator(Tt, capped)
    s, k0, _ = kernel_diagonal(op.functions, t)
    _, k1, _ = kernel_diagonal(op.oneforms, t)
    m = s >= 1.0
    return float(np.trapezoid((k0 - k1)[m], s[m]))


def run_coupled_trace(
    T_list: Sequence[float] = (4, 16, 64),
    t_list: Sequence[float] = (0.2, 0.4, 0.6, 0.8, 1.0),
    plateau_T: float = 16.0,
    plateau_t: float = 1.0,
    zeta_T: float | None = 4.0,
    zeta_n_t: int = 40,
    cap: float = 1e6,
    threads: int = 1,
) -> ExperimentReport:
    grid = [(T, t) for T in T_list for t in t_list]
    tubes = _pmap(lambda p: tube_integral(p[0], p[1], cap), grid, threads)
    ratios = {}
    rows = []
    for (T, t), (val, Tt, capped) in zip(grid, tubes):
        ratios[(T, t)] = (val * math.sqrt(Tt) / t, val, Tt, capped)
    C = max(r[0] for r in ratios.values())
    per_T = {T: max(ratios[(T, t)][0] for t in t_list) for T in T_list}
    for (T, t), (ratio, val, Tt, capped) in ratios.items():
        rows.append(Row("tube_envelope", {"T": T, "t": t, "T_eff": Tt, "capped": capped, "integral": val}, ratio, C, passed=True))
    uniform = max(per_T.values()) <= 2.0 * min(per_T.values())
    rows.append(Row("envelope_constant", {}, C, C, tolerance=None, passed=uniform))

    plat = plateau_supertrace(plateau_T, plateau_t, cap)
    rows.append(_within(Row("plateau_supertrace", {"T": plateau_T, "t": plateau_t}, plat, -1.0), 0.02))
    verdicts = {"tube_envelope": uniform, "plateau_supertrace": rows[-1].passed}
    notes = []
    if zeta_T is not None:
        zt = zeta_tilde_prime0(zeta_T, n_t=zeta_n_t, cap=cap)
        row = Row(
            "zeta_tilde",
            {"T": zeta_T, "cap_fraction": zt.cap_fraction, "flagged": zt.flagged},
            zt.value,
            LOG2 - zeta_T,
            zt.error,
        )
        rows.append(_within(row, 0.1))
        verdicts["zeta_tilde"] = row.passed
        notes.append("zeta_tilde parts: " + ", ".join(f"{k}={v:.6g}" for k, v in zt.parts.items()))
    notes.append("general-manifold statements with the anomaly term are not desk-verifiable; covered by 1D shadows")
    return ExperimentReport("coupled-trace", rows, verdicts, notes)


# ---------------------------------------------------------------------------
# product with a fiber Y


@dataclass
class YModel:
    """Fiber data: per-degree spectra (kernels as zeros), Euler characteristic and bundle rank."""

    eigenvalues_per_degree: list
    euler_characteristic: int
    rank: int = 1
    kernel_tol: float = 1e-12

    def __post_init__(self):
        self.eigenvalues_per_degree = [np.sort(np.asarray(e, dtype=float)) for e in self.eigenvalues_per_degree]
        kernels = [int(np.sum(np.abs(e) <= self.kernel_tol)) for e in self.eigenvalues_per_degree]
        chi = sum((-1) ** k * d for k, d in enumerate(kernels))
        if chi != self.euler_characteristic:
            raise ValueError(f"Euler characteristic {self.euler_characteristic} does not match kernel dimensions {kernels}")

    @property
    def kernel_dims(self) -> list[int]:
        return [int(np.sum(np.abs(e) <= self.kernel_tol)) for e in self.eigenvalues_per_degree]

    @classmethod
    def circle(cls, length: float = 2.0 * math.pi, k_max: int = 200, rank: int = 1) -> "YModel":
        k = np.arange(1, k_max + 1)
        lam = np.concatenate([[0.0], np.repeat((2.0 * math.pi * k / length) ** 2, 2)])
        return cls([lam, lam.copy()], 0, rank)

    @classmethod
    def points(cls, m: int = 2, rank: int = 1) -> "YModel":
        return cls([np.zeros(m)], m, rank)

    def traces(self, t: float) -> tuple[float, float]:
        """``(Tr_s e^{-t Delta_Y}, Tr_s N^Y e^{-t Delta_Y})`` times the rank."""
        st = sum((-1) ** k * np.exp(-t * e).sum() for k, e in enumerate(self.eigenvalues_per_degree))
        stn = sum((-1) ** k * k * np.exp(-t * e).sum() for k, e in enumerate(self.eigenvalues_per_degree))
        return self.rank * float(st), self.rank * float(stn)


def run_product(
    y: YModel | None = None,
    T: float = 8.0,
    t_list: Sequence[float] = (0.1, 0.5, 1.0, 5.0),
    n: int = 2000,
) -> ExperimentReport:
    """Product supertrace ``Tr_s(N e^{-t(Delta_R + Delta_Y)})`` on ``[-2,2] x Y``.

    The direct double sum over degrees ``(p, q)`` is compared with the
    collapsed form ``chi(Y) rank Tr_s(N^R e^{-t Delta_R})``, which uses
    ``Tr_s(e^{-t Delta_R}) = 0`` for the abs/rel pair.
    """
    y = y or YModel.points(2)
    prof = make_profile(T, ProfileKind.INTERVAL_ODD)
    grid = Grid(-2.0, 2.0, n)
    f_op, w_op = assemble_witten_pair(prof, grid, "abs", "rel")
    fd_tol = 5.0 * grid.h**2 * (1.0 + T)
    rows = []
    for t in t_list:
        r0, r1 = heat_trace(f_op, t), heat_trace(w_op, t)
        str_r, strn_r = r0 - r1, -r1
        sy, syn = y.traces(t)
        direct = strn_r * sy + str_r * syn
        collapsed = y.euler_characteristic * y.rank * strn_r
        tol = fd_tol * max(1.0, abs(syn)) + 1e-10 * max(1.0, abs(direct))
        rows.append(_within(Row("product_trace", {"t": t, "chi": y.euler_characteristic}, direct, collapsed), tol))
    # gap limit: only kernels survive once t * lambda_min >> 1
    lam0 = [float(eigenvalues(op, 1, method="lapack").eigenvalues[0]) for op in (f_op, w_op)]
    kernel_r = [int(l < 1e-12) for l in lam0]
    gaps = [l for l in lam0 if l >= 1e-12] + [float(e[e > y.kernel_tol][0]) for e in y.eigenvalues_per_degree if np.any(e > y.kernel_tol)]
    t_big = 50.0 / min(gaps)
    ky = y.kernel_dims
    index = y.rank * sum(
        (-1) ** (p + q) * (p + q) * kernel_r[p] * ky[q] for p in range(2) for q in range(len(ky))
    )
    r0, r1 = heat_trace(f_op, t_big), heat_trace(w_op, t_big)
    sy, syn = y.traces(t_big)
    direct = -r1 * sy + (r0 - r1) * syn
    rows.append(_within(Row("gap_limit", {"t": t_big, "chi": y.euler_characteristic}, direct, float(index)), 1e-6))
    verdicts = {"collapse": all(r.passed for r in rows if r.check == "product_trace"), "gap_limit": rows[-1].passed}
    notes = []
    if y.euler_characteristic == 0:
        notes.append("chi(Y) = 0: deformation contribution vanishes identically")
    return ExperimentReport("product", rows, verdicts, notes)


SCENARIOS: dict[str, Callable[..., ExperimentReport]] = {
    "eigencon": run_eigencon,
    "supertrace": run_supertrace,
    "circle-metric": run_circle_metric,
    "interval-metric": run_interval_metric,
    "gluing": run_gluing,
    "coupled-trace": run_coupled_trace,
    "product": run_product,
}
