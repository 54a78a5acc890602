"""Convergence tables and figure data for the three model problems.

Target errors and EOCs are stored alongside each parameter set so that runs can be
compared against them. Table runs measure the max-norm error at the final
time against either a Laplace-inversion reference (relaxation) or a
Grünwald–Letnikov run with ``h = 2**-10`` (nonlinear and Brusselator).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .analysis import (
    RelaxationSpec,
    find_singularities,
    kernel_ratio_study,
    reference_relaxation,
    relaxation_difference_study,
    scan_singularities,
)
from .mittag_leffler import relaxation_co
from .solver import VofdeProblem, eoc, preset_problem, solve_co_gl, solve_gl
from .transition import ExponentialTransition

__all__ = [
    "TableSet",
    "TableResult",
    "TABLES",
    "run_table",
    "FIGURES",
    "figure_data",
]


@dataclass(frozen=True)
class TableSet:
    """One column pair of a convergence table."""

    label: str
    alpha1: float
    alpha2: float
    c: float
    preset: str
    params: dict
    y0: tuple
    target_errors: tuple = ()
    target_eocs: tuple = ()

    @property
    def transition(self) -> ExponentialTransition:
        return ExponentialTransition(self.alpha1, self.alpha2, self.c)

    def problem(self, T: float) -> VofdeProblem:
        return preset_problem(self.preset, self.transition, self.y0, T, **self.params)


@dataclass(frozen=True)
class TableSpec:
    name: str
    T: float
    exponents: tuple
    reference: str  # "laplace" or "gl"
    reference_exponent: Optional[int]
    sets: tuple
    notes: str = ""

    @property
    def steps(self) -> list[float]:
        return [2.0**-k for k in self.exponents]


TABLES = {
    "table1": TableSpec(
        "table1",
        T=4.0,
        exponents=(2, 3, 4, 5, 6, 7),
        reference="laplace",
        reference_exponent=None,
        sets=(
            TableSet("a1=0.6 a2=0.8 c=2 lam=1", 0.6, 0.8, 2.0, "relaxation", {"lam": 1.0}, (1.0,),
                     (9.96e-3, 4.97e-3, 2.48e-3, 1.24e-3, 6.18e-4, 3.09e-4),
                     (1.004, 1.003, 1.002, 1.001, 1.000)),
            TableSet("a1=0.5 a2=0.9 c=1 lam=2", 0.5, 0.9, 1.0, "relaxation", {"lam": 2.0}, (1.0,),
                     (1.02e-2, 5.14e-3, 2.59e-3, 1.30e-3, 6.50e-4, 3.25e-4),
                     (0.981, 0.991, 0.995, 0.998, 0.999)),
            TableSet("a1=0.9 a2=0.6 c=1 lam=0.5", 0.9, 0.6, 1.0, "relaxation", {"lam": 0.5}, (1.0,),
                     (3.71e-3, 1.67e-3, 7.89e-4, 3.82e-4, 1.88e-4, 9.31e-5),
                     (1.146, 1.085, 1.046, 1.024, 1.012)),
        ),
        notes="y0 = 1; reference by contour inversion of y0 H(s)",
    ),
    "table2": TableSpec(
        "table2",
        T=2.0,
        exponents=(2, 3, 4, 5, 6, 7),
        reference="gl",
        reference_exponent=10,
        sets=(
            TableSet("a1=0.6 a2=0.8 c=2", 0.6, 0.8, 2.0, "nonlinear13y2", {}, (0.84,),
                     (3.06e-3, 1.54e-3, 7.66e-4, 3.78e-4, 1.83e-4, 8.56e-5),
                     (0.994, 1.005, 1.019, 1.044, 1.098)),
            TableSet("a1=0.5 a2=0.9 c=1", 0.5, 0.9, 1.0, "nonlinear13y2", {}, (0.84,),
                     (3.40e-3, 1.75e-3, 8.87e-4, 4.41e-4, 2.15e-4, 1.01e-4),
                     (0.955, 0.982, 1.006, 1.037, 1.094)),
            TableSet("a1=0.9 a2=0.6 c=1", 0.9, 0.6, 1.0, "nonlinear13y2", {}, (0.84,),
                     (2.74e-4, 2.36e-4, 1.36e-4, 7.04e-5, 3.48e-5, 1.64e-5),
                     (0.217, 0.794, 0.948, 1.018, 1.088)),
        ),
        notes="y0 = 0.84 (fitted to the target errors); reference h = 2^-10",
    ),
    "table3": TableSpec(
        "table3",
        T=16.0,
        exponents=(4, 5, 6, 7, 8),
        reference="gl",
        reference_exponent=10,
        sets=(
            TableSet("a1=0.6 a2=0.8 a=1 mu=4", 0.6, 0.8, 2.0, "brusselator", {"a": 1.0, "mu": 4.0}, (0.9, 2.1),
                     (4.65e-3, 4.51e-3, 2.96e-3, 1.32e-3, 5.55e-4),
                     (0.043, 0.609, 1.166, 1.249)),
            TableSet("a1=0.6 a2=0.8 a=1 mu=2", 0.6, 0.8, 2.0, "brusselator", {"a": 1.0, "mu": 2.0}, (0.5, 2.5),
                     (7.62e-4, 4.03e-4, 2.03e-4, 9.63e-5, 4.16e-5),
                     (0.918, 0.994, 1.073, 1.209)),
            TableSet("a1=0.8 a2=0.6 a=1 mu=4", 0.8, 0.6, 2.0, "brusselator", {"a": 1.0, "mu": 4.0}, (0.9, 2.1),
                     (5.74e-4, 2.84e-4, 1.37e-4, 6.41e-5, 2.75e-5),
                     (1.016, 1.046, 1.099, 1.222)),
            TableSet("a1=0.8 a2=0.6 a=1 mu=2", 0.8, 0.6, 2.0, "brusselator", {"a": 1.0, "mu": 2.0}, (0.5, 2.5),
                     (1.73e-5, 8.59e-6, 4.17e-6, 1.95e-6, 8.35e-7),
                     (1.013, 1.044, 1.098, 1.222)),
        ),
        notes=(
            "c = 2 and initial values taken from the phase-plane experiments "
            "((0.9, 2.1) for mu = 4, (0.5, 2.5) for mu = 2), both assumed. "
            "Reference h = 2^-10 by the same scheme (assumed)."
        ),
    ),
}


@dataclass
class TableResult:
    spec: TableSpec
    steps: list
    errors: dict  # label -> list of errors
    eocs: dict  # label -> list of EOCs (len = len(steps) - 1)
    references: dict  # label -> reference state at T
    seconds: float
    meta: dict = field(default_factory=dict)

    def rows(self):
        """Table layout: ``h, err_1, eoc_1, err_2, eoc_2, ...``."""
        labels = [s.label for s in self.spec.sets]
        for i, h in enumerate(self.steps):
            row = [h]
            for lab in labels:
                row.append(self.errors[lab][i])
                row.append(self.eocs[lab][i - 1] if i > 0 else math.nan)
            yield row

    def header(self):
        cols = ["h"]
        for k in range(len(self.spec.sets)):
            cols += [f"error_{k + 1}", f"eoc_{k + 1}"]
        return cols


def _reference(spec: TableSpec, tset: TableSet, opts, include_initial):
    prob = tset.problem(spec.T)
    if spec.reference == "laplace":
        rs = RelaxationSpec(tset.transition, tset.params["lam"], tset.y0[0])
        return np.atleast_1d(reference_relaxation(rs, spec.T))
    h_ref = 2.0 ** -spec.reference_exponent
    return solve_gl(prob, h_ref, opts, include_initial=include_initial).final


def run_table(
    name: str,
    sets: Optional[Sequence[int]] = None,
    exponents: Optional[Sequence[int]] = None,
    opts=None,
    include_initial: bool = False,
    progress: Optional[Callable[[str], None]] = None,
) -> TableResult:
    """Run the step-size ladder of a table and collect errors and EOCs."""
    try:
        spec = TABLES[name]
    except KeyError:
        raise ValueError(f"unknown table {name!r}; choose from {sorted(TABLES)}") from None
    if exponents is not None:
        spec = TableSpec(spec.name, spec.T, tuple(exponents), spec.reference, spec.reference_exponent, spec.sets, spec.notes)
    if sets is not None:
        spec = TableSpec(spec.name, spec.T, spec.exponents, spec.reference, spec.reference_exponent,
                         tuple(spec.sets[i] for i in sets), spec.notes)
    start = time.perf_counter()
    errors, eocs, refs = {}, {}, {}
    for tset in spec.sets:
        if progress:
            progress(f"{spec.name}: {tset.label}")
        ref = _reference(spec, tset, opts, include_initial)
        prob = tset.problem(spec.T)
        errs = []
        for h in spec.steps:
            y = solve_gl(prob, h, opts, include_initial=include_initial).final
            errs.append(float(np.abs(y - ref).max()))
        errors[tset.label] = errs
        eocs[tset.label] = [eoc(a, b) for a, b in zip(errs, errs[1:])]
        refs[tset.label] = ref
    meta = {"notes": spec.notes, "include_initial": include_initial, "norm": "max over components at T"}
    return TableResult(spec, spec.steps, errors, eocs, refs, time.perf_counter() - start, meta)


# ---------------------------------------------------------------- figures

FIG3_SETS = ((0.6, 0.8, 2.0), (0.5, 0.9, 1.0), (0.9, 0.6, 1.0), (0.8, 0.6, 2.0))


def _fig1(params):
    tr = ExponentialTransition(*params.get("transition", (0.6, 0.8, 2.0)))
    ts = np.geomspace(1e-3, 1.0, 61)
    tl = np.geomspace(1.0, 1e3, 61)
    kr = kernel_ratio_study(tr, ts, tl)
    return [
        ("psi_small", ["t", "psi_ratio_alpha1", "phi_ratio_alpha1"], np.column_stack([ts, kr.psi_small, kr.phi_small])),
        ("psi_large", ["t", "psi_ratio_alpha2", "phi_ratio_alpha2"], np.column_stack([tl, kr.psi_large, kr.phi_large])),
    ]


def _fig2(params):
    tr = ExponentialTransition(*params.get("transition", (0.6, 0.8, 2.0)))
    lam = params.get("lam", 1.0)
    ts = np.geomspace(1e-3, 50.0, 121)
    d = relaxation_difference_study(RelaxationSpec(tr, lam, 1.0), ts)
    return [("differences", ["t", "y_vo", "y_vo_minus_alpha1", "y_vo_minus_alpha2"],
             np.column_stack([ts, d.y_vo, d.diff_alpha1, d.diff_alpha2]))]


def _fig3(params):
    sets = params.get("sets", FIG3_SETS)
    out = []
    for k, st in enumerate(sets, 1):
        scan = scan_singularities(ExponentialTransition(*st), params.get("lam_min", 0.01), params.get("lam_max", 5.0))
        rows = np.array(list(scan.rows()), dtype=float).reshape(-1, 4)
        out.append((f"set{k}", ["lambda", "re_s", "im_s", "residual"], rows))
    return out


def _fig4(params):
    out = []
    ts = np.linspace(0.0, params.get("T", 10.0), 201)
    for k, tset in enumerate(TABLES["table1"].sets, 1):
        lam = tset.params["lam"]
        rs = RelaxationSpec(tset.transition, lam, 1.0)
        y = reference_relaxation(rs, ts)
        y1 = relaxation_co(tset.alpha1, lam, 1.0, ts)
        y2 = relaxation_co(tset.alpha2, lam, 1.0, ts)
        out.append((f"set{k}", ["t", "y_vo", "y_alpha1", "y_alpha2"], np.column_stack([ts, y, y1, y2])))
    return out


def _fig5(params):
    out = []
    h = params.get("h", 2.0**-8)
    for k, tset in enumerate(TABLES["table2"].sets, 1):
        tr = solve_gl(tset.problem(params.get("T", 2.0)), h)
        out.append((f"set{k}", ["t", "y"], np.column_stack([tr.ts, tr.ys[:, 0]])))
    return out


FIG6_CASES = {
    "limit_cycle": {"mu": 4.0, "y0": (0.9, 2.1), "T": 120.0},
    "stable": {"mu": 2.0, "y0": (0.5, 2.5), "T": 50.0},
}


def _fig6(params):
    tr = ExponentialTransition(*params.get("transition", (0.6, 0.8, 2.0)))
    h = params.get("h", 2.0**-5)
    out = []
    for name, case in FIG6_CASES.items():
        prob = preset_problem("brusselator", tr, case["y0"], case["T"], a=1.0, mu=case["mu"])
        vo = solve_gl(prob, h)
        c1 = solve_co_gl(tr.alpha1, prob, h)
        c2 = solve_co_gl(tr.alpha2, prob, h)
        cols = np.column_stack([vo.ts, vo.ys, c1.ys, c2.ys])
        out.append((name, ["t", "x_vo", "y_vo", "x_alpha1", "y_alpha1", "x_alpha2", "y_alpha2"], cols))
    return out


FIGURES = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5, "fig6": _fig6}


def figure_data(name: str, params: Optional[dict] = None):
    """Data panels of a figure as a list of ``(panel, column names, array)``."""
    try:
        fn = FIGURES[name]
    except KeyError:
        raise ValueError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}") from None
    return fn(params or {})


def limit_cycle_containment(panel: np.ndarray, tail: float = 0.25, inflate: float = 0.25) -> tuple[bool, tuple, tuple]:
    """Check that the terminal VO phase loop sits inside the inflated alpha2 CO loop box.

    ``panel`` is a fig6 array with columns ``t, x_vo, y_vo, x_a1, y_a1, x_a2, y_a2``.
    The terminal loop is the last ``tail`` fraction of the time window. Returns
    ``(inside, vo_box, co_box)`` with boxes as ``(xmin, xmax, ymin, ymax)``.
    """
    t = panel[:, 0]
    last = t >= t[-1] - tail * (t[-1] - t[0])

    def box(x, y):
        return float(x.min()), float(x.max()), float(y.min()), float(y.max())

    vo = box(panel[last, 1], panel[last, 2])
    x0, x1, y0, y1 = box(panel[last, 5], panel[last, 6])
    dx, dy = inflate * (x1 - x0) / 2, inflate * (y1 - y0) / 2
    co = (x0 - dx, x1 + dx, y0 - dy, y1 + dy)
    inside = co[0] <= vo[0] and vo[1] <= co[1] and co[2] <= vo[2] and vo[3] <= co[3]
    return inside, vo, co
