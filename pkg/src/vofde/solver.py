"""Grünwald–Letnikov time stepping for variable-order fractional ODEs.

The equation ``D^{alpha(t)} y = f(t, y)``, ``y(0) = y0``, is rewritten as the
integral equation ``y = y0 + (psi * f)(t)`` and the convolution is replaced by
the backward-Euler convolution quadrature

    y_n = y0 + sum_{j=1}^{n} omega_{n-j} f(t_j, y_j).

Each step solves ``y_n - omega_0 f(t_n, y_n) = y0 + history`` by Newton's
method with a backtracking line search, restarted from several points when
the root near ``y_{n-1}`` has vanished. Passing ``include_initial=True`` also adds the ``j = 0`` term
``omega_n f(t_0, y0)`` to the history.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from .errors import SolverDivergenceError
from .transition import ExponentialTransition
from .weights import DEFAULT_SAFETY, DEFAULT_TAU, co_weights, compute_weights

__all__ = [
    "VofdeProblem",
    "Trajectory",
    "StepSolverOptions",
    "solve_gl",
    "solve_co_gl",
    "eoc",
    "preset_problem",
    "PRESETS",
    "step_count",
]

Rhs = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class VofdeProblem:
    """``D^{alpha(t)} y = rhs(t, y)`` on ``[0, T]`` with ``y(0) = y0``.

    ``jacobian(t, y)``, if given, returns the ``d x d`` matrix of ``rhs``;
    otherwise Newton uses finite differences.
    """

    tr: ExponentialTransition
    rhs: Rhs
    y0: np.ndarray
    T: float
    jacobian: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        y0 = np.array(self.y0, dtype=float).reshape(-1)
        if y0.size < 1 or not np.all(np.isfinite(y0)):
            raise ValueError("y0 must be a non-empty finite vector")
        y0.setflags(write=False)
        object.__setattr__(self, "y0", y0)
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive and finite, got {self.T}")

    @property
    def dim(self) -> int:
        return self.y0.size


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Solution on the uniform grid ``t_n = n h``; ``ys[n]`` is the state at ``ts[n]``."""

    ts: np.ndarray
    ys: np.ndarray
    meta: dict

    def __post_init__(self):
        for name in ("ts", "ys"):
            getattr(self, name).setflags(write=False)

    @property
    def final(self) -> np.ndarray:
        return self.ys[-1]


@dataclass(frozen=True)
class StepSolverOptions:
    """Nonlinear solver settings for the implicit step.

    The residual test is ``max|r| <= tol * max(1, max|y|)``. The finite
    difference step for column ``k`` is ``fd_step * max(1, |y_k|)``.
    """

    mode: str = "newton"
    tol: float = 1e-12
    max_iter: int = 50
    fd_step: float = 1e-7

    def __post_init__(self):
        if self.mode not in ("newton", "fixed_point"):
            raise ValueError(f"mode must be 'newton' or 'fixed_point', got {self.mode!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")


def step_count(T: float, h: float) -> int:
    """Number of steps ``ceil(T / h)``, tolerant of round-off in ``T / h``."""
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    return max(1, math.ceil(T / h - 1e-9))


def _fd_jacobian(f, t, y, fy, fd_step):
    d = y.size
    J = np.empty((d, d))
    for k in range(d):
        dk = fd_step * max(1.0, abs(y[k]))
        yk = y.copy()
        yk[k] += dk
        J[:, k] = (np.asarray(f(t, yk), dtype=float).reshape(-1) - fy) / dk
    return J


def _line_search(f, t, w0, rhs_const, y, delta, res):
    # Backtrack on the max-norm residual; near fast transients the full
    # Newton step can overshoot into a cycle.
    lam = 1.0
    while lam > 1e-3:
        trial = y - lam * delta
        with np.errstate(all="ignore"):
            r = trial - w0 * np.asarray(f(t, trial), dtype=float).reshape(-1) - rhs_const
        if np.all(np.isfinite(r)) and np.abs(r).max() < (1.0 - 1e-4 * lam) * res:
            return trial
        lam *= 0.5
    return y - delta


def _converged(r, y, tol):
    return float(np.abs(r).max()) <= tol * max(1.0, float(np.abs(y).max()))


def _local_solve(problem, t, w0, rhs_const, guess, opts, n):
    f = problem.rhs
    y = guess.copy()
    eye = np.eye(y.size)
    mode = opts.mode
    res = math.inf
    for it in range(1, opts.max_iter + 1):
        fy = np.asarray(f(t, y), dtype=float).reshape(-1)
        if not np.all(np.isfinite(fy)):
            raise SolverDivergenceError(f"non-finite right-hand side at step {n}", step=n, residual=res)
        r = y - w0 * fy - rhs_const
        res = float(np.abs(r).max())
        if _converged(r, y, opts.tol):
            return y, fy, it - 1, res
        if mode == "newton":
            J = problem.jacobian(t, y) if problem.jacobian is not None else _fd_jacobian(f, t, y, fy, opts.fd_step)
            try:
                delta = np.linalg.solve(eye - w0 * np.atleast_2d(J), r)
            except np.linalg.LinAlgError:
                mode = "fixed_point"
            else:
                y = _line_search(f, t, w0, rhs_const, y, delta, res)
                continue
        y = rhs_const + w0 * fy
    return None, None, opts.max_iter, res


def _restart_points(problem, t, w0, rhs_const, guess):
    starts = [rhs_const, rhs_const + w0 * np.asarray(problem.rhs(t, guess), dtype=float).reshape(-1)]
    if guess.size <= 3:
        scale = 1.0 + np.abs(guess)
        for offset in itertools.product((-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0), repeat=guess.size):
            if any(offset):
                starts.append(guess + scale * np.asarray(offset))
    return starts


def _solve_step(problem, t, w0, rhs_const, guess, opts, n):
    y, fy, its, res = _local_solve(problem, t, w0, rhs_const, guess, opts, n)
    if y is not None:
        return y, fy, its
    # The root next to the previous state can disappear in a fold (fast
    # transients of relaxation oscillations). Look for the remaining roots
    # and keep the one closest to the previous state.
    def F(v):
        return v - w0 * np.asarray(problem.rhs(t, v), dtype=float).reshape(-1) - rhs_const

    best = None
    for start in _restart_points(problem, t, w0, rhs_const, guess):
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore")
            sol = optimize.root(F, start, method="hybr")
        if not np.all(np.isfinite(sol.x)):
            continue
        cand, cf, extra, _ = _local_solve(problem, t, w0, rhs_const, sol.x, opts, n)
        if cand is not None and (best is None or np.abs(cand - guess).max() < np.abs(best[0] - guess).max()):
            best = (cand, cf, opts.max_iter + extra)
    if best is None:
        raise SolverDivergenceError(
            f"implicit step {n} did not converge in {opts.max_iter} iterations (residual {res:.3g})",
            step=n,
            residual=res,
        )
    return best


def _march(problem, h, omegas, opts, include_initial, meta):
    N = step_count(problem.T, h)
    if omegas.size < N + 1:
        raise ValueError(f"need {N + 1} weights, got {omegas.size}")
    d = problem.dim
    ys = np.empty((N + 1, d))
    fs = np.empty((N + 1, d))
    ys[0] = problem.y0
    fs[0] = np.asarray(problem.rhs(0.0, problem.y0.copy()), dtype=float).reshape(-1)
    iters = np.zeros(N + 1, dtype=int)
    w0 = omegas[0]
    for n in range(1, N + 1):
        hist = problem.y0 + omegas[n - 1 : 0 : -1] @ fs[1:n] if n > 1 else problem.y0.copy()
        if include_initial:
            hist = hist + omegas[n] * fs[0]
        ys[n], fs[n], iters[n] = _solve_step(problem, n * h, w0, hist, ys[n - 1], opts, n)
    ts = h * np.arange(N + 1)
    meta = dict(meta, h=h, N=N, include_initial=include_initial, iterations=iters, options=opts)
    return Trajectory(ts, ys, meta)


def solve_gl(
    problem: VofdeProblem,
    h: float,
    opts: Optional[StepSolverOptions] = None,
    *,
    include_initial: bool = False,
    tau: float = DEFAULT_TAU,
    F_s: float = DEFAULT_SAFETY,
) -> Trajectory:
    """Variable-order Grünwald–Letnikov solution on ``[0, T]`` with step ``h``."""
    opts = opts or StepSolverOptions()
    N = step_count(problem.T, h)
    table = compute_weights(problem.tr, h, N, tau=tau, F_s=F_s)
    meta = {"weights_checksum": table.checksum, "weights_plan": table.plan, "scheme": "vo-gl"}
    return _march(problem, h, table.omegas, opts, include_initial, meta)


def solve_co_gl(
    alpha: float,
    problem: VofdeProblem,
    h: float,
    opts: Optional[StepSolverOptions] = None,
    *,
    include_initial: bool = False,
) -> Trajectory:
    """Constant-order counterpart of :func:`solve_gl`; ``problem.tr`` is ignored."""
    opts = opts or StepSolverOptions()
    N = step_count(problem.T, h)
    omegas = h**alpha * co_weights(alpha, N)
    meta = {"weights_checksum": None, "alpha": alpha, "scheme": "co-gl"}
    return _march(problem, h, omegas, opts, include_initial, meta)


def eoc(err_h: float, err_h2: float) -> float:
    """Estimated order of convergence ``log2(err_h / err_h2)``."""
    if not (err_h > 0 and err_h2 > 0):
        raise ValueError("errors must be positive")
    return math.log2(err_h / err_h2)


def _relaxation(lam=1.0):
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return (lambda t, y: -lam * y), (lambda t, y: np.array([[-lam]])), {"lam": lam}


def _nonlinear():
    return (lambda t, y: 1.0 - 3.0 * y * y), (lambda t, y: np.array([[-6.0 * y[0]]])), {}


def _brusselator(a=1.0, mu=4.0):
    a, mu = float(a), float(mu)

    def f(t, u):
        x, y = u
        return np.array([a - (mu + 1.0) * x + x * x * y, mu * x - x * x * y])

    def jac(t, u):
        x, y = u
        return np.array([[-(mu + 1.0) + 2.0 * x * y, x * x], [mu - 2.0 * x * y, -x * x]])

    return f, jac, {"a": a, "mu": mu}


PRESETS = {
    "relaxation": (_relaxation, (1.0,)),
    "nonlinear13y2": (_nonlinear, (0.84,)),
    "brusselator": (_brusselator, (0.5, 2.5)),
}


def preset_problem(name: str, tr: ExponentialTransition, y0=None, T: float = 1.0, **params) -> VofdeProblem:
    """Build one of the stock problems.

    ``relaxation`` (``lam``): ``f = -lam y``. ``nonlinear13y2``: ``f = 1 - 3 y**2``.
    ``brusselator`` (``a``, ``mu``): ``f = (a - (mu + 1) x + x**2 y, mu x - x**2 y)``.
    Default initial values are ``1``, ``0.84`` and ``(0.5, 2.5)``.
    """
    try:
        factory, default_y0 = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    try:
        f, jac, used = factory(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for preset {name!r}: {exc}") from None
    y0 = default_y0 if y0 is None else y0
    y0 = np.array(y0, dtype=float).reshape(-1)
    if y0.size != len(default_y0):
        raise ValueError(f"preset {name!r} needs a state of dimension {len(default_y0)}")
    return VofdeProblem(tr, f, y0, T, jacobian=jac, name=name, params=used)
