"""Reference solutions and qualitative studies of the variable-order relaxation.

The relaxation ``D^{alpha(t)} y = -lam y`` has the transform ``Y = y0 H(s)``
with ``H(s) = 1 / (s (1 + lam Psi(s)))``. Its singularities off the branch
cut are the zeros of ``g(s) = 1 + lam Psi(s)``, located here by grid-seeded
Newton iteration and certified by their residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad

from .laplace_inversion import Contour, ContourSpec, _decade_windows, invert, kernel_phi, kernel_psi
from .mittag_leffler import relaxation_co
from .transition import ExponentialTransition, psi_hat

__all__ = [
    "RelaxationSpec",
    "SingularityScan",
    "DEFAULT_BOX",
    "transform_H",
    "g_function",
    "find_singularities",
    "scan_singularities",
    "reference_relaxation",
    "kernel_ratio_study",
    "relaxation_difference_study",
    "sonine_convolution",
]

DEFAULT_BOX = (-3.0, 2.0, -6.0, 6.0)
ROOT_TOL = 1e-10
CUT_GUARD = 1e-9


@dataclass(frozen=True)
class RelaxationSpec:
    tr: ExponentialTransition
    lam: float
    y0: float = 1.0

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not math.isfinite(self.y0):
            raise ValueError("y0 must be finite")


def g_function(tr: ExponentialTransition, lam: float, s):
    """``1 + lam Psi(s)``, whose zeros are the poles of ``H``."""
    return 1.0 + lam * psi_hat(tr, s)


def transform_H(spec: RelaxationSpec, s):
    """``H(s) = 1 / (s (1 + lam s**(-s A(s))))``."""
    s = np.asarray(s, dtype=complex)
    out = 1.0 / (s * g_function(spec.tr, spec.lam, s))
    return out[()] if out.ndim == 0 else out


def _g_and_derivative(tr, lam, s):
    # Psi' = -Psi (q' log s + q / s) with q = sA(s).
    q = tr.s_alpha_product(s)
    dq = tr.c * (tr.alpha1 - tr.alpha2) / (tr.c + s) ** 2
    log_s = np.log(s)
    psi = np.exp(-q * log_s)
    return 1.0 + lam * psi, -lam * psi * (dq * log_s + q / s)


def _newton(tr, lam, seeds, iters=80):
    s = np.asarray(seeds, dtype=complex).copy()
    alive = np.ones(s.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(iters):
            g, dg = _g_and_derivative(tr, lam, s[alive])
            step = g / dg
            s_new = s[alive] - step
            bad = ~np.isfinite(s_new) | ((s_new.imag == 0) & (s_new.real <= 0)) | (np.abs(s_new) > 1e3)
            s[alive] = np.where(bad, np.nan, s_new)
            idx = np.nonzero(alive)[0]
            alive[idx[bad]] = False
            alive[idx[~bad & (np.abs(step) < 1e-15 * (1 + np.abs(s_new)))]] = False
            if not alive.any():
                break
    return s[np.isfinite(s)]


def _dedupe(roots, dist=1e-6):
    kept: list[complex] = []
    for z in sorted(roots, key=lambda z: (round(z.real, 8), round(z.imag, 8))):
        if all(abs(z - k) > dist for k in kept):
            kept.append(complex(z))
    return kept


def find_singularities(
    tr: ExponentialTransition,
    lam: float,
    box: Sequence[float] = DEFAULT_BOX,
    seeds: tuple[int, int] = (40, 40),
    extra_seeds: Sequence[complex] = (),
) -> list[complex]:
    """Zeros of ``1 + lam Psi(s)`` in the box ``(re_min, re_max, im_min, im_max)``.

    Every returned root satisfies ``|g| < 1e-10``; the list is closed under
    conjugation and sorted by real part, largest first. An empty list means
    that no root was found, which does not prove that none exist.
    """
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    x0, x1, y0, y1 = box
    xs = np.linspace(x0, x1, seeds[0])
    ys = np.linspace(y0, y1, seeds[1])
    grid = (xs[:, None] + 1j * ys[None, :]).ravel()
    grid = grid[grid.imag != 0]
    grid = np.concatenate([grid, np.asarray(extra_seeds, dtype=complex)])
    cand = _newton(tr, lam, grid)
    cand = cand[(cand.real >= x0) & (cand.real <= x1) & (cand.imag >= y0) & (cand.imag <= y1)]
    # Limits onto the lips of the cut can solve g = 0 without being poles of H.
    on_cut = (np.abs(cand.imag) < CUT_GUARD * (1.0 + np.abs(cand))) & (cand.real < 0)
    upper = [complex(z.real, abs(z.imag)) for z in cand[~on_cut]]
    roots = []
    for z in _dedupe(upper):
        if abs(complex(g_function(tr, lam, z))) < ROOT_TOL:
            roots.extend([z, z.conjugate()])
    roots.sort(key=lambda z: (-z.real, -z.imag))
    return roots


@dataclass(frozen=True)
class SingularityScan:
    """Roots of ``1 + lam Psi`` along a ``lam`` sweep.

    Roots at consecutive ``lam`` values are linked by one Newton
    continuation step to the next ``lam``. ``max_jump[k]`` is the largest
    distance moved by a linked root between ``lambda_grid[k]`` and
    ``lambda_grid[k+1]`` (NaN if there is none). ``births`` and ``deaths``
    list ``(k, root)`` for roots that appear or vanish between the two steps.
    """

    tr: ExponentialTransition
    lambda_grid: np.ndarray
    search_box: tuple
    found: list
    residuals: list
    max_jump: np.ndarray = field(repr=False)
    births: list = field(repr=False)
    deaths: list = field(repr=False)

    def rows(self):
        for lam, roots, res in zip(self.lambda_grid, self.found, self.residuals):
            for z, r in zip(roots, res):
                yield float(lam), z.real, z.imag, r

    def unexplained_events(self, cut_band: float = 0.1, core: float = 0.5, edge: float = 0.5) -> list:
        """Births and deaths away from the places where roots may appear.

        Roots enter and leave through the lips of the cut
        (``|Im z| < cut_band |z|``), the essential singularity of ``Psi`` at
        ``s = -c`` (``|z + c| < core c``), the branch point (``|z| < core``)
        or the edge of the search box (closer than ``edge``). Anything else
        points to a missed root or a broken continuation.
        """
        c = self.tr.c
        x0, x1, y0, y1 = self.search_box

        def explained(z):
            near_edge = min(z.real - x0, x1 - z.real, z.imag - y0, y1 - z.imag) < edge
            return abs(z.imag) < cut_band * abs(z) or abs(z + c) < core * c or abs(z) < core or near_edge

        return [(k, z) for k, z in self.births + self.deaths if k >= 0 and not explained(z)]


def _match(z, roots, tol=1e-6):
    if z is None or not roots:
        return None
    dist = [abs(z - w) for w in roots]
    i = int(np.argmin(dist))
    return i if dist[i] < tol else None


def scan_singularities(
    tr: ExponentialTransition,
    lam_min: float = 0.01,
    lam_max: float = 5.0,
    ratio: float = 1.2,
    box: Sequence[float] = DEFAULT_BOX,
) -> SingularityScan:
    """Track the roots while ``lam`` sweeps ``[lam_min, lam_max]`` geometrically."""
    if not 1.0 < ratio <= 1.2:
        raise ValueError("ratio must lie in (1, 1.2]")
    if not 0 < lam_min < lam_max:
        raise ValueError("need 0 < lam_min < lam_max")
    n = math.ceil(math.log(lam_max / lam_min) / math.log(ratio))
    grid = np.geomspace(lam_min, lam_max, n + 1)
    found, residuals = [], []
    prev: list[complex] = []
    for lam in grid:
        roots = find_singularities(tr, lam, box, extra_seeds=prev)
        found.append(roots)
        residuals.append([float(abs(complex(g_function(tr, lam, z)))) for z in roots])
        prev = roots
    jumps = np.full(n, np.nan)
    births, deaths = [], []
    for k in range(n):
        nxt = found[k + 1]
        linked = set()
        moved = []
        for z in found[k]:
            cont = _newton(tr, grid[k + 1], [z])
            match = _match(complex(cont[0]), nxt) if cont.size else None
            if match is None or match in linked:
                deaths.append((k, z))
            else:
                linked.add(match)
                moved.append(abs(nxt[match] - z))
        births.extend((k, w) for i, w in enumerate(nxt) if i not in linked)
        if moved:
            jumps[k] = max(moved)
    if found[0]:
        births = [(-1, z) for z in found[0]] + births
    return SingularityScan(tr, grid, tuple(box), found, residuals, jumps, births, deaths)


def _needed_shift(contour: Contour, roots, margin: float) -> float:
    mu = contour.mu
    need = 0.0
    for z in roots:
        # Keep the root a fixed distance left of the parabola.
        need = max(need, z.real - mu + z.imag**2 / (4.0 * mu) + margin)
    return need


def reference_relaxation(
    spec: RelaxationSpec,
    ts,
    contour: Optional[ContourSpec] = None,
    roots: Optional[Sequence[complex]] = None,
    margin: float = 0.25,
    check: bool = True,
) -> np.ndarray:
    """Variable-order relaxation ``y(t) = y0 L^{-1}[H](t)`` by contour inversion.

    The roots of ``1 + lam Psi`` are located first (unless supplied) and each
    window's contour is shifted right just enough to enclose them with the
    given margin. ``t = 0`` returns ``y0``.
    """
    base = contour or ContourSpec()
    if roots is None:
        roots = find_singularities(spec.tr, spec.lam)
    t = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("times must be finite and non-negative")
    out = np.full(t.shape, float(spec.y0))
    pos = np.nonzero(t > 0)[0]
    F = lambda s: transform_H(spec, s)
    if pos.size:
        if base.t_min is not None:
            windows = [(base.t_min, base.t_max, np.arange(pos.size))]
        else:
            windows = _decade_windows(t[pos])
        for a, b, idx in windows:
            wspec = base.with_window(a, b)
            shift = max(base.shift, _needed_shift(Contour.for_window(wspec), roots, margin))
            wspec = ContourSpec(wspec.shape, wspec.node_count, a, b, shift)
            out[pos[idx]] = spec.y0 * invert(F, t[pos[idx]], wspec, singularities=roots, check=check)
    return out if np.ndim(ts) else out[0]


@dataclass(frozen=True)
class KernelRatios:
    t_small: np.ndarray
    t_large: np.ndarray
    psi_small: np.ndarray  # psi_{a1,a2} / psi_{a1}
    psi_large: np.ndarray  # psi_{a1,a2} / psi_{a2}
    phi_small: np.ndarray
    phi_large: np.ndarray


def kernel_ratio_study(
    tr: ExponentialTransition,
    t_small,
    t_large,
    contour: Optional[ContourSpec] = None,
) -> KernelRatios:
    """Ratios of variable-order kernels to their constant-order limits.

    Near ``t = 0`` the comparison is with order ``alpha1`` and for large ``t``
    with ``alpha2``. Constant-order kernels use their closed forms.
    """
    from scipy.special import rgamma

    ts_ = np.asarray(t_small, dtype=float)
    tl_ = np.asarray(t_large, dtype=float)
    a1, a2 = tr.alpha1, tr.alpha2

    def psi_co(a, t):
        return t ** (a - 1.0) * rgamma(a)

    def phi_co(a, t):
        return t ** (-a) * rgamma(1.0 - a)

    return KernelRatios(
        ts_,
        tl_,
        kernel_psi(tr, ts_, contour) / psi_co(a1, ts_),
        kernel_psi(tr, tl_, contour) / psi_co(a2, tl_),
        kernel_phi(tr, ts_, contour) / phi_co(a1, ts_),
        kernel_phi(tr, tl_, contour) / phi_co(a2, tl_),
    )


@dataclass(frozen=True)
class RelaxationDifferences:
    ts: np.ndarray
    y_vo: np.ndarray
    diff_alpha1: np.ndarray
    diff_alpha2: np.ndarray


def relaxation_difference_study(spec: RelaxationSpec, ts) -> RelaxationDifferences:
    """``y_VO - y0 E_{alpha1}(-lam t^alpha1)`` and the same against ``alpha2``."""
    t = np.asarray(ts, dtype=float)
    y = reference_relaxation(spec, t)
    d1 = y - relaxation_co(spec.tr.alpha1, spec.lam, spec.y0, t)
    d2 = y - relaxation_co(spec.tr.alpha2, spec.lam, spec.y0, t)
    return RelaxationDifferences(t, y, d1, d2)


def sonine_convolution(tr: ExponentialTransition, t: float, contour: Optional[ContourSpec] = None) -> float:
    """``int_0^t phi(t - u) psi(u) du`` with kernels obtained by inversion.

    Both kernels are weakly singular at the origin, so the integral is split
    at ``t/2`` and each half is integrated with an algebraic endpoint weight
    matching the constant-order singularity ``u**(alpha1 - 1)`` or
    ``(t - u)**(-alpha1)``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    a1 = tr.alpha1

    # The weighted regular parts are continuous at the endpoints, where the
    # quadrature rule samples them; nudge those samples off zero.
    floor = 1e-12 * t

    def psi(u):
        return float(kernel_psi(tr, max(u, floor), contour, check=False))

    def phi(u):
        return float(kernel_phi(tr, max(u, floor), contour, check=False))

    opts = dict(epsabs=1e-12, epsrel=1e-11, limit=200)
    left, _ = quad(
        lambda u: phi(t - u) * psi(u) * max(u, floor) ** (1.0 - a1), 0.0, t / 2, weight="alg", wvar=(a1 - 1.0, 0.0), **opts
    )
    right, _ = quad(
        lambda u: phi(t - u) * psi(u) * max(t - u, floor) ** a1, t / 2, t, weight="alg", wvar=(0.0, -a1), **opts
    )
    return left + right
