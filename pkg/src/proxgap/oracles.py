"""Brute-force ground truth: grid-search gaps on low-dimensional toy games,
quadrature divergences, and equilibrium classification.

Toy games use the squared parameter distance as the discriminator function
distance, which is exact for linear discriminators under the gradient-based
function norm, so every penalized quantity here is computable by grid search.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import rel_entr

LABEL_NASH = "nash"
LABEL_PROXIMAL_ONLY = "proximal_only"
LABEL_STACKELBERG_ONLY = "stackelberg_only"
LABEL_NONE = "none"


class HierarchyError(AssertionError):
    """Gap values violate the lambda hierarchy; signals an internal inconsistency."""


@dataclass(frozen=True)
class ToyGame:
    """A two-player zero-sum game small enough for exhaustive search.

    ``value(d, g)`` must broadcast over leading axes of ``d`` (..., d_dim)
    and ``g`` (..., g_dim).
    """

    name: str
    value: Callable
    d_box: tuple
    g_box: tuple

    def __post_init__(self):
        for box in (self.d_box, self.g_box):
            for lo, hi in box:
                if not hi > lo:
                    raise ValueError("boxes must be non-degenerate")

    @property
    def d_dim(self) -> int:
        return len(self.d_box)

    @property
    def g_dim(self) -> int:
        return len(self.g_box)

    def clip_d(self, d):
        return _clip_box(d, self.d_box)

    def clip_g(self, g):
        return _clip_box(g, self.g_box)


def _clip_box(x, box):
    x = np.asarray(x, dtype=np.float64)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return np.clip(x, lo, hi)


def bilinear(bound: float = 1.0) -> ToyGame:
    return ToyGame("bilinear", lambda d, g: np.sum(d * g, axis=-1),
                   ((-bound, bound),), ((-bound, bound),))


def concave_quadratic(bound: float = 1.0, d_box=None) -> ToyGame:
    return ToyGame("concave_quadratic",
                   lambda d, g: np.sum(2.0 * d * g - d * d, axis=-1),
                   d_box if d_box is not None else ((-bound, bound),),
                   ((-bound, bound),))


def saddle_shift(a: float, b: float, bound: float = 1.0) -> ToyGame:
    return ToyGame("saddle_shift", lambda d, g: np.sum((d - a) * (g - b), axis=-1),
                   ((-bound, bound),), ((-bound, bound),))


def shipped_games() -> tuple:
    return (bilinear(), concave_quadratic(), saddle_shift(0.3, -0.4))


@dataclass(frozen=True)
class GridSpec:
    points_per_dim: int = 401

    def __post_init__(self):
        if self.points_per_dim < 3:
            raise ValueError("need at least 3 grid points per dimension")


def _box_grid(box, n: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, n) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _point(point):
    d, g = point
    return (np.asarray(d, dtype=np.float64).ravel(),
            np.asarray(g, dtype=np.float64).ravel())


def grid_dg(game: ToyGame, point, grid: GridSpec = GridSpec()) -> float:
    """Plain duality gap at a configuration: grid max over d minus grid min over g."""
    d0, g0 = _point(point)
    dd = _box_grid(game.d_box, grid.points_per_dim)
    gg = _box_grid(game.g_box, grid.points_per_dim)
    v_dw = float(np.max(game.value(dd, g0[None, :])))
    v_gw = float(np.min(game.value(d0[None, :], gg)))
    return v_dw - v_gw


def grid_v_lambda(game: ToyGame, anchor_d, g, lam: float,
                  grid: GridSpec = GridSpec()) -> float:
    """Penalized inner maximum: max over the d grid of V minus lam * ||d - anchor||^2."""
    anchor = np.asarray(anchor_d, dtype=np.float64).ravel()
    g = np.asarray(g, dtype=np.float64).ravel()
    dd = _box_grid(game.d_box, grid.points_per_dim)
    pen = np.sum((dd - anchor[None, :]) ** 2, axis=1)
    return float(np.max(game.value(dd, g[None, :]) - lam * pen))


def grid_dg_lambda(game: ToyGame, point, lam: float,
                   grid: GridSpec = GridSpec()) -> float:
    """Proximal duality gap by exhaustive search, anchored at the point's d."""
    d0, g0 = _point(point)
    dd = _box_grid(game.d_box, grid.points_per_dim)
    gg = _box_grid(game.g_box, grid.points_per_dim)
    v_dw = float(np.max(game.value(dd, g0[None, :])))
    vals = game.value(dd[:, None, :], gg[None, :, :])  # (Nd, Ng)
    pen = np.sum((dd - d0[None, :]) ** 2, axis=1)
    v_lambda_per_g = np.max(vals - lam * pen[:, None], axis=0)
    v_gw_lambda = float(np.min(v_lambda_per_g))
    return v_dw - v_gw_lambda


@dataclass(frozen=True)
class EquilibriumClass:
    """Outcome of classifying a configuration against a ladder of lambda values."""

    label: str
    lam: float | None
    dg: float
    dg_by_lambda: tuple
    tol: float


def classify_equilibrium(game: ToyGame, point, lambda_list, grid: GridSpec,
                         tol: float) -> EquilibriumClass:
    """Strongest equilibrium the configuration satisfies at tolerance ``tol``.

    ``lambda_list`` must be sorted ascending and include 0.  The hierarchy
    (zero gap at a larger lambda implies zero gap at every smaller one) is
    asserted; a violation raises :class:`HierarchyError`.
    """
    lambdas = [float(x) for x in lambda_list]
    if lambdas != sorted(lambdas) or 0.0 not in lambdas:
        raise ValueError("lambda_list must be ascending and include 0")
    dg = grid_dg(game, point, grid)
    gaps = [(lam, grid_dg_lambda(game, point, lam, grid)) for lam in lambdas]
    qualifies = [val < tol for _, val in gaps]
    for i in range(len(gaps) - 1):
        if not qualifies[i] and any(qualifies[i + 1:]):
            raise HierarchyError(
                f"gap below tol at lambda={gaps[i + 1:]} but not at {gaps[i][0]}")
    if dg < tol:
        label, lam = LABEL_NASH, None
    else:
        positive = [lam for (lam, val), ok in zip(gaps, qualifies) if ok and lam > 0]
        if positive:
            label, lam = LABEL_PROXIMAL_ONLY, min(positive)
        elif qualifies[lambdas.index(0.0)]:
            label, lam = LABEL_STACKELBERG_ONLY, None
        else:
            label, lam = LABEL_NONE, None
    return EquilibriumClass(label, lam, dg, tuple(gaps), tol)


def export_gap_table(path, game: ToyGame, points, lambdas,
                     grid: GridSpec = GridSpec()):
    """Write grid-search gaps for a set of configurations as CSV.

    One row per (configuration, lambda): the exact penalized gap next to the
    plain gap, for cross-checking gradient-based estimates offline.
    """
    import csv

    lams = sorted(float(x) for x in lambdas)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["game", "d", "g", "lambda", "dg_lambda", "dg_plain"])
        for point in points:
            d0, g0 = _point(point)
            plain = grid_dg(game, point, grid)
            for lam in lams:
                writer.writerow([
                    game.name,
                    " ".join(f"{v:.12g}" for v in d0),
                    " ".join(f"{v:.12g}" for v in g0),
                    f"{lam:.12g}",
                    f"{grid_dg_lambda(game, point, lam, grid):.12g}",
                    f"{plain:.12g}",
                ])
    return path


# -- divergence oracles --------------------------------------------------


def _mesh_eval(fn, box, resolution):
    axes = [np.linspace(lo, hi, resolution) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    vals = np.asarray(fn(pts), dtype=np.float64).reshape([resolution] * len(box))
    return axes, vals


def _integrate(values, axes):
    out = values
    for axis_vals in reversed(axes):
        out = trapezoid(out, axis_vals, axis=-1)
    return float(out)


def numeric_jsd(p, q, grid_box, resolution: int = 1001) -> float:
    """Jensen-Shannon divergence (natural log) by trapezoidal quadrature.

    ``p`` and ``q`` are density callables over (n, dim) point arrays;
    ``grid_box`` is a per-dimension sequence of (lo, hi).
    """
    box = tuple(grid_box)
    axes, pv = _mesh_eval(p, box, resolution)
    _, qv = _mesh_eval(q, box, resolution)
    m = 0.5 * (pv + qv)
    integrand = 0.5 * (rel_entr(pv, m) + rel_entr(qv, m))
    return _integrate(integrand, axes)


def numeric_fdiv(family, p, q, grid_box, resolution: int = 1001) -> float:
    """f-divergence with the convention: integrate p(x) f(q(x)/p(x)) dx."""
    box = tuple(grid_box)
    axes, pv = _mesh_eval(p, box, resolution)
    _, qv = _mesh_eval(q, box, resolution)
    floor = 1e-300
    safe_p = np.maximum(pv, floor)
    with np.errstate(all="ignore"):
        integrand = safe_p * family.f(qv / safe_p)
    integrand = np.where((pv <= floor) & (qv <= floor), 0.0, integrand)
    if not np.all(np.isfinite(integrand)):
        raise FloatingPointError("f-divergence integrand is not finite on the grid")
    return _integrate(integrand, axes)


def jsd_from_samples(samples_p, samples_q, bins: int, box=None) -> float:
    """Histogram JSD between two sample sets with additive smoothing 1e-12.

    The binning box is shared; when not given it is the joint extent of both
    sample sets.  The result lies in [0, log 2].
    """
    sp = _as_points(samples_p)
    sq = _as_points(samples_q)
    if sp.shape[0] == 0 or sq.shape[0] == 0:
        raise ValueError("sample sets must be non-empty")
    dim = sp.shape[1]
    if sq.shape[1] != dim:
        raise ValueError("sample sets must share a dimension")
    if box is None:
        lo = np.minimum(sp.min(axis=0), sq.min(axis=0))
        hi = np.maximum(sp.max(axis=0), sq.max(axis=0))
        span = np.maximum(hi - lo, 1e-12)
        box = [(lo[i] - 1e-9 * span[i], hi[i] + 1e-9 * span[i]) for i in range(dim)]
    hp, _ = np.histogramdd(sp, bins=bins, range=box)
    hq, _ = np.histogramdd(sq, bins=bins, range=box)
    p = hp.ravel() / sp.shape[0] + 1e-12
    q = hq.ravel() / sq.shape[0] + 1e-12
    p /= p.sum()
    q /= q.sum()
    m = 0.5 * (p + q)
    return float(0.5 * (rel_entr(p, m).sum() + rel_entr(q, m).sum()))


def wasserstein1_1d(samples_p, samples_q) -> float:
    """W1 between 1-D samples: mean absolute difference of aligned quantiles."""
    sp = np.sort(np.asarray(samples_p, dtype=np.float64).ravel())
    sq = np.sort(np.asarray(samples_q, dtype=np.float64).ravel())
    if sp.size == 0 or sq.size == 0:
        raise ValueError("sample sets must be non-empty")
    if sp.size != sq.size:
        m = max(sp.size, sq.size)
        qs = (np.arange(m) + 0.5) / m
        sp = np.quantile(sp, qs)
        sq = np.quantile(sq, qs)
    return float(np.mean(np.abs(sp - sq)))


def _as_points(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    return arr[:, None] if arr.ndim == 1 else arr


# -- finite-difference derivatives of toy games ---------------------------
# Central differences are exact (up to rounding) for the shipped polynomial
# games, so they double as the gradient oracle for the estimator modules.

_TOY_FD_H = 1e-6


def toy_value(game: ToyGame, d, g) -> float:
    d = np.asarray(d, dtype=np.float64).ravel()
    g = np.asarray(g, dtype=np.float64).ravel()
    return float(game.value(d[None, :], g[None, :])[0])


def toy_grad_d(game: ToyGame, d, g) -> np.ndarray:
    return _fd_grad(lambda dv: toy_value(game, dv, g), np.asarray(d, dtype=np.float64).ravel())


def toy_grad_g(game: ToyGame, d, g) -> np.ndarray:
    return _fd_grad(lambda gv: toy_value(game, d, gv), np.asarray(g, dtype=np.float64).ravel())


def _fd_grad(fn, x: np.ndarray) -> np.ndarray:
    grad = np.empty_like(x)
    for i in range(x.size):
        up = x.copy()
        up[i] += _TOY_FD_H
        down = x.copy()
        down[i] -= _TOY_FD_H
        grad[i] = (fn(up) - fn(down)) / (2.0 * _TOY_FD_H)
    return grad
