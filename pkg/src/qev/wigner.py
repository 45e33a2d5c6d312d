"""Closed-form Wigner evaluation and 2D slice analysis.

This module evaluates the literal closed-form Wigner expression for the
elliptical-vortex state: a factorized Gaussian envelope times an associated
Laguerre polynomial L_m^{-1/2} of one squared linear combination of scaled
phase-space coordinates,

    W = K * exp(-(X1^2 + Y1^2 + PX1^2 + PY1^2))
          * L_m^{-1/2}[ (PX2 + PY2 - X2 - Y2)^2 / (sigma_x^2 + sigma_y^2) ].

Units: phase-space momenta are canonical ([x, p] = i, vacuum variance 1/2).
The dimensionless momentum maps used by the evaluator absorb a factor
sqrt(2) relative to the raw scaled-variable definitions (PX1 = sigma_x p_x,
PX2 = sigma_y^3 p_x, and the y analogues); this is the unique unit choice
under which the m = 0 case reproduces the exact squeezed-vacuum phase-space
Gaussian, which the integral-transform oracle independently fixes.  The raw
maps are exposed unchanged by ``scaled_vars``.

The multiplicative constant is *not* taken from the closed-form reference K
(which is negative for odd m and does not normalize the distribution);
instead a numeric constant enforcing a unit phase-space integral is computed
once per parameter set and cached, and the ratio to the reference K is
reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DomainError, NumericError
from .numerics import gamma_half_integer, gauss_hermite_rule, laguerre_assoc_half
from .state import QevParams

__all__ = [
    "PhasePoint",
    "ScaledVars",
    "Grid2D",
    "Extremum",
    "Feature",
    "PLANES",
    "scaled_vars",
    "wigner_closed",
    "closed_form_norm_constant",
    "closed_form_reference_constant",
    "wigner_slice",
    "default_window",
    "slice_extrema",
    "significant_extrema",
    "alp_argument",
]

DEFAULT_4D_ORDER = 32

# plane tag -> (u axis, v axis); the complementary two coordinates are zero.
PLANES = {
    "xy": ("x", "y"),
    "pxpy": ("p_x", "p_y"),
    "xpx": ("x", "p_x"),
    "ypy": ("y", "p_y"),
    "xpy": ("x", "p_y"),
    "ypx": ("y", "p_x"),
}


@dataclass(frozen=True)
class PhasePoint:
    """A point in 4D phase space (natural units, hbar = 1)."""

    x: float
    y: float
    p_x: float
    p_y: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "p_x", "p_y"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"phase-space coordinate {name} must be finite")


@dataclass(frozen=True)
class ScaledVars:
    """The eight dimensionless scaled coordinates (raw definitions)."""

    X1: float
    Y1: float
    Px1: float
    Py1: float
    X2: float
    Y2: float
    Px2: float
    Py2: float


@dataclass
class Grid2D:
    """A sampled 2D slice: plane tag, axis specs, and row-major values.

    ``values[i, j]`` holds the sample at v = v_i (row), u = u_j (column).
    """

    plane: str
    axis_u: tuple[float, float, int]
    axis_v: tuple[float, float, int]
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.plane not in PLANES:
            raise ConfigError(f"unknown plane {self.plane!r}; expected one of {sorted(PLANES)}")
        for axis in (self.axis_u, self.axis_v):
            lo, hi, count = axis
            if count < 2 or not (hi > lo):
                raise ConfigError(f"bad axis spec {axis}")
        nv, nu = self.values.shape
        if (nv, nu) != (self.axis_v[2], self.axis_u[2]):
            raise ConfigError("grid values shape does not match axis counts")
        if not np.all(np.isfinite(self.values)):
            raise NumericError("grid contains non-finite values")

    def u_coords(self) -> np.ndarray:
        lo, hi, count = self.axis_u
        return np.linspace(lo, hi, count)

    def v_coords(self) -> np.ndarray:
        lo, hi, count = self.axis_v
        return np.linspace(lo, hi, count)


@dataclass(frozen=True)
class Extremum:
    kind: str  # "max" | "min"
    u: float
    v: float
    value: float


@dataclass(frozen=True)
class Feature:
    """A persistence-filtered extremum (a real hill or basin of the surface)."""

    kind: str  # "max" | "min"
    u: float
    v: float
    value: float
    persistence: float


def scaled_vars(params: QevParams, point: PhasePoint) -> ScaledVars:
    """The raw scaled-coordinate maps, applied literally as defined."""
    params.require_canonical()
    sx, sy = params.sigma_x, params.sigma_y
    rt2 = math.sqrt(2.0)
    return ScaledVars(
        X1=point.x / sx,
        Y1=point.y / sy,
        Px1=sx * point.p_x / rt2,
        Py1=sy * point.p_y / rt2,
        X2=sy * point.x / (2.0 * sx),
        Y2=sx * point.y / (2.0 * sy),
        Px2=sy**3 * point.p_x / rt2,
        Py2=sx**3 * point.p_y / rt2,
    )


def alp_argument(params: QevParams, x, y, p_x, p_y):
    """Argument handed to L_m^{-1/2}: a square over a positive denominator.

    Canonical-momentum units (the sqrt(2) of the raw maps is absorbed).
    """
    sx, sy = params.sigma_x, params.sigma_y
    x2 = sy * np.asarray(x, dtype=np.float64) / (2.0 * sx)
    y2 = sx * np.asarray(y, dtype=np.float64) / (2.0 * sy)
    px2 = sy**3 * np.asarray(p_x, dtype=np.float64)
    py2 = sx**3 * np.asarray(p_y, dtype=np.float64)
    return (px2 + py2 - x2 - y2) ** 2 / (sx**2 + sy**2)


def _closed_kernel(params: QevParams, x, y, p_x, p_y):
    """Unnormalized closed-form value: Gaussian envelope times L_m^{-1/2}.

    Shared by the 4D evaluator, the slice evaluator, and the normalization
    integral, so slices agree with pinned-coordinate 4D evaluation bitwise.
    """
    sx, sy = params.sigma_x, params.sigma_y
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    p_x = np.asarray(p_x, dtype=np.float64)
    p_y = np.asarray(p_y, dtype=np.float64)
    gauss = np.exp(-((x / sx) ** 2 + (y / sy) ** 2 + (sx * p_x) ** 2 + (sy * p_y) ** 2))
    arg = alp_argument(params, x, y, p_x, p_y)
    if np.any(arg < 0.0):
        raise NumericError("Laguerre argument went negative; it is a square by construction")
    return gauss * laguerre_assoc_half(params.m, arg)


@lru_cache(maxsize=128)
def _norm_integral_cached(params: QevParams, order: int) -> float:
    """Phase-space integral of the unnormalized kernel by a 4D tensor rule.

    Axes are variance-matched (x = sigma_x t, p_x = t/sigma_x, ...) so the
    Gaussian envelope is absorbed exactly by the Hermite weight and the
    Laguerre factor is integrated exactly for order > m.
    """
    rule = gauss_hermite_rule(order)
    t = rule.nodes
    w = rule.weights
    sx, sy = params.sigma_x, params.sigma_y
    # eta = (Px2 + Py2 - X2 - Y2)/sqrt(sx^2+sy^2) on the matched lattice;
    # the jacobian of the matched substitution is exactly 1.
    denom = math.sqrt(sx**2 + sy**2)
    cx = -sy * sx / (2.0 * sx) / denom  # coefficient of t_x (x = sx t)
    cy = -sx * sy / (2.0 * sy) / denom
    cpx = sy**3 / sx / denom
    cpy = sx**3 / sy / denom
    eta = (
        cx * t[:, None, None, None]
        + cy * t[None, :, None, None]
        + cpx * t[None, None, :, None]
        + cpy * t[None, None, None, :]
    )
    lag = laguerre_assoc_half(params.m, eta**2)
    w4 = (
        w[:, None, None, None]
        * w[None, :, None, None]
        * w[None, None, :, None]
        * w[None, None, None, :]
    )
    integral = float(np.sum(w4 * lag))
    if integral == 0.0 or not math.isfinite(integral):
        raise NumericError("closed-form normalization integral did not converge")
    return integral


def closed_form_norm_constant(params: QevParams, order: int = DEFAULT_4D_ORDER) -> float:
    """The numeric constant K_num making the closed form integrate to one.

    Carries sign (-1)^m automatically: the kernel integral is negative for
    odd m because the Laguerre tail dominates.
    """
    params.require_canonical()
    return 1.0 / _norm_integral_cached(params, order)


def closed_form_reference_constant(params: QevParams) -> float:
    """The literal reference constant bundled with the closed form.

    2^{m-4} m! / (pi^{3/2} Gamma(m+1/2)) * [-2 (sigma_x^2 + sigma_y^2)]^m.
    Negative for odd m; reported only as a traceability ratio against the
    numeric normalization.
    """
    m = params.m
    base = 2.0 ** (m - 4) * math.factorial(m) / (math.pi**1.5 * gamma_half_integer(m))
    return base * (-2.0 * (params.sigma_x**2 + params.sigma_y**2)) ** m


def wigner_closed(params: QevParams, point: PhasePoint, order: int = DEFAULT_4D_ORDER) -> float:
    """Closed-form Wigner value at a phase-space point (unit-normalized)."""
    params.require_canonical()
    k_num = closed_form_norm_constant(params, order)
    return float(k_num * _closed_kernel(params, point.x, point.y, point.p_x, point.p_y))


def default_window(params: QevParams, axis: str) -> tuple[float, float]:
    """Default plotting window: +-4 sigma_max on positions, +-4/sigma_min on momenta."""
    smax = max(params.sigma_x, params.sigma_y)
    smin = min(params.sigma_x, params.sigma_y)
    half = 4.0 * smax if axis in ("x", "y") else 4.0 / smin
    return (-half, half)


def _axis_spec(params: QevParams, axis: str, spec: tuple[float, float, int] | int | None):
    if spec is None:
        spec = 257
    if isinstance(spec, int):
        lo, hi = default_window(params, axis)
        return (lo, hi, spec)
    return tuple(spec)


def wigner_slice(
    params: QevParams,
    plane: str,
    axis_u: tuple[float, float, int] | int | None = None,
    axis_v: tuple[float, float, int] | int | None = None,
    order: int = DEFAULT_4D_ORDER,
    threads: int = 1,
) -> Grid2D:
    """Evaluate the closed form on a 2D grid with the other two coordinates zero.

    ``axis_u``/``axis_v`` may be (min, max, count) triples, a bare count (the
    default window is used), or None (257-point default window).  Rows are
    evaluated in parallel when threads > 1; assembly order is fixed, so the
    output is independent of the thread count.
    """
    params.require_canonical()
    if plane not in PLANES:
        raise ConfigError(f"unknown plane {plane!r}; expected one of {sorted(PLANES)}")
    name_u, name_v = PLANES[plane]
    spec_u = _axis_spec(params, name_u, axis_u)
    spec_v = _axis_spec(params, name_v, axis_v)
    if spec_u[2] < 2 or spec_v[2] < 2:
        raise ConfigError("grid axes need at least 2 samples")
    u = np.linspace(spec_u[0], spec_u[1], spec_u[2])
    v = np.linspace(spec_v[0], spec_v[1], spec_v[2])
    k_num = closed_form_norm_constant(params, order)

    uu = u[None, :]

    def eval_rows(v_chunk: np.ndarray) -> np.ndarray:
        coords = {"x": 0.0, "y": 0.0, "p_x": 0.0, "p_y": 0.0}
        coords[name_u] = uu
        coords[name_v] = v_chunk[:, None]
        return k_num * _closed_kernel(params, coords["x"], coords["y"], coords["p_x"], coords["p_y"])

    if threads <= 1 or spec_v[2] < 4:
        values = eval_rows(v)
    else:
        from concurrent.futures import ThreadPoolExecutor

        chunks = np.array_split(np.arange(spec_v[2]), min(threads, spec_v[2]))
        values = np.empty((spec_v[2], spec_u[2]))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for idx, block in zip(chunks, pool.map(lambda c: eval_rows(v[c]), chunks)):
                values[idx] = block

    return Grid2D(plane=plane, axis_u=spec_u, axis_v=spec_v, values=values)


def slice_extrema(grid: Grid2D, plateau_tol: float = 1e-12) -> list[Extremum]:
    """Interior strict local extrema by 8-neighbor comparison.

    Cells whose values tie within ``plateau_tol`` are treated as one plateau
    and collapsed to a single extremum at the plateau centroid.  Results are
    sorted by |value| descending.
    """
    nv, nu = grid.values.shape
    if nv < 5 or nu < 5:
        raise ConfigError("extrema detection needs a grid of at least 5x5")
    vals = grid.values
    u = grid.u_coords()
    v = grid.v_coords()

    center = vals[1:-1, 1:-1]
    neighbors = [
        vals[0:-2, 0:-2], vals[0:-2, 1:-1], vals[0:-2, 2:],
        vals[1:-1, 0:-2],                   vals[1:-1, 2:],
        vals[2:,   0:-2], vals[2:,   1:-1], vals[2:,   2:],
    ]
    ge = np.ones_like(center, dtype=bool)
    le = np.ones_like(center, dtype=bool)
    strict_gt = np.zeros_like(center, dtype=bool)
    strict_lt = np.zeros_like(center, dtype=bool)
    for nb in neighbors:
        diff = center - nb
        tie = np.abs(diff) <= plateau_tol
        ge &= (diff > 0) | tie
        le &= (diff < 0) | tie
        strict_gt |= diff > plateau_tol
        strict_lt |= diff < -plateau_tol
    # A candidate dominates (or ties with) all 8 neighbors and strictly beats
    # at least one, so flat regions do not register.
    max_mask = np.zeros_like(vals, dtype=bool)
    min_mask = np.zeros_like(vals, dtype=bool)
    max_mask[1:-1, 1:-1] = ge & strict_gt
    min_mask[1:-1, 1:-1] = le & strict_lt

    out: list[Extremum] = []
    for kind, mask in (("max", max_mask), ("min", min_mask)):
        seen = np.zeros_like(mask, dtype=bool)
        idx_v, idx_u = np.nonzero(mask)
        for i0, j0 in zip(idx_v, idx_u):
            if seen[i0, j0]:
                continue
            # Flood-fill the plateau: neighboring candidate cells whose
            # values agree within tolerance belong to one extremum.
            stack = [(i0, j0)]
            seen[i0, j0] = True
            cells = []
            while stack:
                i, j = stack.pop()
                cells.append((i, j))
                for di in (-1, 0, 1):
                    for dj in (-1, 0, 1):
                        ii, jj = i + di, j + dj
                        if (di or dj) and 0 <= ii < nv and 0 <= jj < nu:
                            if mask[ii, jj] and not seen[ii, jj] and abs(vals[ii, jj] - vals[i, j]) <= plateau_tol:
                                seen[ii, jj] = True
                                stack.append((ii, jj))
            ci = sum(c[0] for c in cells) / len(cells)
            cj = sum(c[1] for c in cells) / len(cells)
            value = float(np.mean([vals[c] for c in cells]))
            out.append(Extremum(kind=kind, u=float(np.interp(cj, np.arange(nu), u)), v=float(np.interp(ci, np.arange(nv), v)), value=value))
    out.sort(key=lambda e: abs(e.value), reverse=True)
    return out


def _persistence_peaks(vals: np.ndarray, ratio: float) -> list[tuple[int, float, float]]:
    """Topological persistence of the maxima of a 2D field.

    Sweep cells from highest to lowest, growing superlevel components with a
    union-find; a component born at a local peak dies when it merges into an
    older (higher-born) one, and its persistence is birth - merge level.
    Peaks whose persistence is below ``ratio * |birth|`` are sampling
    artifacts riding on a larger hill and are absorbed.

    Returns (flat cell index of birth, birth value, persistence).
    """
    flat = vals.ravel()
    nv, nu = vals.shape
    order = np.argsort(flat, kind="stable")[::-1]
    rank = np.empty(flat.size, dtype=np.int64)
    rank[order] = np.arange(flat.size)
    parent = np.full(flat.size, -1, dtype=np.int64)
    birth_cell = {}

    def find(c: int) -> int:
        root = c
        while parent[root] != root:
            root = parent[root]
        while parent[c] != root:
            parent[c], c = root, parent[c]
        return root

    survived: list[tuple[int, float, float]] = []
    for cell in order:
        i, j = divmod(int(cell), nu)
        older = set()
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                ii, jj = i + di, j + dj
                if 0 <= ii < nv and 0 <= jj < nu:
                    nb = ii * nu + jj
                    if rank[nb] < rank[cell]:
                        older.add(find(nb))
        if not older:
            parent[cell] = cell
            birth_cell[cell] = cell
            continue
        roots = sorted(older, key=lambda r: rank[r])
        main = roots[0]
        parent[cell] = main
        for other in roots[1:]:
            birth = flat[birth_cell[other]]
            pers = float(birth - flat[cell])
            if pers >= ratio * abs(birth):
                survived.append((birth_cell[other], float(birth), pers))
            parent[other] = main
    # The globally highest component never merges; it persists over the full range.
    top = int(order[0])
    survived.append((birth_cell[find(top)], float(flat[top]), float(flat[top] - flat[order[-1]])))
    return survived


def significant_extrema(
    grid: Grid2D, rel_floor: float = 1e-4, persistence_ratio: float = 1e-2
) -> list[Feature]:
    """Structural extrema of a slice, with sampling artifacts suppressed.

    The raw strict-neighbor census (``slice_extrema``) reports every grid
    wiggle, including aliasing duplicates along tilted ridges and roundoff
    ripple in far tails.  This summary keeps one feature per genuine hill or
    basin: peaks must survive a topological-persistence filter (persistence
    at least ``persistence_ratio`` of their own height) and reach
    ``rel_floor`` times the grid's maximum magnitude.  Sorted by |value|
    descending.
    """
    nv, nu = grid.values.shape
    if nv < 5 or nu < 5:
        raise ConfigError("extrema detection needs a grid of at least 5x5")
    scale = float(np.max(np.abs(grid.values)))
    if scale == 0.0:
        return []
    u = grid.u_coords()
    v = grid.v_coords()
    out: list[Feature] = []
    for kind, field in (("max", grid.values), ("min", -grid.values)):
        for cell, birth, pers in _persistence_peaks(field, persistence_ratio):
            value = float(grid.values.ravel()[cell])
            if abs(value) < rel_floor * scale or pers < persistence_ratio * abs(birth):
                continue
            i, j = divmod(int(cell), nu)
            if i in (0, nv - 1) or j in (0, nu - 1):
                continue  # interior features only, matching the raw census
            out.append(Feature(kind=kind, u=float(u[j]), v=float(v[i]), value=value, persistence=pers))
    out.sort(key=lambda f: abs(f.value), reverse=True)
    return out
