"""Polar-function computation.

polar(f)(p) = inf over supp f of e^{-<p,x>} / f(x) = exp(-S(p)) with
S(p) = sup_x (<p,x> + log f(x)).  Bumps get an exact linear-programming
treatment (dual vertex enumeration for small regular bumps, HiGHS otherwise);
radial variants reduce to a scalar concave maximization; positioned and
half-restricted functions reduce to their inner function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import optimize

from . import lcfunc
from .lcfunc import (
    BallIndicator,
    Bump,
    ExpNorm,
    Gaussian,
    HalfRestriction,
    Height,
    HeightPower,
    ImproperFunctionError,
    LogAffineMajorant,
    LogConcaveFunction,
    PolarHeightPower,
    Positioned,
    _majorant_coeffs,
    _polar_height_power_log,
    hbar,
)

POLAR_CLAMP = 1e-300
_SUBSET_ENUM_MAX_ANCHORS = 12


@dataclass(frozen=True)
class PolarAtom:
    """Polar of an interior majorant: a single support point with a mass."""

    location: tuple
    mass: float


def polar_of_ell(u) -> PolarAtom:
    """Closed-form polar atom of ell_u for an interior anchor u."""
    u = np.asarray(u, dtype=float)
    norm = float(np.linalg.norm(u))
    if norm >= 1.0:
        raise ValueError("polar atom requires |u| < 1")
    if norm == 0.0:
        return PolarAtom(location=tuple(np.zeros_like(u)), mass=1.0)
    h = float(hbar(u))
    location = u / h ** 2
    mass = (1.0 / h) * math.exp(-norm ** 2 / h ** 2)
    return PolarAtom(location=tuple(float(v) for v in location), mass=mass)


# ---------------------------------------------------------------------------
# bump LP
# ---------------------------------------------------------------------------


def _bump_log_sup_linprog(slopes, intercepts, boundary, P):
    """Per-point HiGHS solve of max <p,x> + t s.t. t + <s_i,x> <= b_i,
    <u_j,x> <= 1."""
    d = P.shape[1]
    rows = [np.append(s, 1.0) for s in slopes]
    rows += [np.append(u, 0.0) for u in boundary]
    A_ub = np.asarray(rows)
    b_ub = np.concatenate([intercepts, np.ones(len(boundary))])
    out = np.empty(P.shape[0])
    for k, p in enumerate(P):
        c = -np.append(p, 1.0)
        res = optimize.linprog(c, A_ub=A_ub, b_ub=b_ub,
                               bounds=[(None, None)] * (d + 1), method="highs")
        if res.status == 3:
            out[k] = math.inf
        elif res.status == 0:
            out[k] = -res.fun
        else:
            raise RuntimeError(f"bump LP failed with status {res.status}")
    return out


def bump_log_sup(bump: Bump, P) -> np.ndarray:
    """S(p) = sup_x (<p,x> + log bump(x)) for each row p of P (exact)."""
    P = np.asarray(P, dtype=float)
    if P.ndim == 1:
        P = P[None, :]
    interior = bump.interior_anchors()
    if not interior.shape[0]:
        raise ImproperFunctionError("bump has no interior anchor")
    slopes, intercepts = _majorant_coeffs(interior)
    boundary = bump.boundary_anchors()
    m, d = slopes.shape
    if boundary.shape[0] or m < d + 1 or m > _SUBSET_ENUM_MAX_ANCHORS:
        return _bump_log_sup_linprog(slopes, intercepts, boundary, P)

    # LP dual: S(p) = min { b . lam : lam >= 0, sum lam = 1, lam . s = p };
    # enumerate the (d+1)-subsets of atoms that can carry a basic solution.
    n = P.shape[0]
    rhs = np.vstack([P.T, np.ones(n)])  # (d+1, n)
    best = np.full(n, math.inf)
    for J in combinations(range(m), d + 1):
        M = np.vstack([slopes[list(J)].T, np.ones(d + 1)])
        det = np.linalg.det(M)
        if abs(det) < 1e-12:
            continue
        lam = np.linalg.solve(M, rhs)  # (d+1, n)
        feasible = np.all(lam >= -1e-11, axis=0)
        if not feasible.any():
            continue
        vals = intercepts[list(J)] @ lam
        best = np.where(feasible & (vals < best), vals, best)
    # points with no feasible basic solution found: settle them with HiGHS
    missing = np.isinf(best)
    if missing.any():
        hull_check = _bump_log_sup_linprog(slopes, intercepts, boundary,
                                           P[missing])
        best[missing] = hull_check
    return best


# ---------------------------------------------------------------------------
# radial reductions
# ---------------------------------------------------------------------------


def _radial_log_sup_numeric(f: LogConcaveFunction, c: float) -> float:
    """sup_{r >= 0} (c r + log phi(r)) for a nonincreasing radial profile."""

    def g(r):
        return c * r + float(f.radial_log_profile(np.array([r]))[0])

    R = f.support_radius()
    if math.isfinite(R):
        hi = R
    else:
        g0 = g(0.0)
        hi = 1.0
        while g(hi) > g0 - 20.0:
            hi *= 2.0
            if hi > 1e9:
                return math.inf
    res = optimize.minimize_scalar(lambda r: -g(r), bounds=(0.0, hi),
                                   method="bounded",
                                   options={"xatol": 1e-13})
    return max(-res.fun, g(0.0))


def _radial_log_sup(f: LogConcaveFunction, c: float) -> float:
    """S restricted to a radial function, as a function of c = |p|."""
    if isinstance(f, Gaussian):
        return c * c / 4.0
    if isinstance(f, Height):
        return -float(_polar_height_power_log(np.array([c]), 1.0)[0])
    if isinstance(f, HeightPower):
        return -float(_polar_height_power_log(np.array([c]), f.s)[0])
    if isinstance(f, ExpNorm):
        if f.p == 1.0:
            return 0.0 if c <= 1.0 else math.inf
        r = (c / f.p) ** (1.0 / (f.p - 1.0))
        return c * r - r ** f.p
    if isinstance(f, BallIndicator) and f.is_radial():
        return f.radius * c
    return _radial_log_sup_numeric(f, c)


# ---------------------------------------------------------------------------
# generic fallback
# ---------------------------------------------------------------------------


def _generic_log_sup(f: LogConcaveFunction, p: np.ndarray,
                     starts: int = 32, seed: int = 0) -> float:
    """Seeded multi-start ascent of <p,x> + log f(x)."""
    d = f.dim
    R = lcfunc.effective_radius(f)

    def neg(x):
        lf = float(f.log_evaluate_many(x[None, :])[0])
        if not math.isfinite(lf):
            return 1e12 + float(np.linalg.norm(x))
        return -(float(p @ x) + lf)

    rng = np.random.default_rng(seed)
    best = -math.inf
    X0 = [np.zeros(d)] + [rng.uniform(-R, R, size=d) for _ in range(starts - 1)]
    for x0 in X0:
        if neg(x0) > 1e11:
            continue
        res = optimize.minimize(neg, x0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-13,
                                         "maxiter": 4000})
        best = max(best, -res.fun)
    if not math.isfinite(best):
        raise ImproperFunctionError("function appears to vanish everywhere")
    return best


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def log_sup_transform(f: LogConcaveFunction, P) -> np.ndarray:
    """S(p) = sup over supp f of (<p,x> + log f(x)) for each row of P."""
    P = np.asarray(P, dtype=float)
    if P.ndim == 1:
        P = P[None, :]
    if isinstance(f, Bump):
        return bump_log_sup(f, P)
    if isinstance(f, LogAffineMajorant):
        if f.is_boundary:
            return np.full(P.shape[0], math.inf)
        slopes, intercepts = _majorant_coeffs(f._u()[None, :])
        hit = np.linalg.norm(P - slopes[0], axis=1) <= 1e-12
        return np.where(hit, intercepts[0], math.inf)
    if isinstance(f, Positioned):
        pos = f.position
        inner_S = log_sup_transform(f.inner, P @ pos.matrix())
        return P @ pos.a_vector() + math.log(pos.alpha) + inner_S
    if isinstance(f, HalfRestriction) and f.inner.is_radial():
        n = f.normal_vector()
        pn = P @ n
        perp = P - pn[:, None] * n[None, :]
        qa = np.linalg.norm(perp, axis=1)
        c_eff = np.where(pn >= 0.0, np.linalg.norm(P, axis=1), qa)
        return np.asarray([_radial_log_sup(f.inner, c) for c in c_eff])
    if isinstance(f, BallIndicator):
        return P @ f._center() + f.radius * np.linalg.norm(P, axis=1)
    if f.is_radial():
        return np.asarray([_radial_log_sup(f, float(np.linalg.norm(p)))
                           for p in P])
    return np.asarray([_generic_log_sup(f, p) for p in P])


def polar_eval_many(f: LogConcaveFunction, P) -> np.ndarray:
    """Polar values exp(-S(p)); values below POLAR_CLAMP are clamped to 0."""
    S = log_sup_transform(f, P)
    out = np.where(np.isfinite(S), np.exp(-np.minimum(S, 700.0)), 0.0)
    out[out < POLAR_CLAMP] = 0.0
    return out


def polar_eval(f: LogConcaveFunction, p) -> float:
    return float(polar_eval_many(f, np.asarray(p, dtype=float)[None, :])[0])


def improperness_probe(f: LogConcaveFunction, direction, t_values) -> list[float]:
    """Polar values along t * direction; non-decay signals an improper polar."""
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise ValueError("probe direction must be a unit vector")
    P = np.asarray([t * direction for t in t_values])
    return [float(v) for v in polar_eval_many(f, P)]
