"""Inclusion and inequality verifiers.

Domination certificates (pointwise g <= f over a ball), the John-type
inclusion checks, the sandwich construction with its analytic tail envelope,
and the Löwner counterexample suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import polar
from .lcfunc import (
    ExpNorm,
    HalfRestriction,
    Height,
    LogConcaveFunction,
    PolarHeightPower,
)
from .position import AffinePosition, apply_position, make_position

DOMINATION_PASS_TOL = 1e-8


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------


def ball_grid(d: int, n: int, radius: float = 1.0, seed: int = 0) -> np.ndarray:
    """About n points covering the ball of the given radius: a lattice in
    d <= 2, sphere-stratified seeded samples in d >= 3."""
    if d == 1:
        return np.linspace(-radius, radius, max(n, 3))[:, None]
    if d == 2:
        side = int(math.ceil(math.sqrt(n * 4.0 / math.pi)))
        axis = np.linspace(-radius, radius, side)
        X = np.array([[x, y] for x in axis for y in axis])
        return X[np.einsum("ij,ij->i", X, X) <= radius ** 2 + 1e-15]
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((n, d))
    V /= np.linalg.norm(V, axis=1)[:, None]
    radii = ((np.arange(n) + rng.random(n)) / n) ** (1.0 / d)
    return V * radii[:, None] * radius


def sphere_points(d: int, n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((n, d))
    return V / np.linalg.norm(V, axis=1)[:, None]


# ---------------------------------------------------------------------------
# domination certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DominationCertificate:
    max_log_violation: float
    witness: tuple
    points_checked: int
    refined: bool
    seed: int

    @property
    def passed(self) -> bool:
        return self.max_log_violation <= DOMINATION_PASS_TOL


def _log_gap_many(g: LogConcaveFunction, f: LogConcaveFunction,
                  X: np.ndarray) -> np.ndarray:
    """log g - log f where g > 0; -inf where g vanishes, +inf where g > 0
    but f = 0."""
    lg = g.log_evaluate_many(X)
    lf = f.log_evaluate_many(X)
    gap = np.full(X.shape[0], -np.inf)
    live = lg > -np.inf
    gap[live] = np.where(lf[live] > -np.inf, lg[live] - lf[live], np.inf)
    return gap


def check_domination(g: LogConcaveFunction, f: LogConcaveFunction,
                     radius: float, n_points: int = 4096, seed: int = 0,
                     refine: bool = True) -> DominationCertificate:
    """Lattice plus seeded multi-start ascent of log g - log f over the ball
    of the given radius intersected with supp g."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    d = g.dim
    X = ball_grid(d, n_points, radius, seed=seed)
    gap = _log_gap_many(g, f, X)
    order = np.argsort(gap)
    best = float(gap[order[-1]])
    witness = X[order[-1]]
    checked = X.shape[0]
    did_refine = False
    if refine and math.isfinite(best):
        did_refine = True

        def neg(x):
            v = _log_gap_many(g, f, x[None, :])[0]
            if v == np.inf:
                return -1e9
            if v == -np.inf:
                return 1e9
            if np.linalg.norm(x) > radius:
                return 1e9
            return -v

        for idx in order[-6:]:
            res = optimize.minimize(neg, X[idx], method="Nelder-Mead",
                                    options={"xatol": 1e-12, "fatol": 1e-14,
                                             "maxiter": 2000})
            checked += res.nfev
            if -res.fun > best:
                best = float(-res.fun)
                witness = res.x
    return DominationCertificate(
        max_log_violation=best, witness=tuple(float(v) for v in witness),
        points_checked=checked, refined=did_refine, seed=seed)


# ---------------------------------------------------------------------------
# John-type inclusion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JohnInclusionRecord:
    height_below: DominationCertificate
    polar_floor_min: float
    polar_floor_pass: bool
    corollary_min_gap: float  # polar(f)(p) - e^{-(d+1)} hbar((d+1) p)
    corollary_pass: bool

    @property
    def passed(self) -> bool:
        return self.height_below.passed and self.polar_floor_pass \
            and self.corollary_pass


def john_inclusion_check(f: LogConcaveFunction, grid_points: int = 1000,
                         seed: int = 0) -> JohnInclusionRecord:
    """For f in John position: hbar <= f, and polar(f) >= e^{-(d+1)} on the
    ball of radius 1/(d+1)."""
    d = f.dim
    cert = check_domination(Height(d), f, radius=1.0, seed=seed)
    P = ball_grid(d, grid_points, radius=1.0 / (d + 1), seed=seed)
    values = polar.polar_eval_many(f, P)
    floor = math.exp(-(d + 1))
    from .lcfunc import hbar
    corollary = values - floor * hbar((d + 1) * P)
    return JohnInclusionRecord(
        height_below=cert,
        polar_floor_min=float(values.min()),
        polar_floor_pass=bool(values.min() >= floor - 1e-9),
        corollary_min_gap=float(corollary.min()),
        corollary_pass=bool(corollary.min() >= -1e-9),
    )


# ---------------------------------------------------------------------------
# sandwich construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SandwichRecord:
    position: AffinePosition  # realizes f-tilde as a position of f
    left_floor: float
    right_scale: float
    right_decay_rate: float
    right_offset: float
    right_envelope: str
    r_star: float
    left_min: float
    left_pass: bool
    right_max_log_gap: float
    right_pass: bool
    tail_coefficient_ok: bool
    tail_polar_floor_min: float
    tail_pass: bool

    @property
    def passed(self) -> bool:
        return self.left_pass and self.right_pass and self.tail_pass


def sandwich_construct(f: LogConcaveFunction, grid_points: int = 4096,
                       seed: int = 0) -> SandwichRecord:
    """Build f_tilde(x) = sqrt(d+1) f(sqrt(d/(d+1)) x) and certify
    chi_ball <= f_tilde <= sqrt(d+1) e^{-|x|/(d+2) + (d+1)}.

    The right inequality is grid-checked up to R*, where the exponential
    envelope f(x) <= e^{d+1} e^{-|x|/(d+1)} (a consequence of the polar floor
    at p = x / ((d+1)|x|)) already sits strictly below the right-hand side.
    """
    d = f.dim
    shrink = math.sqrt(d / (d + 1.0))
    scale = math.sqrt(d + 1.0)
    pos = make_position(scale, np.eye(d) / shrink, np.zeros(d),
                        positive_definite=True)
    ftilde = apply_position(pos, f)

    c1 = shrink / (d + 1.0)
    c2 = 1.0 / (d + 2.0)
    tail_coefficient_ok = c1 > c2
    r_star = 1.0 / (c1 - c2)

    # left: chi_ball <= f_tilde on the closed ball, boundary included
    X = ball_grid(d, grid_points, radius=1.0, seed=seed)
    ring = sphere_points(d, 256, seed=seed + 1) * (1.0 - 1e-9)
    left_vals = ftilde.evaluate_many(np.vstack([X, ring]))
    left_min = float(left_vals.min())
    left_pass = left_min >= 1.0 - 1e-9

    # right: grid comparison against the envelope up to R*; a core grid keeps
    # the check meaningful when most of the wide ball misses where f lives
    Y = np.vstack([ball_grid(d, grid_points, radius=r_star, seed=seed + 2),
                   ball_grid(d, grid_points, radius=min(r_star, 4.0),
                             seed=seed + 4)])
    log_rhs = math.log(scale) - np.linalg.norm(Y, axis=1) / (d + 2.0) + (d + 1.0)
    log_ft = ftilde.log_evaluate_many(Y)
    gaps = log_ft - log_rhs
    right_max = float(np.max(gaps))
    right_pass = right_max <= 1e-9

    # tail: spot-check the polar floor feeding the envelope
    dirs = sphere_points(d, 64, seed=seed + 3)
    floor_vals = polar.polar_eval_many(f, dirs / (d + 1.0))
    tail_floor_min = float(floor_vals.min())
    tail_pass = tail_coefficient_ok and \
        tail_floor_min >= math.exp(-(d + 1)) - 1e-9

    envelope = f"sqrt({d + 1})*exp(-|x|/{d + 2}+{d + 1})"
    return SandwichRecord(
        position=pos,
        left_floor=1.0,
        right_scale=scale,
        right_decay_rate=c2,
        right_offset=float(d + 1),
        right_envelope=envelope,
        r_star=r_star,
        left_min=left_min,
        left_pass=left_pass,
        right_max_log_gap=right_max,
        right_pass=right_pass,
        tail_coefficient_ok=tail_coefficient_ok,
        tail_polar_floor_min=tail_floor_min,
        tail_pass=tail_pass,
    )


# ---------------------------------------------------------------------------
# Löwner counterexample suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LownerRecord:
    kind: str
    dim: int
    probe_t: tuple
    probe_values: tuple
    probe_pass: bool
    domination: DominationCertificate
    trials: int
    min_integral_ratio: float
    minimality_pass: bool
    tail_spot_pass: bool

    @property
    def passed(self) -> bool:
        return self.probe_pass and self.domination.passed \
            and self.minimality_pass and self.tail_spot_pass


def _lowner_base(kind: str, dim: int, p: float = 2.0, s: float = 1.0
                 ) -> LogConcaveFunction:
    if kind == "expnorm":
        return ExpNorm(dimension=dim, p=p)
    if kind == "polar_height_power":
        return PolarHeightPower(dimension=dim, s=s)
    raise ValueError(f"unknown Löwner kind {kind!r}")


def _project_to_feasible(L, Lplus, pos: AffinePosition, probe: np.ndarray
                         ) -> AffinePosition:
    """Scale alpha up so the positioned L dominates L_plus on the probe set
    (plus local refinement of the worst point)."""
    g = apply_position(pos, L)
    gap = _log_gap_many(Lplus, g, probe)
    worst = float(np.max(gap))
    idx = int(np.argmax(gap))

    def neg(x):
        v = _log_gap_many(Lplus, g, x[None, :])[0]
        return 1e9 if not math.isfinite(v) else -v

    res = optimize.minimize(neg, probe[idx], method="Nelder-Mead",
                            options={"xatol": 1e-10, "maxiter": 1000})
    worst = max(worst, float(-res.fun))
    bump_up = math.exp(max(0.0, worst) + 1e-12)
    return make_position(pos.alpha * bump_up, pos.matrix(), pos.a_vector(),
                         positive_definite=pos.positive_definite)


def lowner_counterexample(kind: str, dim: int, p: float = 2.0, s: float = 1.0,
                          trials: int = 200, seed: int = 0) -> LownerRecord:
    """The half-restriction counterexample: the polar of L_plus does not
    decay along -e_1, the identity position of L dominates L_plus, and seeded
    feasible perturbations never beat the integral of L."""
    L = _lowner_base(kind, dim, p=p, s=s)
    e1 = np.zeros(dim)
    e1[0] = 1.0
    Lplus = HalfRestriction(inner=L, normal=tuple(e1))

    t_values = (1.0, 2.0, 5.0, 10.0)
    probe_vals = polar.improperness_probe(Lplus, -e1, t_values)
    probe_pass = all(abs(v - 1.0) <= 1e-9 for v in probe_vals)

    dom = check_domination(Lplus, L, radius=12.0, seed=seed)

    base_integral = L.integral()
    probe = ball_grid(dim, 8192, radius=25.0, seed=seed + 7)
    rng = np.random.default_rng(seed)
    min_ratio = math.inf
    tail_dirs = sphere_points(dim, 64, seed=seed + 11)
    tail_dirs[:, 0] = np.abs(tail_dirs[:, 0])
    tail_dirs /= np.linalg.norm(tail_dirs, axis=1)[:, None]
    tail_ok = True
    for _ in range(trials):
        B = rng.standard_normal((dim, dim))
        S = B @ B.T
        S *= 0.3 / max(np.linalg.eigvalsh(S).max(), 1e-12)
        delta = 0.05 + 0.2 * rng.random()
        A = (1.0 + delta) * (np.eye(dim) + S)
        a = 0.3 * rng.uniform(-1.0, 1.0, size=dim)
        alpha0 = 1.0 + 0.5 * rng.random()
        pos = make_position(alpha0, A, a, positive_definite=True)
        pos = _project_to_feasible(L, Lplus, pos, probe)
        ratio = pos.alpha * abs(pos.det())
        min_ratio = min(min_ratio, ratio)
        # limit-argument spot check at t = 1e3 along 8 directions
        g = apply_position(pos, L)
        T = 1e3 * tail_dirs[:8]
        tgap = _log_gap_many(Lplus, g, T)
        if np.max(tgap[np.isfinite(tgap)]) > 1e-6 * 1e3:
            tail_ok = False
    minimality_pass = min_ratio >= 1.0 - 1e-6

    return LownerRecord(
        kind=kind, dim=dim, probe_t=t_values,
        probe_values=tuple(float(v) for v in probe_vals),
        probe_pass=probe_pass, domination=dom, trials=trials,
        min_integral_ratio=float(min_ratio),
        minimality_pass=minimality_pass, tail_spot_pass=tail_ok)
