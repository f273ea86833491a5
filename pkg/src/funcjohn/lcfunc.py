"""Representations and evaluation of log-concave functions.

The library works with a small family of closed-form log-concave functions:
the ball height function, its powers, ball indicators, Gaussians, exp-of-norm
densities, log-affine majorants touching the height function, bumps (pointwise
minima of majorants), half-space restrictions, and affinely positioned copies
of any of the above.

All values are immutable after construction and evaluation is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special
from scipy.stats import qmc

MAX_DIM = 8
BOUNDARY_SNAP = 1e-12

# log values below this are treated as "function is zero" in numeric probes
LOG_ZERO = -746.0


class DimensionMismatchError(ValueError):
    pass


class ImproperFunctionError(ValueError):
    pass


class UnboundedFunctionError(ValueError):
    pass


class DivergentIntegralError(ValueError):
    pass


def _check_dim(d: int) -> int:
    d = int(d)
    if not 1 <= d <= MAX_DIM:
        raise ValueError(f"dimension must be in [1, {MAX_DIM}], got {d}")
    return d


def _as_points(X, dim: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != dim:
        raise DimensionMismatchError(
            f"expected points of dimension {dim}, got array of shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("points must have finite coordinates")
    return X


def unit_ball_volume(d: int) -> float:
    """Volume of the Euclidean unit ball in dimension d."""
    return math.pi ** (d / 2.0) / special.gamma(d / 2.0 + 1.0)


def hbar(x) -> np.ndarray | float:
    """Height of the unit (d+1)-ball over x: sqrt(1 - |x|^2), zero outside."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return math.sqrt(max(0.0, 1.0 - float(x @ x)))
    sq = 1.0 - np.einsum("ij,ij->i", x, x)
    return np.sqrt(np.maximum(sq, 0.0))


def zeta(t: float) -> float:
    """t^{-t} on [0, 1], with the continuous value 1 at t = 0."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"zeta argument must lie in [0, 1], got {t}")
    if t == 0.0:
        return 1.0
    return t ** (-t)


@dataclass(frozen=True)
class LogConcaveFunction:
    """Base class; subclasses implement log_evaluate_many."""

    def __post_init__(self):
        _check_dim(self.dim)

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def log_evaluate_many(self, X: np.ndarray) -> np.ndarray:
        """Log of the function at rows of X; -inf where the value is 0,
        +inf only on the hard branch of a boundary majorant."""
        raise NotImplementedError

    def evaluate_many(self, X) -> np.ndarray:
        X = _as_points(X, self.dim)
        logs = self.log_evaluate_many(X)
        out = np.empty_like(logs)
        finite = np.isfinite(logs)
        out[finite] = np.exp(logs[finite])
        out[~finite] = np.where(logs[~finite] > 0, np.inf, 0.0)
        return out

    def evaluate(self, x) -> float:
        return float(self.evaluate_many(np.asarray(x, dtype=float)[None, :]
                                        if np.ndim(x) == 1 else x)[0])

    def log_evaluate(self, x) -> float:
        X = _as_points(x, self.dim)
        return float(self.log_evaluate_many(X)[0])

    # --- analytic structure hooks -------------------------------------

    def is_radial(self) -> bool:
        """True when the function depends on |x| only."""
        return False

    def radial_log_profile(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def support_radius(self) -> float:
        """Radius R with f = 0 outside the R-ball (inf when unbounded)."""
        return math.inf

    def is_bounded(self) -> bool:
        return True

    def sup_norm(self) -> float:
        raise NotImplementedError

    def integral(self) -> float:
        value, _ = self.integral_with_error()
        return value

    def integral_with_error(self) -> tuple[float, float]:
        return _numeric_integral(self)


def eval(f: LogConcaveFunction, x) -> float:  # noqa: A001
    """Evaluate f at a single point (extended nonnegative real)."""
    return f.evaluate(x)


def sup_norm(f: LogConcaveFunction) -> float:
    return f.sup_norm()


def integral(f: LogConcaveFunction) -> float:
    return f.integral()


# ---------------------------------------------------------------------------
# concrete variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Height(LogConcaveFunction):
    """sqrt(1 - |x|^2) on the unit ball, 0 outside."""

    dimension: int = 1

    @property
    def dim(self) -> int:
        return self.dimension

    def log_evaluate_many(self, X):
        sq = 1.0 - np.einsum("ij,ij->i", X, X)
        with np.errstate(divide="ignore"):
            return np.where(sq > 0.0, 0.5 * np.log(np.maximum(sq, 1e-320)), -np.inf)

    def is_radial(self):
        return True

    def radial_log_profile(self, r):
        r = np.asarray(r, dtype=float)
        sq = 1.0 - r * r
        with np.errstate(divide="ignore"):
            return np.where(sq > 0.0, 0.5 * np.log(np.maximum(sq, 1e-320)), -np.inf)

    def support_radius(self):
        return 1.0

    def sup_norm(self):
        return 1.0

    def integral_with_error(self):
        return 0.5 * unit_ball_volume(self.dimension + 1), 0.0


@dataclass(frozen=True)
class HeightPower(LogConcaveFunction):
    """(1 - |x|^2)^{s/2} on the unit ball."""

    dimension: int
    s: float

    def __post_init__(self):
        super().__post_init__()
        if not self.s > 0:
            raise ValueError("height power exponent must be positive")

    @property
    def dim(self) -> int:
        return self.dimension

    def log_evaluate_many(self, X):
        sq = 1.0 - np.einsum("ij,ij->i", X, X)
        with np.errstate(divide="ignore"):
            return np.where(sq > 0.0,
                            0.5 * self.s * np.log(np.maximum(sq, 1e-320)), -np.inf)

    def is_radial(self):
        return True

    def radial_log_profile(self, r):
        r = np.asarray(r, dtype=float)
        sq = 1.0 - r * r
        with np.errstate(divide="ignore"):
            return np.where(sq > 0.0,
                            0.5 * self.s * np.log(np.maximum(sq, 1e-320)), -np.inf)

    def support_radius(self):
        return 1.0

    def sup_norm(self):
        return 1.0

    def integral_with_error(self):
        d, s = self.dimension, self.s
        value = unit_ball_volume(d) * (d / 2.0) * special.beta(d / 2.0, s / 2.0 + 1.0)
        return value, 0.0


@dataclass(frozen=True)
class BallIndicator(LogConcaveFunction):
    """Indicator of the closed ball of given radius and center."""

    dimension: int
    radius: float = 1.0
    center: tuple = None

    def __post_init__(self):
        super().__post_init__()
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        c = np.zeros(self.dimension) if self.center is None \
            else np.asarray(self.center, dtype=float)
        if c.shape != (self.dimension,):
            raise DimensionMismatchError("center dimension mismatch")
        object.__setattr__(self, "center", tuple(float(v) for v in c))

    @property
    def dim(self) -> int:
        return self.dimension

    def _center(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    def log_evaluate_many(self, X):
        D = X - self._center()
        inside = np.einsum("ij,ij->i", D, D) <= self.radius ** 2
        return np.where(inside, 0.0, -np.inf)

    def is_radial(self):
        return not np.any(self._center())

    def radial_log_profile(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= self.radius, 0.0, -np.inf)

    def support_radius(self):
        return self.radius + float(np.linalg.norm(self._center()))

    def sup_norm(self):
        return 1.0

    def integral_with_error(self):
        return unit_ball_volume(self.dimension) * self.radius ** self.dimension, 0.0


@dataclass(frozen=True)
class Gaussian(LogConcaveFunction):
    """exp(-|x|^2)."""

    dimension: int = 1

    @property
    def dim(self) -> int:
        return self.dimension

    def log_evaluate_many(self, X):
        return -np.einsum("ij,ij->i", X, X)

    def is_radial(self):
        return True

    def radial_log_profile(self, r):
        r = np.asarray(r, dtype=float)
        return -r * r

    def sup_norm(self):
        return 1.0

    def integral_with_error(self):
        return math.pi ** (self.dimension / 2.0), 0.0


@dataclass(frozen=True)
class ExpNorm(LogConcaveFunction):
    """exp(-|x|^p) with p >= 1."""

    dimension: int
    p: float

    def __post_init__(self):
        super().__post_init__()
        if not self.p >= 1:
            raise ValueError("exp-norm exponent must be >= 1")

    @property
    def dim(self) -> int:
        return self.dimension

    def log_evaluate_many(self, X):
        return -np.linalg.norm(X, axis=1) ** self.p

    def is_radial(self):
        return True

    def radial_log_profile(self, r):
        r = np.asarray(r, dtype=float)
        return -r ** self.p

    def sup_norm(self):
        return 1.0

    def integral_with_error(self):
        d = self.dimension
        return unit_ball_volume(d) * special.gamma(d / self.p + 1.0), 0.0


def _polar_height_power_log(c: np.ndarray, s: float) -> np.ndarray:
    """log of the polar of hbar^s at radius c: -(c r* + (s/2) log(1 - r*^2)),
    where r* maximizes c r + (s/2) log(1 - r^2) over [0, 1)."""
    c = np.asarray(c, dtype=float)
    out = np.zeros_like(c)
    pos = c > 0
    cp = c[pos]
    r = (-s + np.sqrt(s * s + 4.0 * cp * cp)) / (2.0 * cp)
    out[pos] = -(cp * r + 0.5 * s * np.log1p(-r * r))
    return out


@dataclass(frozen=True)
class PolarHeightPower(LogConcaveFunction):
    """The polar function of hbar^s, evaluated pointwise.

    The inner maximizer of c r + (s/2) log(1 - r^2) solves a quadratic, so the
    value is available in closed form; the function is radial, log-concave,
    equal to 1 at the origin, and decays like e^{-|x|} times a power.
    """

    dimension: int
    s: float

    def __post_init__(self):
        super().__post_init__()
        if not self.s > 0:
            raise ValueError("exponent must be positive")

    @property
    def dim(self) -> int:
        return self.dimension

    def log_evaluate_many(self, X):
        return _polar_height_power_log(np.linalg.norm(X, axis=1), self.s)

    def is_radial(self):
        return True

    def radial_log_profile(self, r):
        return _polar_height_power_log(np.asarray(r, dtype=float), self.s)

    def sup_norm(self):
        return 1.0


# ---------------------------------------------------------------------------
# log-affine majorants and bumps
# ---------------------------------------------------------------------------


def _snap_anchor(u: np.ndarray) -> tuple[np.ndarray, bool]:
    """Snap anchors within BOUNDARY_SNAP of the unit sphere onto it."""
    n = float(np.linalg.norm(u))
    if n > 1.0 + BOUNDARY_SNAP:
        raise ValueError(f"anchor norm {n} exceeds 1")
    if abs(n - 1.0) <= BOUNDARY_SNAP:
        return u / n, True
    return u, False


def _majorant_coeffs(anchors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Slope vectors s_i = u_i / hbar^2(u_i) and intercepts
    b_i = log hbar(u_i) + |u_i|^2 / hbar^2(u_i), so that
    log ell_{u_i}(x) = b_i - <s_i, x> for interior anchors."""
    h2 = 1.0 - np.einsum("ij,ij->i", anchors, anchors)
    slopes = anchors / h2[:, None]
    intercepts = 0.5 * np.log(h2) + np.einsum("ij,ij->i", anchors, anchors) / h2
    return slopes, intercepts


@dataclass(frozen=True)
class LogAffineMajorant(LogConcaveFunction):
    """ell_u: the log-affine function touching hbar at u (interior case),
    or the half-space 0/+inf indicator when |u| = 1."""

    anchor: tuple

    def __post_init__(self):
        u = np.asarray(self.anchor, dtype=float)
        if u.ndim != 1:
            raise ValueError("anchor must be a vector")
        u, boundary = _snap_anchor(u)
        object.__setattr__(self, "anchor", tuple(float(v) for v in u))
        object.__setattr__(self, "_boundary", boundary)
        super().__post_init__()

    @property
    def dim(self) -> int:
        return len(self.anchor)

    @property
    def is_boundary(self) -> bool:
        return self._boundary

    def _u(self) -> np.ndarray:
        return np.asarray(self.anchor, dtype=float)

    @property
    def height(self) -> float:
        if self._boundary:
            return 0.0
        return float(hbar(self._u()))

    @property
    def slope(self) -> np.ndarray:
        if self._boundary:
            raise ValueError("boundary majorant has no finite slope")
        u = self._u()
        return u / (self.height ** 2)

    def log_evaluate_many(self, X):
        u = self._u()
        if self._boundary:
            return np.where(X @ u >= 1.0, -np.inf, np.inf)
        h2 = self.height ** 2
        return 0.5 * math.log(h2) - (X @ u - float(u @ u)) / h2

    def sup_norm(self):
        if self._boundary:
            raise UnboundedFunctionError("boundary majorant takes the value +inf")
        if np.any(self._u()):
            raise UnboundedFunctionError("interior majorant with u != 0 is unbounded")
        return 1.0


def ell_majorant(u) -> LogAffineMajorant:
    """The majorant ell_u; requires |u| <= 1."""
    return LogAffineMajorant(anchor=tuple(np.asarray(u, dtype=float)))


@dataclass(frozen=True)
class Bump(LogConcaveFunction):
    """min_i ell_{u_i} over a finite anchor set with |u_i| <= 1."""

    anchors: tuple  # tuple of coordinate tuples

    def __post_init__(self):
        A = np.asarray(self.anchors, dtype=float)
        if A.ndim != 2 or A.shape[0] < 1:
            raise ValueError("bump needs at least one anchor vector")
        snapped = []
        boundary = []
        for row in A:
            u, b = _snap_anchor(row)
            snapped.append(u)
            boundary.append(b)
        A = np.asarray(snapped)
        boundary = np.asarray(boundary, dtype=bool)
        object.__setattr__(self, "anchors",
                           tuple(tuple(float(v) for v in row) for row in A))
        object.__setattr__(self, "_boundary_mask", boundary)
        super().__post_init__()

    @property
    def dim(self) -> int:
        return len(self.anchors[0])

    def anchor_array(self) -> np.ndarray:
        return np.asarray(self.anchors, dtype=float)

    @property
    def boundary_mask(self) -> np.ndarray:
        return self._boundary_mask

    @property
    def is_regular(self) -> bool:
        return not bool(self._boundary_mask.any())

    def interior_anchors(self) -> np.ndarray:
        return self.anchor_array()[~self._boundary_mask]

    def boundary_anchors(self) -> np.ndarray:
        return self.anchor_array()[self._boundary_mask]

    def log_evaluate_many(self, X):
        n = X.shape[0]
        logs = np.full(n, np.inf)
        interior = self.interior_anchors()
        if interior.shape[0]:
            slopes, intercepts = _majorant_coeffs(interior)
            logs = np.min(intercepts[None, :] - X @ slopes.T, axis=1)
        for u in self.boundary_anchors():
            logs = np.where(X @ u >= 1.0, -np.inf, logs)
        return logs

    def sup_norm(self):
        if not self.interior_anchors().shape[0]:
            raise ImproperFunctionError(
                "bump with only boundary anchors takes no finite positive value")
        from . import polar  # deferred: polar builds on lcfunc
        return math.exp(polar.bump_log_sup(self, np.zeros((1, self.dim)))[0])


# ---------------------------------------------------------------------------
# wrappers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfRestriction(LogConcaveFunction):
    """inner(x) on the half-space <x, normal> >= 0, zero on the other side."""

    inner: LogConcaveFunction
    normal: tuple

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if n.shape != (self.inner.dim,):
            raise DimensionMismatchError("normal dimension mismatch")
        nn = float(np.linalg.norm(n))
        if abs(nn - 1.0) > 1e-9:
            raise ValueError("half-restriction normal must be a unit vector")
        object.__setattr__(self, "normal", tuple(float(v) for v in n / nn))
        super().__post_init__()

    @property
    def dim(self) -> int:
        return self.inner.dim

    def normal_vector(self) -> np.ndarray:
        return np.asarray(self.normal, dtype=float)

    def log_evaluate_many(self, X):
        logs = self.inner.log_evaluate_many(X)
        return np.where(X @ self.normal_vector() >= 0.0, logs, -np.inf)

    def support_radius(self):
        return self.inner.support_radius()

    def sup_norm(self):
        if self.inner.is_radial():
            # radial profiles shipped here are nonincreasing, max at 0
            return math.exp(float(self.inner.radial_log_profile(np.array([0.0]))[0]))
        return self.inner.sup_norm()

    def integral_with_error(self):
        if self.inner.is_radial():
            v, e = self.inner.integral_with_error()
            return v / 2.0, e / 2.0
        return _numeric_integral(self)


@dataclass(frozen=True)
class Positioned(LogConcaveFunction):
    """alpha * inner(A^{-1}(x - a)) for an affine position (alpha, A, a)."""

    inner: LogConcaveFunction
    position: "AffinePosition"  # noqa: F821 - defined in funcjohn.position

    def __post_init__(self):
        if self.position.dim != self.inner.dim:
            raise DimensionMismatchError("position dimension mismatch")
        super().__post_init__()

    @property
    def dim(self) -> int:
        return self.inner.dim

    def log_evaluate_many(self, X):
        pos = self.position
        Y = (X - pos.a_vector()) @ pos.inverse_matrix().T
        return math.log(pos.alpha) + self.inner.log_evaluate_many(Y)

    def support_radius(self):
        r = self.inner.support_radius()
        if not math.isfinite(r):
            return math.inf
        pos = self.position
        return float(np.linalg.norm(pos.a_vector())
                     + np.linalg.norm(pos.matrix(), 2) * r)

    def sup_norm(self):
        return self.position.alpha * self.inner.sup_norm()

    def integral_with_error(self):
        v, e = self.inner.integral_with_error()
        scale = self.position.alpha * abs(self.position.det())
        return scale * v, scale * e


# ---------------------------------------------------------------------------
# numeric integration
# ---------------------------------------------------------------------------


def effective_radius(f: LogConcaveFunction, log_cut: float = -46.0,
                     seed: int = 0) -> float:
    """Radius beyond which f is negligible relative to its peak.

    Probes decay along coordinate axes and seeded random rays; raises
    DivergentIntegralError when no decay is detected by radius 1e6.
    """
    R = f.support_radius()
    if math.isfinite(R):
        return R
    d = f.dim
    rng = np.random.default_rng(seed)
    dirs = [np.eye(d)[i] * s for i in range(d) for s in (1.0, -1.0)]
    for _ in range(2 * d + 4):
        v = rng.standard_normal(d)
        dirs.append(v / np.linalg.norm(v))
    log_peak = float(np.max(f.log_evaluate_many(np.zeros((1, d)))))
    radius = 1.0
    while radius <= 1e6:
        P = np.asarray([radius * v for v in dirs])
        logs = f.log_evaluate_many(P)
        if np.all(logs <= log_peak + log_cut):
            return radius
        radius *= 2.0
    raise DivergentIntegralError("no decay detected along probe rays")


def _numeric_integral(f: LogConcaveFunction) -> tuple[float, float]:
    d = f.dim
    R = effective_radius(f)
    if f.is_radial():
        # d * V_d * int r^{d-1} phi(r) dr
        def radial(r):
            return r ** (d - 1) * math.exp(float(f.radial_log_profile(
                np.array([r]))[0]))

        val, err = integrate.quad(radial, 0.0, R, limit=200)
        c = d * unit_ball_volume(d)
        return c * val, c * err
    if d == 1:
        val, err = integrate.quad(lambda t: f.evaluate([t]), -R, R, limit=200)
        return val, err
    if d == 2:
        val, err = integrate.dblquad(
            lambda y, x: f.evaluate([x, y]), -R, R, -R, R,
            epsabs=1e-10, epsrel=1e-10)
        return val, err
    # d >= 3: seeded quasi-Monte Carlo over the bounding box
    m = 20  # 2^20 ~ 1e6 points
    sampler = qmc.Sobol(d=d, scramble=True, seed=12345)
    U = sampler.random_base2(m)
    X = (2.0 * U - 1.0) * R
    vals = f.evaluate_many(X)
    vol = (2.0 * R) ** d
    blocks = vals.reshape(16, -1).mean(axis=1) * vol
    return float(vals.mean() * vol), float(blocks.std(ddof=1) / 4.0)
