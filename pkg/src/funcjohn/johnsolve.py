"""Numerical solution of the functional John problem.

solve_john maximizes log(alpha) + log det A over positive-definite positions
g(x) = alpha * w(A^{-1}(x - a)) subject to g <= f.  The scale is eliminated:
for fixed (A, a) the best alpha is exp(m) with
    m(A, a) = inf over supp w of (log f(A y + a) - log w(y)),
and m + log det A is jointly concave, so a soft-min relaxation of m over a
finite constraint sample is maximized by quasi-Newton steps in
(log-Cholesky(A), a) at a decreasing temperature, with the most violated
constraint points located by ascent and exchanged into the sample.  The
fixed-height problem maximizes log det A subject to m >= log(xi / ||w||_inf),
solved through bisection on the multiplier of m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .decomp import InfeasibleWeightsError, weights_from_points
from .lcfunc import (
    BallIndicator,
    Bump,
    ExpNorm,
    Gaussian,
    Height,
    HeightPower,
    LogConcaveFunction,
    PolarHeightPower,
    Positioned,
    _majorant_coeffs,
    hbar,
)
from .position import (
    AffinePosition,
    chol_param_size,
    chol_params_from_pd,
    make_position,
    pd_from_chol_params,
)
from .verify import ball_grid, sphere_points

_INIT_GRID = {1: 201, 2: 421, 3: 800}
_SEP_GRID = {1: 2001, 2: 4096, 3: 8192}
_CERT_GRID = {1: 10_001, 2: 250_000, 3: 131_072}
_TAU_SCHEDULE = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7)
_SUPPORT_EPS = 1e-4  # smooth extension width below bounded supports
_BOUNDARY_WALL = 1e6
_FINAL_SHRINK = 1.0 - 1e-12  # keeps supp g strictly inside supp f


class InfeasibleProblemError(RuntimeError):
    pass


class NoContactsError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    seed: int = 0
    restarts: int = 16
    grid_density: int = 0  # 0 -> per-dimension default
    constraint_tol: float = 1e-8
    step_tol: float = 1e-10
    max_outer_iterations: int = 200

    def __post_init__(self):
        if self.restarts < 1 or self.constraint_tol <= 0 or self.step_tol <= 0 \
                or self.max_outer_iterations < 1 or self.grid_density < 0:
            raise ValueError("invalid solver options")


@dataclass(frozen=True)
class SolveReport:
    position: AffinePosition
    objective: float  # log alpha + log det A
    feasible: bool
    contacts: tuple = ()
    recovered_weights: tuple | None = None
    diagnostics: dict = field(default_factory=dict)
    positive_definite_restricted: bool = True


# ---------------------------------------------------------------------------
# values and gradients of log f (with smooth extension below bounded supports)
# ---------------------------------------------------------------------------


def _height_like(X, s):
    sq = 1.0 - np.einsum("ij,ij->i", X, X)
    inside = sq >= _SUPPORT_EPS
    sq_safe = np.maximum(sq, _SUPPORT_EPS)
    vals = 0.5 * s * np.log(sq_safe)
    grads = (-s / sq_safe)[:, None] * X
    # linear continuation below the extension threshold keeps the pull-back
    # gradient alive for iterates that step outside the support
    vals = np.where(inside, vals,
                    0.5 * s * math.log(_SUPPORT_EPS)
                    + 0.5 * s * (sq - _SUPPORT_EPS) / _SUPPORT_EPS)
    return vals, grads


def target_log_grad(f: LogConcaveFunction, X: np.ndarray, tau: float = 0.0
                    ) -> tuple[np.ndarray, np.ndarray]:
    """(log f, grad log f) rows for the solver's smooth target.

    tau > 0 smooths a bump's min over majorants with a soft-min at that
    temperature (a lower bound on the bump, so the relaxation stays
    conservative); quasi-Newton steps need this because the hard min has
    gradient ridges."""
    if isinstance(f, Bump):
        interior = f.interior_anchors()
        slopes, intercepts = _majorant_coeffs(interior)
        vals_all = intercepts[None, :] - X @ slopes.T
        for u in f.boundary_anchors():
            wall = _BOUNDARY_WALL * (1.0 - X @ u)
            vals_all = np.column_stack([vals_all, wall])
            slopes = np.vstack([slopes, _BOUNDARY_WALL * u])
        if tau > 0.0:
            vmin = vals_all.min(axis=1, keepdims=True)
            e = np.exp(-(vals_all - vmin) / tau)
            Z = e.sum(axis=1)
            vals = vmin[:, 0] - tau * np.log(Z)
            grads = -(e / Z[:, None]) @ slopes
        else:
            idx = np.argmin(vals_all, axis=1)
            vals = vals_all[np.arange(X.shape[0]), idx]
            grads = -slopes[idx]
        return vals, grads
    if isinstance(f, Height):
        return _height_like(X, 1.0)
    if isinstance(f, HeightPower):
        return _height_like(X, f.s)
    if isinstance(f, Gaussian):
        return -np.einsum("ij,ij->i", X, X), -2.0 * X
    if isinstance(f, ExpNorm):
        r = np.maximum(np.linalg.norm(X, axis=1), 1e-300)
        return -r ** f.p, (-f.p * r ** (f.p - 2.0))[:, None] * X
    if isinstance(f, PolarHeightPower):
        r = np.maximum(np.linalg.norm(X, axis=1), 1e-300)
        vals = f.radial_log_profile(r)
        s = f.s
        # envelope theorem: the derivative in r is -r*(r), the inner maximizer
        rstar = (-s + np.sqrt(s * s + 4.0 * r * r)) / (2.0 * r)
        return vals, (-rstar / r)[:, None] * X
    if isinstance(f, BallIndicator):
        c = f._center()
        D = X - c
        sq = f.radius ** 2 - np.einsum("ij,ij->i", D, D)
        inside = sq >= 0.0
        vals = np.where(inside, 0.0, sq / _SUPPORT_EPS)
        grads = np.where(inside[:, None], 0.0, (2.0 / _SUPPORT_EPS) * (-D))
        return vals, grads
    if isinstance(f, Positioned):
        pos = f.position
        inv = pos.inverse_matrix()
        Y = (X - pos.a_vector()) @ inv.T
        vals, grads = target_log_grad(f.inner, Y, tau)
        return vals + math.log(pos.alpha), grads @ inv
    # numeric fallback
    vals = f.log_evaluate_many(X)
    grads = np.zeros_like(X)
    h = 1e-6
    for j in range(X.shape[1]):
        E = np.zeros(X.shape[1])
        E[j] = h
        grads[:, j] = (f.log_evaluate_many(X + E) - f.log_evaluate_many(X - E)) \
            / (2.0 * h)
    return vals, grads


def _validate_w(w: LogConcaveFunction):
    if not (math.isfinite(w.support_radius()) and w.is_radial()):
        raise ValueError(
            "w must be a radial function of bounded support "
            "(height, height power, or centered ball indicator)")


# ---------------------------------------------------------------------------
# the constraint-exchange engine
# ---------------------------------------------------------------------------


class _Engine:
    def __init__(self, f, w, opts: SolverOptions):
        _validate_w(w)
        self.f, self.w, self.opts = f, w, opts
        self.d = f.dim
        if w.dim != self.d:
            raise ValueError("f and w dimensions differ")
        self.K = chol_param_size(self.d)
        self.wrad = w.support_radius()
        n0 = opts.grid_density ** self.d if opts.grid_density else _INIT_GRID[
            min(self.d, 3)]
        core = ball_grid(self.d, n0, radius=0.999 * self.wrad, seed=opts.seed)
        # near-boundary rings pin down the support constraint early
        dirs = sphere_points(self.d, max(2 * self.d, 16), seed=opts.seed + 3)
        rings = np.vstack([r * self.wrad * dirs
                           for r in (0.99, 0.999, 0.9999, 0.99999)])
        self.Y = np.vstack([core, rings])
        self.logw = w.log_evaluate_many(self.Y)
        # the violation surface often rides a narrow radial ridge just inside
        # the support boundary, so the separation grid carries dense shells
        if self.d == 1:
            shell_dirs = np.array([[1.0], [-1.0]])
        else:
            shell_dirs = sphere_points(
                self.d, {2: 256, 3: 512}[min(self.d, 3)], seed=opts.seed + 5)
        shells = np.vstack([r * self.wrad * shell_dirs for r in
                            (0.95, 0.98, 0.99, 0.995, 0.998,
                             0.999, 0.9995, 0.9999)])
        self.sep_grid = np.vstack([
            ball_grid(self.d, _SEP_GRID[min(self.d, 3)],
                      radius=0.9999 * self.wrad, seed=opts.seed + 1),
            shells])
        self.logw_sep = w.log_evaluate_many(self.sep_grid)
        self._rng = np.random.default_rng(opts.seed + 29)

    # --- packing ------------------------------------------------------

    def unpack(self, theta):
        # clamp the parametrization so wild line-search probe steps cannot
        # overflow; the objective at the clamp is astronomical anyway, so
        # such probes are always rejected
        chol = np.clip(theta[:self.K], -50.0, 50.0)
        a = np.clip(theta[self.K:], -1e6, 1e6)
        A = pd_from_chol_params(chol, self.d)
        return chol, A, a

    def pack(self, A, a):
        return np.concatenate([chol_params_from_pd(A), a])

    def _chol_factors(self, chol):
        d = self.d
        L = np.zeros((d, d))
        idx = 0
        for i in range(d):
            for j in range(i + 1):
                L[i, j] = math.exp(chol[idx]) if i == j else chol[idx]
                idx += 1
        dmats = []
        for i in range(d):
            for j in range(i + 1):
                dL = np.zeros((d, d))
                dL[i, j] = L[i, i] if i == j else 1.0
                dmats.append(dL)
        return L, dmats

    # --- objective --------------------------------------------------------

    def fused(self, theta, lam, tau):
        """Value and gradient of -(log det A + lam * softmin_tau r)."""
        chol, A, a = self.unpack(theta)
        L, dmats = self._chol_factors(chol)
        fvals, fgrads = target_log_grad(self.f, self.Y @ A.T + a, tau)
        r = fvals - self.logw
        rmin = float(r.min())
        e = np.exp(-(r - rmin) / tau)
        Z = float(e.sum())
        m = rmin - tau * math.log(Z)
        p = e / Z
        logdet = 2.0 * sum(chol[i * (i + 1) // 2 + i] for i in range(self.d))
        val = -(logdet + lam * m)

        grad = np.zeros(theta.shape[0])
        idx = 0
        for i in range(self.d):
            idx += i
            grad[idx] = -2.0
            idx += 1
        G = fgrads * p[:, None]     # softmax-weighted gradients of r
        for k, dL in enumerate(dmats):
            dA = dL @ L.T + L @ dL.T
            grad[k] += -lam * float(np.einsum("ij,ij->", G, self.Y @ dA.T))
        grad[self.K:] += -lam * G.sum(axis=0)
        return val, grad

    def grid_min(self, theta):
        """min over the sample of log f(A y + a) - log w(y), smooth target."""
        _, A, a = self.unpack(theta)
        fvals, _ = target_log_grad(self.f, self.Y @ A.T + a)
        return float(np.min(fvals - self.logw))

    # --- separation ------------------------------------------------------

    def _sup_over(self, theta, grid, logw, n_refine):
        """sup over the ball of log w(y) - log f(A y + a), grid plus ascent."""
        _, A, a = self.unpack(theta)
        fvals, _ = target_log_grad(self.f, grid @ A.T + a)
        v = logw - fvals
        order = np.argsort(v)
        best = float(v[order[-1]])
        best_y = grid[order[-1]]
        points = []
        r = self.wrad
        # one ascent start per spatial basin of the violation
        starts = []
        for idx in order[::-1]:
            if len(starts) >= n_refine:
                break
            if all(np.linalg.norm(grid[idx] - grid[j]) > 0.1 * r
                   for j in starts):
                starts.append(idx)

        def fused(z):
            s = math.sqrt(1.0 + float(z @ z))
            y = r * z / s
            lw, gw = target_log_grad(self.w, y[None, :])
            lf, gf = target_log_grad(self.f, (y @ A.T + a)[None, :])
            gy = gw[0] - gf[0] @ A
            J = (np.eye(self.d) - np.outer(z, z) / (s * s)) * (r / s)
            return -(lw[0] - lf[0]), -(J @ gy)

        for idx in starts:
            y0 = grid[idx]
            n0 = np.linalg.norm(y0) / r
            z0 = y0 / r / max(math.sqrt(max(1.0 - n0 * n0, 1e-12)), 1e-6)
            res = optimize.minimize(fused, z0, jac=True, method="L-BFGS-B",
                                    options={"maxiter": 120, "gtol": 1e-12})
            s = math.sqrt(1.0 + float(res.x @ res.x))
            y = r * res.x / s
            points.append(y)
            if -res.fun > best:
                best, best_y = float(-res.fun), y
        return best, best_y, points

    def separation(self, theta, n_refine=16):
        return self._sup_over(theta, self.sep_grid, self.logw_sep, n_refine)

    def certify(self, theta):
        """Dense independent sup of log w(y) - log f(A y + a), returned with
        its witness; exp of the negated sup is the largest feasible alpha.

        Grid values use the true log f (+inf when the position pokes out of
        supp f at a sampled point); ascent refinement navigates the smooth
        surrogate but the refined points are re-scored exactly."""
        _, A, a = self.unpack(theta)
        n = _CERT_GRID[min(self.d, 3)]
        grid = ball_grid(self.d, n, radius=0.9999 * self.wrad,
                         seed=self.opts.seed + 17)
        logw = self.w.log_evaluate_many(grid)

        def exact(Y):
            lf = self.f.log_evaluate_many(Y @ A.T + a)
            lw = self.w.log_evaluate_many(Y)
            out = lw - lf
            out[np.isneginf(lf) & np.isfinite(lw)] = math.inf
            out[np.isneginf(lw)] = -math.inf
            return out

        v = exact(grid)
        k = int(np.argmax(v))
        best, witness = float(v[k]), grid[k]
        if math.isinf(best):
            return best, witness
        soft_best, _, points = self._sup_over(theta, grid, logw, n_refine=32)
        if points:
            P = np.asarray(points)
            pv = exact(P)
            j = int(np.argmax(pv))
            if float(pv[j]) > best:
                best, witness = float(pv[j]), P[j]
        return best, witness

    def add_points(self, points):
        fresh = [y for y in points
                 if np.min(np.linalg.norm(self.Y - y, axis=1)) > 1e-9]
        if fresh:
            self.Y = np.vstack([self.Y] + fresh)
            self.logw = np.append(
                self.logw, self.w.log_evaluate_many(np.asarray(fresh)))
        return len(fresh)

    # --- initialization --------------------------------------------------

    def initial_theta(self, rng, restart):
        d = self.d
        box = ball_grid(d, _SEP_GRID[min(d, 3)],
                        radius=max(4.0, 2.0 * self.wrad), seed=13)
        fv, _ = target_log_grad(self.f, box)
        a = box[int(np.argmax(fv))].copy()
        res = optimize.minimize(
            lambda x: -target_log_grad(self.f, x[None, :])[0][0], a,
            method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14})
        a = res.x
        scale = 0.4 * self.wrad if restart == 0 else \
            self.wrad * (0.2 + 0.6 * rng.random())
        A = scale * np.eye(d)
        if restart > 0:
            a = a + 0.2 * rng.standard_normal(d)
            W = rng.standard_normal((d, d)) * 0.1
            A = A + scale * (W + W.T) / 2.0
            A = A + (0.05 - min(0.0, np.linalg.eigvalsh(A).min())) * np.eye(d)
        return self.pack(A, a)

    # --- inner solve at fixed multiplier -----------------------------------

    def solve_lambda(self, theta0, lam, exchange_rounds=12):
        """Anneal the soft-min temperature, then alternate quasi-Newton
        re-optimization with constraint exchange; the returned iterate is the
        one with the best feasibility-corrected objective seen (the ascent
        can regress when a stage's line search fails near a ridge)."""
        theta = theta0.copy()
        iters = 0
        best = None
        stall = 0
        schedule = _TAU_SCHEDULE
        for _ in range(exchange_rounds):
            for tau in schedule:
                for attempt in range(3):
                    res = optimize.minimize(
                        self.fused, theta, args=(lam, tau), jac=True,
                        method="L-BFGS-B",
                        options={"maxiter": 400, "gtol": 1e-12,
                                 "ftol": 1e-16, "maxls": 100})
                    iters += 1
                    if res.nit > 0 or attempt == 2:
                        theta = res.x
                        break
                    # immediate line-search failure: nudge off the ridge
                    theta = theta + 1e-8 * self._rng.standard_normal(
                        theta.shape[0])
            schedule = _TAU_SCHEDULE[3:]
            sup, _, points = self.separation(theta)
            _, A, _ = self.unpack(theta)
            obj = math.log(max(np.linalg.det(A), 1e-300)) - lam * sup
            if best is None or obj > best[0] + 1e-12:
                best = (obj, theta.copy())
                stall = 0
            else:
                stall += 1
            if self.add_points(points) == 0 or stall >= 2:
                break
        return best[1], iters


def _lexicographic_key(pos: AffinePosition):
    return (pos.alpha,) + tuple(v for row in pos.A for v in row) + pos.a


def _finish(engine: _Engine, theta, log_alpha, diagnostics) -> SolveReport:
    """Shrink inside the support, certify, and package the report."""
    opts = engine.opts
    _, A, a = engine.unpack(theta)
    A = _FINAL_SHRINK * A
    cert, _ = engine.certify(engine.pack(A, a))
    fac = 1.0 - 1e-9
    for _ in range(50):
        # the support of the positioned w pokes out of supp f somewhere:
        # back the matrix off until the certificate is finite
        if math.isfinite(cert):
            break
        A = fac * A
        fac = fac ** 4
        cert, _ = engine.certify(engine.pack(A, a))
    if not math.isfinite(cert):
        raise InfeasibleProblemError(
            "no position of w fits inside the support of f")
    if log_alpha is None:
        la = -cert
        violation = 0.0
    else:
        # the prescribed height cannot move, so feasibility and leftover
        # slack are both resolved by scaling A (w is radially nonincreasing:
        # scaling down only lowers the positioned function, scaling up only
        # raises it), with a cheap separation sup steering the bisection
        la = log_alpha
        # a height pinned at the peak makes the violation there an exact
        # zero up to rounding, so the sign tests need a small tolerance
        vtol = min(1e-10, 0.01 * opts.constraint_tol)

        def sep_violation(s):
            return la + engine.separation(engine.pack(s * A, a),
                                          n_refine=4)[0]

        if sep_violation(1.0) > vtol:
            lo, hi = 0.5, 1.0
            while sep_violation(lo) > vtol and lo > 1e-3:
                lo *= 0.7
        else:
            lo, hi = 1.0, 1.05
            while sep_violation(hi) <= vtol and hi < 4.0:
                lo, hi = hi, hi * 1.05
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if sep_violation(mid) <= vtol:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-13:
                break
        scale = lo

        def exact_violation(s):
            return la + engine.certify(engine.pack(s * A, a))[0]

        violation = exact_violation(scale)
        if violation > vtol:
            # the dense certificate sees a violation the separation sup
            # missed (possibly infinite, when the support pokes out)
            lo_s, hi_s = 0.5 * scale, scale
            while exact_violation(lo_s) > vtol and lo_s > 1e-3:
                lo_s *= 0.7
            for _ in range(40):
                mid = 0.5 * (lo_s + hi_s)
                if exact_violation(mid) <= vtol:
                    lo_s = mid
                else:
                    hi_s = mid
                if hi_s - lo_s < 1e-13:
                    break
            scale = lo_s
            violation = exact_violation(scale)
        A = scale * A
    if la < math.log(1e-12):
        raise InfeasibleProblemError(
            "alpha collapsed below 1e-12: no position of w fits below f")
    pos = make_position(math.exp(la), A, a, positive_definite=True)
    diagnostics = dict(diagnostics)
    diagnostics["max_constraint_violation"] = violation
    return SolveReport(
        position=pos,
        objective=pos.log_objective(),
        feasible=violation <= opts.constraint_tol,
        diagnostics=diagnostics,
    )


def _solve_free(f, w, opts, warm_start=None) -> SolveReport:
    engine = _Engine(f, w, opts)
    rng = np.random.default_rng(opts.seed)
    restarts = 1 if warm_start is not None else opts.restarts
    best = None
    trace = []
    for r in range(restarts):
        if warm_start is not None:
            theta0 = engine.pack(warm_start.matrix(), warm_start.a_vector())
        else:
            theta0 = engine.initial_theta(rng, r)
        theta, iters = engine.solve_lambda(theta0, lam=1.0)
        _, A, _ = engine.unpack(theta)
        obj = engine.grid_min(theta) + math.log(max(np.linalg.det(A), 1e-300))
        trace.append(max(obj, trace[-1] if trace else -math.inf))
        if best is None or obj > best[0] + 1e-12:
            best = (obj, theta, iters, r)
        elif abs(obj - best[0]) <= 1e-12:
            _, Ab, ab = engine.unpack(best[1])
            _, Ac, ac = engine.unpack(theta)
            kb = tuple(Ab.ravel()) + tuple(ab)
            kc = tuple(Ac.ravel()) + tuple(ac)
            if kc < kb:
                best = (obj, theta, iters, r)
    _, theta, iters, which = best
    # the dense certificate can expose a violation the separation ascent
    # missed; feed its witness back as a constraint and re-optimize so the
    # matrix adapts instead of alpha absorbing the whole correction
    for _ in range(5):
        sup, _, _ = engine.separation(theta)
        cert, witness = engine.certify(theta)
        if not math.isfinite(cert) or cert <= sup + 1e-8:
            break
        if engine.add_points([witness]) == 0:
            break
        theta, it = engine.solve_lambda(theta, lam=1.0, exchange_rounds=3)
        iters += it
        _, A, _ = engine.unpack(theta)
        trace.append(max(trace[-1], engine.grid_min(theta)
                         + math.log(max(np.linalg.det(A), 1e-300))))
    return _finish(engine, theta, None, {
        "restarts": restarts, "restart": which,
        "outer_iterations": iters, "objective_trace": trace,
        "converged": True})


def _solve_fixed(f, w, opts, log_alpha, warm_start=None) -> SolveReport:
    engine = _Engine(f, w, opts)
    rng = np.random.default_rng(opts.seed)
    if warm_start is not None:
        theta = engine.pack(warm_start.matrix(), warm_start.a_vector())
    else:
        theta = engine.initial_theta(rng, 0)
    # bisection on the multiplier of m: grid_min is nondecreasing in lambda
    lo, hi = 1e-3, 1.0
    theta, _ = engine.solve_lambda(theta, lam=hi)
    iters = 0
    slack = 1e-9  # the peak height is matched only to optimization accuracy
    while engine.grid_min(theta) < log_alpha - slack and hi < 1e9:
        lo, hi = hi, hi * 10.0
        theta, it = engine.solve_lambda(theta, lam=hi)
        iters += it
    if engine.grid_min(theta) < log_alpha - slack:
        raise InfeasibleProblemError(
            "no position of w attains the prescribed height below f")
    converged = False
    for _ in range(opts.max_outer_iterations):
        mid = math.sqrt(lo * hi)
        theta_mid, it = engine.solve_lambda(theta, lam=mid,
                                            exchange_rounds=2)
        iters += it
        gap = engine.grid_min(theta_mid) - log_alpha
        if gap >= -slack:
            hi, theta = mid, theta_mid
        else:
            lo = mid
        if abs(gap) <= 1e-12 or hi / lo < 1.0 + 1e-12:
            converged = True
            break
    # feed back any certificate-only violation so the matrix re-optimizes
    # rather than being scaled down wholesale during restoration
    for _ in range(3):
        cert, witness = engine.certify(theta)
        if not math.isfinite(cert):
            break
        if log_alpha + cert <= min(1e-10, 0.01 * opts.constraint_tol):
            break
        if engine.add_points([witness]) == 0:
            break
        theta, it = engine.solve_lambda(theta, lam=hi, exchange_rounds=2)
        iters += it
    return _finish(engine, theta, log_alpha, {
        "restarts": 1, "restart": 0, "outer_iterations": iters,
        "objective_trace": [], "converged": converged,
        "multiplier": hi})


def solve_john(f: LogConcaveFunction, w: LogConcaveFunction,
               opts: SolverOptions = SolverOptions()) -> SolveReport:
    """Best found positive-definite position of w below f."""
    return _solve_free(f, w, opts)


def solve_fixed_height(f: LogConcaveFunction, w: LogConcaveFunction,
                       xi: float, opts: SolverOptions = SolverOptions(),
                       warm_start: AffinePosition | None = None) -> SolveReport:
    """As solve_john with the height pinned: alpha = xi / ||w||_inf."""
    fsup = f.sup_norm()
    if not 0.0 < xi <= fsup * (1.0 + 1e-12):
        raise ValueError(f"xi={xi} out of range (0, {fsup}]")
    la = math.log(xi / w.sup_norm())
    return _solve_fixed(f, w, opts, la, warm_start=warm_start)


# ---------------------------------------------------------------------------
# contact extraction and certification
# ---------------------------------------------------------------------------


def extract_and_certify(f: LogConcaveFunction, report: SolveReport,
                        contact_tol: float = 1e-6) -> SolveReport:
    """Find contact points of f with hbar (in John coordinates) and recover
    decomposition weights; success certifies optimality via the John
    condition."""
    if not report.feasible:
        raise ValueError("certification requires a feasible report")
    pos = report.position
    d = f.dim
    dev = max(abs(pos.alpha - 1.0),
              float(np.max(np.abs(pos.matrix() - np.eye(d)))),
              float(np.max(np.abs(pos.a_vector()))))
    if dev > 0.05:
        raise ValueError("certification runs in John coordinates; "
                         "transform f to the solved position first")
    grid = ball_grid(d, {1: 4001, 2: 8192, 3: 16384}[min(d, 3)],
                     radius=0.99999)
    hvals = hbar(grid)
    fvals = f.evaluate_many(grid)
    ratio = (fvals - hvals) / np.maximum(hvals, 1e-12)

    def rel_gap(u):
        h = float(hbar(u))
        if np.linalg.norm(u) >= 1.0 or h < 1e-8:
            return 1e9
        return (float(f.evaluate_many(u[None, :])[0]) - h) / h

    # spatially clustered seeds: one ascent start per basin of the ratio
    seeds = []
    for idx in np.argsort(ratio):
        if len(seeds) >= 48 or ratio[idx] > max(1.0, 10.0 * ratio.min()):
            break
        if all(np.linalg.norm(grid[idx] - s) > 0.05 for s in seeds):
            seeds.append(grid[idx])
    candidates = []
    for s in seeds:
        res = optimize.minimize(rel_gap, s, method="Nelder-Mead",
                                options={"xatol": 1e-13, "fatol": 1e-15,
                                         "maxiter": 4000})
        if res.fun <= contact_tol:
            candidates.append(res.x)
    # when the gap vanishes on a sizable region (f coincides with the height
    # function there), any spanning subset certifies; a clustered refinement
    # set alone can be one-sided, so add spatially spread exact grid contacts
    exact = np.flatnonzero((np.abs(ratio) <= contact_tol) & (hvals > 1e-6))
    if exact.size >= 0.05 * grid.shape[0]:
        picked = []
        for idx in exact:
            u = grid[idx]
            if len(picked) >= 8 * (d + 1):
                break
            if all(np.linalg.norm(u - v) > 0.3 for v in picked):
                picked.append(u)
        candidates.extend(picked)
    # boundary-of-support contacts for targets with bounded support
    if math.isfinite(f.support_radius()):
        dirs = np.vstack([np.eye(d), -np.eye(d)])
        for u in dirs:
            inside = float(f.evaluate_many((1.0 - 1e-9) * u[None, :])[0])
            outside = float(f.evaluate_many((1.0 + 1e-9) * u[None, :])[0])
            if inside > 0.0 and outside == 0.0:
                candidates.append(u.astype(float))
    contacts = []
    for u in candidates:
        if all(np.linalg.norm(u - v) > 1e-5 for v in contacts):
            contacts.append(u)
    if not contacts:
        raise NoContactsError(
            "no contact points found: the position does not certify as "
            "optimal at this tolerance")
    weights = None
    certified = False
    try:
        weights = weights_from_points(np.asarray(contacts), 1e-6)
        certified = True
    except InfeasibleWeightsError:
        pass
    diag = dict(report.diagnostics)
    diag["certified"] = certified
    return replace(
        report,
        contacts=tuple(tuple(float(v) for v in u) for u in contacts),
        recovered_weights=None if weights is None else
        tuple(float(v) for v in weights),
        diagnostics=diag,
    )


# ---------------------------------------------------------------------------
# the height curve
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveSample:
    alpha: float
    t: float
    psi: float
    phi: float
    feasible: bool
    max_violation: float
    error: str | None = None


def height_curve(f: LogConcaveFunction, w: LogConcaveFunction,
                 alphas, opts: SolverOptions = SolverOptions()
                 ) -> list[CurveSample]:
    """Fixed-height solves along a list of heights, warm-started in
    decreasing order; psi = det A, phi = psi^{1/d}."""
    d = f.dim
    order = sorted(range(len(alphas)), key=lambda i: -alphas[i])
    samples: dict[int, CurveSample] = {}
    warm = None
    for i in order:
        alpha = float(alphas[i])
        try:
            rep = solve_fixed_height(f, w, alpha, opts, warm_start=warm)
            psi = abs(rep.position.det())
            warm = rep.position
            samples[i] = CurveSample(
                alpha=alpha, t=math.log(alpha), psi=psi, phi=psi ** (1.0 / d),
                feasible=rep.feasible,
                max_violation=rep.diagnostics["max_constraint_violation"])
        except (InfeasibleProblemError, ValueError) as exc:
            samples[i] = CurveSample(alpha=alpha, t=math.log(alpha),
                                     psi=math.nan, phi=math.nan,
                                     feasible=False, max_violation=math.nan,
                                     error=str(exc))
    return [samples[i] for i in range(len(alphas))]


def phi_concavity_violation(samples: list[CurveSample]) -> float:
    """Worst midpoint concavity violation of phi as a function of t over
    consecutive feasible triples (positive = violation)."""
    pts = sorted((s.t, s.phi) for s in samples
                 if s.feasible and math.isfinite(s.phi))
    worst = -math.inf
    for (t0, p0), (t1, p1), (t2, p2) in zip(pts, pts[1:], pts[2:]):
        if t2 - t0 < 1e-12:
            continue
        lam = (t2 - t1) / (t2 - t0)
        worst = max(worst, lam * p0 + (1.0 - lam) * p2 - p1)
    return worst
