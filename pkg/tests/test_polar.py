"""Polar transform: closed forms, the exact bump LP, atoms, and the
order-reversal and log-concavity properties."""

import math

import numpy as np
import pytest

from funcjohn import (
    BallIndicator,
    Bump,
    ExpNorm,
    Gaussian,
    HalfRestriction,
    Height,
    HeightPower,
    PolarHeightPower,
    Positioned,
    improperness_probe,
    make_position,
    polar_eval,
    polar_eval_many,
    polar_of_ell,
)
from funcjohn.polar import bump_log_sup

TWO_POINT = Bump(anchors=((1.0 / math.sqrt(2.0),), (-1.0 / math.sqrt(2.0),)))


def test_polar_at_zero_is_reciprocal_sup():
    cases = [Height(1), Height(2), HeightPower(dimension=2, s=3.0),
             BallIndicator(dimension=2), Gaussian(dimension=2),
             ExpNorm(dimension=1, p=1.5), TWO_POINT]
    for f in cases:
        val = polar_eval(f, np.zeros(f.dim))
        assert abs(val - 1.0 / f.sup_norm()) < 1e-9


def test_two_point_bump_polar_at_zero():
    assert abs(polar_eval(TWO_POINT, np.array([0.0]))
               - math.sqrt(2.0) / math.e) < 1e-12


def test_gaussian_polar_closed_form():
    g = Gaussian(dimension=2)
    for p in (np.array([0.5, 0.0]), np.array([1.0, -2.0])):
        assert abs(polar_eval(g, p)
                   - math.exp(-float(p @ p) / 4.0)) < 1e-12


def test_ball_indicator_polar_is_exp_support():
    # polar of chi_B is e^{-|p|}
    b = BallIndicator(dimension=2)
    for r in (0.5, 1.0, 3.0):
        assert abs(polar_eval(b, np.array([r, 0.0])) - math.exp(-r)) < 1e-9


def test_polar_atom_values():
    atom = polar_of_ell(np.zeros(2))
    assert atom.mass == 1.0
    assert atom.location == (0.0, 0.0)
    atom = polar_of_ell(np.array([0.5]))
    assert abs(atom.location[0] - 2.0 / 3.0) < 1e-15
    assert abs(atom.mass - (2.0 / math.sqrt(3.0)) * math.exp(-1.0 / 3.0)) < 1e-15
    # rotational symmetry of the mass
    atom2 = polar_of_ell(np.array([0.5, 0.0]))
    assert abs(atom2.mass - atom.mass) < 1e-15
    assert np.allclose(atom2.location, (2.0 / 3.0, 0.0))
    with pytest.raises(ValueError):
        polar_of_ell(np.array([1.0]))


def test_atom_matches_single_anchor_bump_polar():
    rng = np.random.default_rng(21)
    for _ in range(50):
        d = rng.integers(1, 4)
        u = rng.standard_normal(d)
        u *= (0.05 + 0.85 * rng.random()) / np.linalg.norm(u)
        atom = polar_of_ell(u)
        lp = polar_eval(Bump(anchors=(tuple(u),)), np.asarray(atom.location))
        assert abs(lp - atom.mass) < 1e-9


def test_bump_lp_matches_dense_grid_d1():
    rng = np.random.default_rng(22)
    x = np.linspace(-60.0, 60.0, 2_000_001)[:, None]
    for _ in range(20):
        k = rng.integers(2, 5)
        anchors = tuple((float(v),) for v in rng.uniform(-0.9, 0.9, size=k))
        f = Bump(anchors=anchors)
        logs = f.log_evaluate_many(x)
        # finite sup requires p between the extreme majorant slopes
        u = np.asarray(anchors)[:, 0]
        slopes = u / (1.0 - u * u)
        lo, hi = float(slopes.min()), float(slopes.max())
        step = x[1, 0] - x[0, 0]
        for t in rng.random(3):
            p = lo + t * (hi - lo)
            vals = p * x[:, 0] + logs
            k = int(np.argmax(vals))
            # refine around the kink the coarse grid found
            fine = np.linspace(x[k, 0] - step, x[k, 0] + step, 20001)[:, None]
            brute = float(np.max(p * fine[:, 0]
                                 + f.log_evaluate_many(fine)))
            exact = float(bump_log_sup(f, np.array([[p]]))[0])
            assert exact >= brute - 1e-12
            assert abs(exact - brute) < 1e-6


def test_polar_order_reversal():
    rng = np.random.default_rng(23)
    grid = np.linspace(-1.0, 1.0, 501)[:, None]
    for _ in range(50):
        anchors = tuple((float(v),) for v in rng.uniform(-0.8, 0.8, size=3))
        g = Bump(anchors=anchors)
        sub = Bump(anchors=anchors + ((float(rng.uniform(-0.8, 0.8)),),))
        # more majorants => pointwise smaller
        assert np.all(sub.log_evaluate_many(grid)
                      <= g.log_evaluate_many(grid) + 1e-12)
        for p in rng.uniform(-1.5, 1.5, size=2):
            assert polar_eval(sub, np.array([p])) \
                >= polar_eval(g, np.array([p])) - 1e-12


def test_polar_log_concavity_on_a_segment():
    f = TWO_POINT
    # the polar vanishes beyond the extreme majorant slopes +-sqrt(2)
    P = np.linspace(-1.4, 1.4, 41)[:, None]
    vals = polar_eval_many(f, P)
    assert np.all(vals > 0.0)
    logs = np.log(vals)
    mid = 0.5 * (logs[:-2] + logs[2:])
    assert np.all(logs[1:-1] >= mid - 1e-9)


def test_polar_positioned_reduction():
    # polar of alpha f(x/s) at p equals (1/alpha) polar of f at s p
    pos = make_position(2.0, 1.5 * np.eye(1), np.zeros(1))
    g = Positioned(inner=Height(1), position=pos)
    for p in (0.0, 0.7, -1.3):
        lhs = polar_eval(g, np.array([p]))
        rhs = polar_eval(Height(1), np.array([1.5 * p])) / 2.0
        assert abs(lhs - rhs) < 1e-9


def test_improperness_probe_halfspace_gaussian():
    f = HalfRestriction(inner=Gaussian(dimension=2), normal=(1.0, 0.0))
    vals = improperness_probe(f, (-1.0, 0.0), (1.0, 2.0, 5.0, 10.0))
    assert all(abs(v - 1.0) <= 1e-9 for v in vals)


def test_improperness_probe_gaussian_decays():
    vals = improperness_probe(Gaussian(dimension=1), (-1.0,), (2.0,))
    assert abs(vals[0] - math.exp(-1.0)) < 1e-10


def test_polar_decays_along_bounded_support():
    vals = improperness_probe(Height(1), (1.0,), (5.0, 20.0, 80.0))
    assert vals[0] > vals[1] > vals[2]
    assert vals[2] < 1e-9


def test_polar_height_power_closed_form_agrees_with_polar_eval():
    f = HeightPower(dimension=1, s=1.0)
    g = PolarHeightPower(dimension=1, s=1.0)
    for p in (0.0, 0.4, 1.0, 3.0):
        assert abs(polar_eval(f, np.array([p]))
                   - g.evaluate(np.array([p]))) < 1e-9
