"""John bump functions built from decompositions, and the norm-gap probe."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import polar
from .decomp import (
    DEFAULT_VERIFY_TOL,
    FunctionalJohnDecomposition,
    InvalidDecompositionError,
    verify_decomposition,
)
from .lcfunc import Bump, hbar

REGULARITY_MARGIN = 1e-12


@dataclass(frozen=True)
class JohnBumpFunction:
    decomposition: FunctionalJohnDecomposition
    function: Bump
    regular: bool

    @property
    def dim(self) -> int:
        return self.function.dim


@dataclass(frozen=True)
class NormGapRecord:
    sup_norm: float
    gap: float  # e^d - sup_norm
    polar_zero_lower_bound: float


def _construction_grid(d: int, seed: int = 0) -> np.ndarray:
    """Cheap certificate grid in the unit ball for the hbar <= f check."""
    if d == 1:
        return np.linspace(-1.0, 1.0, 1000)[:, None]
    if d == 2:
        side = np.linspace(-1.0, 1.0, 33)
        X = np.array([[x, y] for x in side for y in side])
        return X[np.einsum("ij,ij->i", X, X) <= 1.0]
    rng = np.random.default_rng(seed)
    # sphere-stratified samples: uniform directions, stratified radii
    n = 10_000
    V = rng.standard_normal((n, d))
    V /= np.linalg.norm(V, axis=1)[:, None]
    radii = ((np.arange(n) + rng.random(n)) / n) ** (1.0 / d)
    return V * radii[:, None]


def bump_from_decomposition(dec: FunctionalJohnDecomposition) -> JohnBumpFunction:
    """min of the majorants over the decomposition's points; checks the
    hbar <= f guarantee on a construction grid."""
    res = verify_decomposition(dec)
    if not res.passes(DEFAULT_VERIFY_TOL):
        raise InvalidDecompositionError(f"decomposition fails verification: {res}")
    f = Bump(anchors=dec.points)
    grid = _construction_grid(dec.dim)
    heights = hbar(grid)
    mask = heights > 0
    gap = f.log_evaluate_many(grid[mask]) - np.log(heights[mask])
    if np.min(gap) < -1e-9:
        raise InvalidDecompositionError(
            "constructed bump dips below the height function")
    return JohnBumpFunction(decomposition=dec, function=f,
                            regular=f.is_regular)


def norm_gap_probe(bf: JohnBumpFunction) -> NormGapRecord:
    """Exact sup norm, the gap to e^d, and the analytic lower bound
    e^{-d} * prod hbar(u_i)^{-c_i hbar^2(u_i)} on the polar at the origin."""
    if not bf.regular:
        raise ValueError("norm gap probe requires a regular bump")
    d = bf.dim
    s = bf.function.sup_norm()
    U = bf.decomposition.point_array()
    c = bf.decomposition.weight_array()
    h = hbar(U)
    log_bound = -d - np.sum(c * h * h * np.log(h))
    bound = math.exp(log_bound)
    record = NormGapRecord(sup_norm=s, gap=math.exp(d) - s,
                           polar_zero_lower_bound=bound)
    assert s <= math.exp(d), "sup norm exceeds e^d"
    assert s <= 1.0 / bound + 1e-9, "sup norm exceeds reciprocal polar bound"
    return record


def polar_atom_floor_check(bf: JohnBumpFunction, tol: float = 1e-9) -> bool:
    """polar(f)(u_i / hbar^2(u_i)) >= mass of the majorant atom, per anchor."""
    if not bf.regular:
        raise ValueError("atom floor check requires a regular bump")
    U = bf.decomposition.point_array()
    for u in U:
        atom = polar.polar_of_ell(u)
        value = polar.polar_eval(bf.function, np.asarray(atom.location))
        if value < atom.mass - tol:
            return False
    return True
