"""Positive approximate eigenvectors, cone certificates, and two-sided
spectral-radius brackets.

For a matrix L mapping the log-Lipschitz cone K_M into K_{M'} with M' < M,
any certified w in K_M gives min_i (Lw)_i/w_i <= r(L) <= max_i (Lw)_i/w_i.
Power iteration only tightens that bracket; it is valid at every iterate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .bspline import KnotSequence, TensorGrid

Array = np.ndarray

# relative widening of bracket endpoints, absorbing matvec rounding
FLOAT_SLACK = 1e-12


class PositivityError(RuntimeError):
    """An iterate or image vector failed strict positivity."""


@dataclass(frozen=True)
class PowerResult:
    lam: float          # geometric mean of the final min/max ratios
    w: Array            # final iterate, sup norm 1, strictly positive
    iterations: int
    ratio_min: float
    ratio_max: float
    converged: bool

    @property
    def spread(self) -> float:
        return self.ratio_max - self.ratio_min


@dataclass(frozen=True)
class ConeCertificate:
    M: float
    d: int
    h: float
    adjacent_ratio_max: float
    member: bool


@dataclass(frozen=True)
class SpectralBracket:
    alpha: float
    beta: float
    iterations: int
    residual: float  # ratio spread at the certified iterate


def _as_matrix(Mtx) -> sparse.spmatrix | Array:
    return Mtx.matrix if hasattr(Mtx, "matrix") else Mtx


def power_iteration(Mtx, tol: float = 1e-14, max_iter: int = 100_000,
                    start: Array | None = None) -> PowerResult:
    """Iterate w -> Lw / max(Lw), stopping when the relative spread of the
    ratios (Lw)_i/w_i falls below tol, stops improving, or max_iter hits.

    Raises PositivityError if any iterate entry fails to stay positive;
    non-convergence is reported via the converged flag, not an exception
    (the cone bracket is valid at any iterate, just looser).
    """
    m = _as_matrix(Mtx)
    N = m.shape[0]
    if m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    w = np.ones(N) if start is None else np.asarray(start, dtype=np.float64).copy()
    if np.any(w <= 0):
        raise PositivityError("start vector must be strictly positive")
    w /= w.max()
    best_spread = np.inf
    stale = 0
    it = 0
    rmin = rmax = np.nan
    converged = False
    for it in range(1, max_iter + 1):
        y = m @ w
        if y.min() <= 0:
            raise PositivityError(
                "matrix image lost positivity (mesh/cone misconfiguration)")
        ratios_min = (y / w).min()
        ratios_max = (y / w).max()
        rmin, rmax = float(ratios_min), float(ratios_max)
        spread = (rmax - rmin) / max(abs(rmax), np.finfo(float).tiny)
        w = y / y.max()
        if spread < tol:
            converged = True
            break
        # floating-point floor: stop once the spread no longer improves
        if spread < best_spread * (1 - 1e-3):
            best_spread = spread
            stale = 0
        else:
            stale += 1
            if stale >= 10:
                break
    # ratios of the final iterate (consistent with the returned w)
    y = m @ w
    if y.min() <= 0:
        raise PositivityError("matrix image lost positivity")
    rmin = float((y / w).min())
    rmax = float((y / w).max())
    return PowerResult(lam=float(np.sqrt(rmin * rmax)), w=w, iterations=it,
                       ratio_min=rmin, ratio_max=rmax, converged=converged)


def cone_membership(w: Array, geometry, M: float,
                    sizes: tuple[int, int] | None = None) -> ConeCertificate:
    """Check the log-Lipschitz bound |log w_i - log w_j| <= M dist(x_i, x_j)
    on grid-adjacent collocation midpoints.

    Adjacency suffices for all pairs: the log-Lipschitz bound is additive
    along grid paths and the path length dominates the Euclidean distance.
    For 2D vectors `sizes` gives the (rows, cols) = (y, x) grid shape; when
    omitted the grid is assumed square.
    """
    w = np.asarray(w, dtype=np.float64)
    if np.any(w <= 0):
        raise PositivityError("cone membership requires a strictly positive vector")
    logw = np.log(w)
    if isinstance(geometry, KnotSequence):
        d, h = 1, geometry.h
        ratio = np.abs(np.diff(logw)).max() / h if len(w) > 1 else 0.0
    elif isinstance(geometry, TensorGrid):
        d, h = geometry.d, geometry.h
        if sizes is None:
            side = math.isqrt(len(w))  # collocation midpoints per axis
            sizes = (side, side)
        if sizes[0] * sizes[1] != len(w):
            raise ValueError("2D sample vector length does not match the grid")
        G = logw.reshape(sizes)  # row = y index, col = x index (x fastest)
        rx = np.abs(np.diff(G, axis=1)).max() if sizes[1] > 1 else 0.0
        ry = np.abs(np.diff(G, axis=0)).max() if sizes[0] > 1 else 0.0
        ratio = max(rx, ry) / h
    else:
        raise TypeError("geometry must be a KnotSequence or TensorGrid")
    return ConeCertificate(M=float(M), d=d, h=h,
                           adjacent_ratio_max=float(ratio),
                           member=bool(ratio <= M))


def spectral_bracket(Mtx, w: Array, iterations: int = 0) -> SpectralBracket:
    """alpha = min_i (Lw)_i/w_i, beta = max_i, widened by a relative slack of
    1e-12 against matvec rounding; alpha <= r(L) <= beta for cone-certified w."""
    m = _as_matrix(Mtx)
    w = np.asarray(w, dtype=np.float64)
    if np.any(w <= 0):
        raise PositivityError("bracket vector must be strictly positive")
    y = m @ w
    if y.min() <= 0:
        raise PositivityError("matrix image lost positivity")
    ratios = y / w
    alpha = float(ratios.min()) * (1.0 - FLOAT_SLACK)
    beta = float(ratios.max()) * (1.0 + FLOAT_SLACK)
    return SpectralBracket(alpha=alpha, beta=beta, iterations=iterations,
                           residual=float(ratios.max() - ratios.min()))
