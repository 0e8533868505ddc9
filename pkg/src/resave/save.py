"""Average-variance assembly and direction extraction.

The target matrix is the sample average, over the observed response values,
of (I - C(y))^2 where C(y) is the truncated-ratio estimate of the
conditional predictor covariance at y:

    r(y) = first_moment(y) / max(density(y), floor)
    R(y) = second_moment(y) / max(density(y), floor)
    C(y) = R(y) - r(y) r(y)'

For standardized predictors the top eigenvectors of that average span the
directions along which the conditional distribution of X varies with Y.
``fit_recursive`` builds the matrix from the streaming moment state (and
stays updatable one observation at a time); ``fit_batch`` builds it from
fixed-bandwidth batch moments on a frozen sample.  Both standardize the
predictors by default and map extracted directions back to the original
predictor scale through the same whitening transform.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, NoDataError
from .kernels import EPANECHNIKOV
from .linalg import SymMatrix, inv_sqrt, sample_covariance, sym_eigen
from .recursive import (
    Observation,
    RecursiveState,
    batch_moments_arrays,
    to_arrays,
    unpack_rows,
)
from .sequences import DEFAULT_PLAN, SequencePlan, truncation_level


def truncate_density(values, floor):
    """Clip density estimates from below at the truncation floor."""
    if not floor > 0:
        raise ValueError(f"truncation floor must be positive, got {floor}")
    out = np.maximum(values, floor)
    return float(out) if np.ndim(values) == 0 else out


@dataclass(frozen=True)
class RatioEstimates:
    """Truncated-ratio moment estimates at each sample point."""

    d: int
    floor: float
    density_floored: np.ndarray = field(repr=False)  # (n,)
    cond_mean: np.ndarray = field(repr=False)  # (n, d)
    cond_second_packed: np.ndarray = field(repr=False)  # (n, d(d+1)/2)

    @property
    def n(self):
        return self.density_floored.shape[0]

    def cond_second(self):
        return unpack_rows(self.d, self.cond_second_packed)


def compute_ratios(density, first_moment, second_moment_packed, floor):
    """Floor the density, then divide the moment numerators by it."""
    ft = truncate_density(np.asarray(density, dtype=float), floor)
    d = first_moment.shape[1]
    return RatioEstimates(
        d,
        float(floor),
        ft,
        first_moment / ft[:, None],
        second_moment_packed / ft[:, None],
    )


@dataclass(frozen=True)
class SaveMatrix:
    """Assembled average-variance matrix over n sample points."""

    d: int
    n: int
    floor: float
    matrix: SymMatrix


def assemble_save(ratios):
    """Average (I - C(y_i))^2 over the sample points.

    Expanding the square per entry (k, l) gives

        delta_kl - 2 C_kl + sum_j C_kj C_jl,

    with C = R - r r'; the matrix product form below is that same sum.
    The upper triangle of the average is mirrored, so the result is
    symmetric exactly.
    """
    n = ratios.n
    if n < 1:
        raise NoDataError("no sample points to average over")
    d = ratios.d
    r = ratios.cond_mean
    big_r = ratios.cond_second()
    c = big_r - r[:, :, None] * r[:, None, :]
    e = np.eye(d)[None, :, :] - c
    lam = (e @ e).mean(axis=0)
    return SaveMatrix(d, n, ratios.floor, SymMatrix.from_full(lam))


@dataclass(frozen=True)
class EdrEstimate:
    """Spectral output: all eigenpairs plus the retained leading directions.

    ``eigenvalues`` descending; ``eigenvectors`` orthonormal columns in the
    standardized predictor scale; ``directions`` the first
    ``num_directions`` eigenvectors mapped to the original predictor scale
    and renormalized to unit length.  Every reported column has its
    largest-magnitude component positive, so repeated runs cannot disagree
    by a sign flip.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    directions: np.ndarray
    num_directions: int


def _fix_signs(cols):
    for j in range(cols.shape[1]):
        lead = np.argmax(np.abs(cols[:, j]))
        if cols[lead, j] < 0:
            cols[:, j] = -cols[:, j]
    return cols


def extract_directions(save, num_directions=1, back_transform=None):
    """Leading eigenvectors of the assembled matrix.

    ``back_transform`` (matrix or SymMatrix), when given, maps directions
    from the standardized to the original predictor scale; mapped columns
    are renormalized to unit length.  The identity leaves them unchanged.
    """
    if not 1 <= num_directions <= save.d:
        raise ValueError(
            f"num_directions must lie in [1, {save.d}], got {num_directions}"
        )
    vals, vecs = sym_eigen(save.matrix)
    _fix_signs(vecs)
    lead = vecs[:, :num_directions].copy()
    if back_transform is not None:
        b = back_transform.full() if isinstance(back_transform, SymMatrix) else np.asarray(back_transform, dtype=float)
        lead = b @ lead
        norms = np.sqrt((lead * lead).sum(axis=0))
        if not norms.all():
            raise ValueError("back transform annihilated a direction")
        lead = lead / norms
        _fix_signs(lead)
    return EdrEstimate(vals, vecs, lead, num_directions)


@dataclass(frozen=True)
class Standardizer:
    """Frozen affine whitening x -> (x - mean) @ transform."""

    mean: np.ndarray
    transform: SymMatrix

    @classmethod
    def fit(cls, xs):
        mean, cov = sample_covariance(xs)
        return cls(mean, inv_sqrt(cov))

    @classmethod
    def identity(cls, d):
        return cls(np.zeros(d), SymMatrix.identity(d))

    def apply(self, x):
        return (x - self.mean) @ self.transform.full()


def _resolve_standardizer(standardize, xs, d):
    """True: fit to xs.  False: identity (data already standardized).
    A Standardizer instance: use as given (shared/frozen transform)."""
    if isinstance(standardize, Standardizer):
        return standardize
    if standardize:
        return Standardizer.fit(xs)
    return Standardizer.identity(d)


@dataclass
class FitResult:
    """A fitted average-variance decomposition."""

    save_matrix: SaveMatrix
    directions: EdrEstimate
    standardizer: Standardizer


@dataclass
class RecursiveFit(FitResult):
    """Streaming fit: carries the moment state so it stays updatable."""

    state: RecursiveState
    plan: SequencePlan
    kernel: object
    num_directions: int


def _refresh(fit):
    state = fit.state
    floor = truncation_level(state.n, fit.plan)
    ratios = compute_ratios(
        state.density, state.first_moment, state.second_moment_packed, floor
    )
    fit.save_matrix = assemble_save(ratios)
    fit.directions = extract_directions(
        fit.save_matrix, fit.num_directions, back_transform=fit.standardizer.transform
    )


def fit_recursive(data, plan=DEFAULT_PLAN, kernel=EPANECHNIKOV, num_directions=1,
                  standardize=True):
    """Fit the streaming estimator on an initial sample.

    Returns a :class:`RecursiveFit`; feed later observations to
    :func:`update_fit`.  Needs at least d + 1 observations.

    ``standardize`` may be True (whiten by this sample's own covariance,
    frozen thereafter), False (the data is already standardized), or a
    ready :class:`Standardizer` to share a transform fitted elsewhere.
    """
    ys, xs = to_arrays(data)
    n, d = xs.shape
    if n < d + 1:
        raise InsufficientDataError(f"need at least d+1={d + 1} observations, got {n}")
    std = _resolve_standardizer(standardize, xs, d)
    xw = std.apply(xs)
    state = RecursiveState(d, plan, kernel).bulk_absorb(ys, xw)
    fit = RecursiveFit(
        save_matrix=None, directions=None, standardizer=std,
        state=state, plan=plan, kernel=kernel, num_directions=num_directions,
    )
    _refresh(fit)
    return fit


def update_fit(fit, obs):
    """Absorb one more observation into a recursive fit.

    The whitening stays frozen at its initial-fit estimate.  Returns the
    refreshed (SaveMatrix, EdrEstimate) pair; the fit object is updated in
    place.
    """
    x = np.asarray(obs.x, dtype=float)
    if x.shape != (fit.state.d,):
        raise ValueError(f"predictor shape {x.shape} does not match d={fit.state.d}")
    fit.state.update(Observation(obs.y, fit.standardizer.apply(x)))
    _refresh(fit)
    return fit.save_matrix, fit.directions


def fit_batch(data, h=None, kernel=EPANECHNIKOV, num_directions=1,
              plan=DEFAULT_PLAN, standardize=True):
    """Fixed-bandwidth batch fit on a frozen sample.

    ``h`` defaults to n ** -plan.c1.  The truncation floor comes from the
    same schedule as the streaming fit; everything past the moment stage is
    shared code.
    """
    ys, xs = to_arrays(data)
    n, d = xs.shape
    if n < d + 1:
        raise InsufficientDataError(f"need at least d+1={d + 1} observations, got {n}")
    std = _resolve_standardizer(standardize, xs, d)
    xw = std.apply(xs)
    if h is None:
        h = float(n) ** -plan.c1
    density, first, second = batch_moments_arrays(ys, xw, h, kernel, ys)
    floor = truncation_level(n, plan)
    ratios = compute_ratios(density, first, second, floor)
    save = assemble_save(ratios)
    edr = extract_directions(save, num_directions, back_transform=std.transform)
    return FitResult(save, edr, std)
