"""Streaming and batch kernel estimates of the response-conditional moments.

For response value y the estimator tracks three density-weighted moments:

    density(y)        ~ f(y)
    first_moment(y)   ~ E[X | Y=y] f(y)          (length-d vector)
    second_moment(y)  ~ E[X X' | Y=y] f(y)       (symmetric d-by-d)

``RecursiveState`` absorbs observations one at a time.  Absorbing
observation number i with step s_i and bandwidth h_i updates every tracked
evaluation point y as

    m_new(y) = (1 - s_i) * m_old(y) + s_i * K((y - Y_i)/h_i)/h_i * phi(X_i)

with phi = 1, x, x x' for the three moments.  Unrolling the recursion gives
the closed form  m_n(y) = sum_i w_i K((y - Y_i)/h_i)/h_i phi(X_i)  with the
ledger weights w_i from :mod:`resave.sequences`; ``evaluate_at`` uses it for
arbitrary y, and the per-sample-point histories the state carries are the
same quantities maintained incrementally.

``batch_estimate`` is the non-streaming baseline: a plain 1/n kernel
average with a single bandwidth.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoDataError
from .kernels import EPANECHNIKOV, evaluate
from .linalg import triu_indices
from .sequences import DEFAULT_PLAN, bandwidth, build_ledger, empty_ledger, step_size


@dataclass(frozen=True)
class Observation:
    """One (response, predictor-vector) pair."""

    y: float
    x: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 1:
            raise ValueError(f"predictor vector must be 1-D, got shape {x.shape}")
        if not np.isfinite(x).all() or not np.isfinite(self.y):
            raise ValueError("observation has non-finite entries")
        x.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", float(self.y))


@dataclass(frozen=True)
class EvalPoint:
    """Moment estimates at one response value."""

    y: float
    density: float
    first_moment: np.ndarray  # (d,)
    second_moment: np.ndarray  # (d, d), symmetric


def packed_outer(x, iu):
    """Upper triangle of the outer product x x', row-major packed."""
    return x[iu[0]] * x[iu[1]]


def unpack_rows(d, rows):
    """Expand packed upper triangles (..., d(d+1)/2) to full (..., d, d)."""
    rows = np.asarray(rows)
    iu = triu_indices(d)
    out = np.zeros(rows.shape[:-1] + (d, d))
    out[..., iu[0], iu[1]] = rows
    out[..., iu[1], iu[0]] = rows
    return out


def to_arrays(observations):
    """Stack a nonempty observation sequence into (ys, xs) arrays."""
    obs = list(observations)
    if not obs:
        raise NoDataError("no observations")
    d = obs[0].x.shape[0]
    ys = np.empty(len(obs))
    xs = np.empty((len(obs), d))
    for i, o in enumerate(obs):
        if o.x.shape[0] != d:
            raise ValueError(f"observation {i} has dimension {o.x.shape[0]}, expected {d}")
        ys[i] = o.y
        xs[i] = o.x
    return ys, xs


class RecursiveState:
    """Mutable streaming-estimator state.

    Single-writer: ``update`` mutates in place and returns ``self``.  The
    step/bandwidth schedules are indexed by the total number of absorbed
    observations, so a state carries its whole history (needed anyway for
    the per-sample-point moment values the assembly stage averages over).
    """

    def __init__(self, d, plan=DEFAULT_PLAN, kernel=EPANECHNIKOV):
        if d < 1:
            raise ValueError(f"predictor dimension must be >= 1, got {d}")
        self.d = int(d)
        self.plan = plan
        self.kernel = kernel
        self.n = 0
        self.ledger = empty_ledger()
        self._iu = triu_indices(self.d)
        self._npacked = self.d * (self.d + 1) // 2
        cap = 64
        self._ys = np.empty(cap)
        self._hs = np.empty(cap)
        self._xs = np.empty((cap, self.d))
        self._xx = np.empty((cap, self._npacked))
        self._density = np.empty(cap)
        self._first = np.empty((cap, self.d))
        self._second = np.empty((cap, self._npacked))

    # -- raw views over the absorbed prefix ---------------------------------
    @property
    def ys(self):
        return self._ys[: self.n]

    @property
    def xs(self):
        return self._xs[: self.n]

    @property
    def bandwidths(self):
        return self._hs[: self.n]

    @property
    def density(self):
        return self._density[: self.n]

    @property
    def first_moment(self):
        return self._first[: self.n]

    @property
    def second_moment_packed(self):
        return self._second[: self.n]

    def _ensure_capacity(self, need):
        cap = self._ys.shape[0]
        if need <= cap:
            return
        new = max(need, 2 * cap)
        for name in ("_ys", "_hs", "_xs", "_xx", "_density", "_first", "_second"):
            old = getattr(self, name)
            grown = np.empty((new,) + old.shape[1:])
            grown[: self.n] = old[: self.n]
            setattr(self, name, grown)

    def update(self, obs):
        """Absorb one observation; returns self."""
        x = np.asarray(obs.x, dtype=float)
        if x.shape != (self.d,):
            raise ValueError(f"predictor shape {x.shape} does not match d={self.d}")
        if not np.isfinite(x).all() or not np.isfinite(obs.y):
            raise ValueError("observation has non-finite entries")
        n = self.n
        i = n + 1
        step = step_size(i, self.plan)
        h = bandwidth(i, self.plan)
        keep = 1.0 - step
        xx = packed_outer(x, self._iu)

        if n:
            kv = evaluate(self.kernel, (self._ys[:n] - obs.y) / h) / h
            dv = self._density[:n]
            dv *= keep
            dv += step * kv
            fv = self._first[:n]
            fv *= keep
            fv += np.outer(step * kv, x)
            sv = self._second[:n]
            sv *= keep
            sv += np.outer(step * kv, xx)

        self._ensure_capacity(i)
        self._ys[n] = obs.y
        self._hs[n] = h
        self._xs[n] = x
        self._xx[n] = xx
        self.ledger = self.ledger.extend(step)
        self.n = i

        f, g, G = self._closed_form(obs.y)
        self._density[n] = f
        self._first[n] = g
        self._second[n] = G
        return self

    def bulk_absorb(self, ys, xs):
        """Absorb a whole initial sample at once; returns self.

        Only valid on an empty state.  Fills the tracked histories with the
        closed-form ledger-weighted sums directly — the same values n
        sequential ``update`` calls produce, up to summation rounding —
        in one vectorized pass instead of n incremental ones.
        """
        if self.n:
            raise ValueError("bulk_absorb needs an empty state")
        ys = np.asarray(ys, dtype=float)
        xs = np.asarray(xs, dtype=float)
        n = ys.shape[0]
        if n == 0:
            raise NoDataError("no observations")
        if xs.shape != (n, self.d):
            raise ValueError(f"predictor shape {xs.shape} does not match d={self.d}")
        if not (np.isfinite(ys).all() and np.isfinite(xs).all()):
            raise ValueError("observations have non-finite entries")
        self._ensure_capacity(n)
        self._ys[:n] = ys
        self._xs[:n] = xs
        self._xx[:n] = xs[:, self._iu[0]] * xs[:, self._iu[1]]
        idx = np.arange(1, n + 1, dtype=float)
        self._hs[:n] = idx ** -self.plan.c1
        self.ledger = build_ledger(np.minimum(self.plan.gamma_scale / idx, 1.0))
        hs = self._hs[:n]
        kv = evaluate(self.kernel, (ys[:, None] - ys[None, :]) / hs[None, :]) / hs
        coeff = kv * self.ledger.weights
        self._density[:n] = coeff.sum(axis=1)
        self._first[:n] = coeff @ self._xs[:n]
        self._second[:n] = coeff @ self._xx[:n]
        self.n = n
        return self

    def _closed_form(self, y):
        """Ledger-weighted sums at an arbitrary response value."""
        n = self.n
        hs = self._hs[:n]
        kv = evaluate(self.kernel, (y - self._ys[:n]) / hs) / hs
        coeff = self.ledger.weights * kv
        return coeff.sum(), coeff @ self._xs[:n], coeff @ self._xx[:n]

    def evaluate_at(self, y):
        """Closed-form moment estimates at y (any real, not only samples)."""
        if self.n == 0:
            raise NoDataError("state has absorbed no observations")
        if not np.isfinite(y):
            raise ValueError(f"evaluation point must be finite, got {y}")
        f, g, G = self._closed_form(float(y))
        return EvalPoint(float(y), float(f), g, unpack_rows(self.d, G))

    def point(self, i):
        """Tracked estimates at sample point i (0-based absorption order)."""
        if not 0 <= i < self.n:
            raise IndexError(f"point index {i} out of range for n={self.n}")
        return EvalPoint(
            float(self._ys[i]),
            float(self._density[i]),
            self._first[i].copy(),
            unpack_rows(self.d, self._second[i]),
        )


def batch_estimate(observations, h, kernel, y):
    """Fixed-bandwidth 1/n kernel average of the three moments at y."""
    f, g, G = batch_estimate_many(observations, h, kernel, np.array([y]))
    d = g.shape[1]
    return EvalPoint(float(y), float(f[0]), g[0], unpack_rows(d, G[0]))


def batch_estimate_many(observations, h, kernel, ys_eval):
    """Batch moments at many evaluation points at once.

    Returns (density (m,), first (m, d), second packed (m, d(d+1)/2)).
    """
    ys, xs = to_arrays(observations)
    return batch_moments_arrays(ys, xs, h, kernel, np.asarray(ys_eval, dtype=float))


def batch_moments_arrays(ys, xs, h, kernel, ys_eval):
    """Array-in, array-out core of :func:`batch_estimate_many`."""
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    n, d = xs.shape
    iu = triu_indices(d)
    xx = xs[:, iu[0]] * xs[:, iu[1]]
    kv = evaluate(kernel, (ys_eval[:, None] - ys[None, :]) / h) / (h * n)
    return kv.sum(axis=1), kv @ xs, kv @ xx
