"""Simulation models, accuracy metrics, and replication/timing harnesses.

Both benchmark models are single-index: d = 5 standard normal predictors,
true direction beta = (1, 1, 1, 1, 0)', standard normal additive noise.
Model 1 has a linear link, Model 2 a cubic one.  Accuracy of an estimated
direction is the squared cosine against the true direction, so 1 means the
span was recovered and the metric is blind to sign and length.

Replication runs draw independent generator streams for each replicate by
spawning children of one root seed, so reports are reproducible bit-for-bit
from (inputs, seed) no matter how many worker processes run the replicates.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .errors import EstimationError, UndefinedForObservationError
from .kernels import EPANECHNIKOV
from .recursive import Observation
from .save import fit_batch, fit_recursive, update_fit
from .sequences import DEFAULT_PLAN


@dataclass(frozen=True)
class ModelSpec:
    """Single-index simulation model Y = link(beta' X) + noise."""

    name: str
    dim: int
    beta: np.ndarray
    cubic: bool

    def __post_init__(self):
        b = np.asarray(self.beta, dtype=float)
        b.flags.writeable = False
        object.__setattr__(self, "beta", b)

    def response(self, t):
        """Noise-free link applied to the index value(s)."""
        t = np.asarray(t, dtype=float)
        out = t**3 if self.cubic else t
        return float(out) if out.ndim == 0 else out


MODEL1 = ModelSpec("model1", 5, np.array([1.0, 1.0, 1.0, 1.0, 0.0]), cubic=False)
MODEL2 = ModelSpec("model2", 5, np.array([1.0, 1.0, 1.0, 1.0, 0.0]), cubic=True)

_MODELS = {"1": MODEL1, "model1": MODEL1, "2": MODEL2, "model2": MODEL2}


def model_by_name(name):
    try:
        return _MODELS[str(name)]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; choose 1 or 2") from None


def make_rng(seed):
    return np.random.default_rng(seed)


def generate(model, n, rng):
    """Draw n observations.  Stream order: all of X first, then the noise."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    xs = rng.standard_normal((n, model.dim))
    noise = rng.standard_normal(n)
    ys = model.response(xs @ model.beta) + noise
    return [Observation(ys[i], xs[i]) for i in range(n)]


def r_squared(beta_hat, beta_ref):
    """Squared cosine between two directions (1 = same span)."""
    u = np.asarray(beta_hat, dtype=float)
    v = np.asarray(beta_ref, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"direction shapes differ: {u.shape} vs {v.shape}")
    uu = float(u @ u)
    vv = float(v @ v)
    if uu == 0.0 or vv == 0.0:
        raise ValueError("zero-length direction")
    uv = float(u @ v)
    return uv * uv / (uu * vv)


def r_squared_projected(beta_hat, beta_ref, x):
    """Per-observation agreement: squared cosine of the componentwise-scaled
    directions beta*x.  Undefined when either scaled vector vanishes."""
    u = np.asarray(beta_ref, dtype=float) * np.asarray(x, dtype=float)
    v = np.asarray(beta_hat, dtype=float) * np.asarray(x, dtype=float)
    uu = float(u @ u)
    vv = float(v @ v)
    if uu == 0.0 or vv == 0.0:
        raise UndefinedForObservationError(
            "componentwise-scaled direction vanished at this observation"
        )
    uv = float(u @ v)
    return uv * uv / (uu * vv)


ESTIMATORS = ("save_r", "save_nr")


def canonical_estimator(name):
    e = str(name).replace("-", "_")
    if e not in ESTIMATORS:
        raise ValueError(f"unknown estimator {name!r}; choose save-r or save-nr")
    return e


def resolve_jobs(n_jobs=None):
    """Worker count: explicit argument, else RESAVE_THREADS, else all cores."""
    if n_jobs is not None:
        n_jobs = int(n_jobs)
    else:
        env = os.environ.get("RESAVE_THREADS", "").strip()
        if env:
            n_jobs = int(env)
        else:
            n_jobs = os.cpu_count() or 1
    if n_jobs < 1:
        raise ValueError(f"worker count must be >= 1, got {n_jobs}")
    return n_jobs


@dataclass(frozen=True)
class ReplicationReport:
    """Accuracy summary over independent replicates.

    ``r2_values`` has one entry per successful replicate, in replicate
    order; everything except the wall-time fields is a pure function of the
    inputs and seed.
    """

    model: str
    estimator: str
    n0: int
    p: int
    reps: int
    seed: int
    failures: int
    r2_mean: float
    r2_std: float
    r2_values: tuple
    time_mean_s: float = field(compare=False)
    time_std_s: float = field(compare=False)


def _mean_std(vals):
    if not vals:
        return float("nan"), float("nan")
    if len(vals) == 1:
        return float(vals[0]), 0.0
    return float(np.mean(vals)), float(np.std(vals, ddof=1))


def _fit_direction(data, n0, p, estimator, plan, kernel, num_directions):
    """One replicate's estimate: the leading direction.

    The benchmark models draw X ~ N(0, I), i.e. standardized predictors by
    construction, so the fits run with standardize=False throughout.
    """
    if estimator == "save_r":
        fit = fit_recursive(data[:n0], plan, kernel, num_directions,
                            standardize=False)
        for obs in data[n0:]:
            update_fit(fit, obs)
        return fit.directions.directions[:, 0]
    fit = fit_batch(data, kernel=kernel, num_directions=num_directions, plan=plan,
                    standardize=False)
    return fit.directions.directions[:, 0]


def _one_replicate(model, n0, p, estimator, child_seed, plan, kernel, num_directions):
    rng = np.random.default_rng(child_seed)
    data = generate(model, n0 + p, rng)
    t0 = time.perf_counter()
    try:
        beta_hat = _fit_direction(data, n0, p, estimator, plan, kernel, num_directions)
    except EstimationError as exc:
        return None, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - t0
    return r_squared(beta_hat, model.beta), wall, None


def run_replications(model, n0, p, reps, estimator, seed, plan=DEFAULT_PLAN,
                     kernel=EPANECHNIKOV, num_directions=1, n_jobs=None):
    """Repeat the fit over fresh samples; summarize direction accuracy.

    The streaming estimator fits on the first n0 observations and absorbs
    the remaining p one at a time; the batch estimator fits once on all
    n0 + p.  Replicates that raise an EstimationError are counted in
    ``failures`` and excluded from the summaries.
    """
    estimator = canonical_estimator(estimator)
    if reps < 1:
        raise ValueError(f"need reps >= 1, got {reps}")
    if p < 0 or n0 < 1:
        raise ValueError(f"need n0 >= 1 and p >= 0, got n0={n0}, p={p}")
    children = np.random.SeedSequence(seed).spawn(reps)
    args = (model, n0, p, estimator)
    kw = (plan, kernel, num_directions)
    n_jobs = resolve_jobs(n_jobs)
    if n_jobs == 1:
        results = [_one_replicate(*args, c, *kw) for c in children]
    else:
        results = Parallel(n_jobs=n_jobs)(
            delayed(_one_replicate)(*args, c, *kw) for c in children
        )
    r2s = [r for r, _, err in results if err is None]
    walls = [w for _, w, err in results if err is None]
    r2_mean, r2_std = _mean_std(r2s)
    t_mean, t_std = _mean_std(walls)
    return ReplicationReport(
        model=model.name, estimator=estimator, n0=n0, p=p, reps=reps, seed=seed,
        failures=len(results) - len(r2s), r2_mean=r2_mean, r2_std=r2_std,
        r2_values=tuple(r2s), time_mean_s=t_mean, time_std_s=t_std,
    )


@dataclass(frozen=True)
class TimingResult:
    """Wall-clock comparison of the two estimators at one stream length."""

    n0: int
    p: int
    reps: int
    recursive_mean_s: float
    recursive_std_s: float
    batch_mean_s: float
    batch_std_s: float
    ratio: float  # recursive_mean_s / batch_mean_s


def _time_recursive(data, n0, p, plan, kernel, num_directions):
    t0 = time.perf_counter()
    fit = fit_recursive(data[:n0], plan, kernel, num_directions, standardize=False)
    for obs in data[n0 : n0 + p]:
        update_fit(fit, obs)
    return time.perf_counter() - t0


def _time_batch(data, n0, p, plan, kernel, num_directions):
    t0 = time.perf_counter()
    if p == 0:
        fit_batch(data[:n0], kernel=kernel, num_directions=num_directions,
                  plan=plan, standardize=False)
    else:
        for m in range(1, p + 1):
            fit_batch(data[: n0 + m], kernel=kernel,
                      num_directions=num_directions, plan=plan, standardize=False)
    return time.perf_counter() - t0


def run_timing(model, n0, p_values, reps=3, seed=0, plan=DEFAULT_PLAN,
               kernel=EPANECHNIKOV, num_directions=1):
    """Time streaming-absorption against repeated batch refits.

    The streaming side fits on n0 then absorbs p updates (full refreshed
    output after each); the batch side refits from scratch at every size
    n0+1 .. n0+p (p = 0 times a single fit at n0 on both sides).  Both
    sides see identical samples.  Monotonic timer; one untimed warm-up
    iteration runs first.
    """
    p_values = sorted(set(int(p) for p in p_values))
    if not p_values or p_values[0] < 0:
        raise ValueError(f"need a nonempty list of p >= 0, got {p_values}")
    if reps < 1:
        raise ValueError(f"need reps >= 1, got {reps}")
    children = np.random.SeedSequence(seed).spawn(reps)
    datasets = [
        generate(model, n0 + p_values[-1], np.random.default_rng(c)) for c in children
    ]
    p_warm = min(p_values[0], 25)
    _time_recursive(datasets[0], n0, p_warm, plan, kernel, num_directions)
    _time_batch(datasets[0], n0, p_warm, plan, kernel, num_directions)
    out = []
    for p in p_values:
        rec = [_time_recursive(d, n0, p, plan, kernel, num_directions) for d in datasets]
        bat = [_time_batch(d, n0, p, plan, kernel, num_directions) for d in datasets]
        rec_m, rec_s = _mean_std(rec)
        bat_m, bat_s = _mean_std(bat)
        out.append(
            TimingResult(n0, p, reps, rec_m, rec_s, bat_m, bat_s, rec_m / bat_m)
        )
    return out
