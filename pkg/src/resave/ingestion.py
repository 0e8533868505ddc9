"""CSV ingestion and held-out evaluation on real (non-simulated) data.

Files are plain CSV with one header line naming the columns; a ``.gz``
suffix means gzip-compressed.  Rows that cannot be used — wrong field
count, unparseable numbers, non-finite values — are skipped and their file
line numbers recorded, never silently dropped.

``holdout_eval`` mirrors the simulation protocol on a real table: fit on
the first n0 + p rows (streaming or batch), then score the fitted
direction on every remaining row via the per-observation squared-cosine
metric, against a reference direction.  Real data has no known truth, so
the default reference is the batch fit on the whole table.
"""
from __future__ import annotations

import csv
import gzip
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyDatasetError,
    InsufficientDataError,
    SchemaError,
    UndefinedForObservationError,
)
from .experiments import canonical_estimator, r_squared_projected
from .kernels import EPANECHNIKOV
from .recursive import Observation
from .save import Standardizer, fit_batch, fit_recursive, update_fit
from .sequences import DEFAULT_PLAN


@dataclass(frozen=True)
class Dataset:
    """A parsed table plus the chosen response/predictor columns."""

    column_names: tuple
    rows: np.ndarray = field(repr=False)  # (n, n_columns), all finite
    response_index: int
    predictor_indices: tuple
    skipped_lines: tuple  # 1-based file line numbers of rejected rows

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def dim(self):
        return len(self.predictor_indices)

    def response(self):
        return self.rows[:, self.response_index]

    def predictors(self):
        return self.rows[:, list(self.predictor_indices)]

    def observations(self):
        ys = self.response()
        xs = self.predictors()
        return [Observation(ys[i], xs[i]) for i in range(self.n)]


def _resolve_column(header, key):
    if isinstance(key, int):
        if not 0 <= key < len(header):
            raise SchemaError(f"column index {key} out of range for {len(header)} columns")
        return key
    hits = [i for i, name in enumerate(header) if name == key]
    if not hits:
        raise SchemaError(f"no column named {key!r}; header has {list(header)}")
    if len(hits) > 1:
        raise SchemaError(f"column name {key!r} is ambiguous (positions {hits})")
    return hits[0]


def load_csv(path, response, predictors=None):
    """Parse a CSV file into a :class:`Dataset`.

    ``response`` and each entry of ``predictors`` may be a column name or a
    0-based index; ``predictors=None`` selects every non-response column.
    """
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDatasetError(f"{path}: file is empty") from None
        header = tuple(name.strip() for name in header)
        width = len(header)
        rows = []
        skipped = []
        for lineno, record in enumerate(reader, start=2):
            if len(record) != width:
                skipped.append(lineno)
                continue
            try:
                vals = [float(cell) for cell in record]
            except ValueError:
                skipped.append(lineno)
                continue
            if not all(math.isfinite(v) for v in vals):
                skipped.append(lineno)
                continue
            rows.append(vals)
    if not rows:
        raise EmptyDatasetError(f"{path}: no usable data rows (skipped {len(skipped)})")

    ri = _resolve_column(header, response)
    if predictors is None:
        pi = tuple(i for i in range(width) if i != ri)
    else:
        pi = tuple(_resolve_column(header, k) for k in predictors)
    if ri in pi:
        raise SchemaError(f"response column {header[ri]!r} also listed as predictor")
    if len(set(pi)) != len(pi):
        raise SchemaError("duplicate predictor columns")
    if not pi:
        raise SchemaError("no predictor columns selected")
    return Dataset(header, np.array(rows), ri, pi, tuple(skipped))


@dataclass(frozen=True)
class HoldoutReport:
    """Per-observation accuracy of a fitted direction on held-out rows."""

    estimator: str
    n0: int
    p: int
    seed: object  # None = file order
    n_eval: int
    n_undefined: int
    r2i_mean: float
    r2i_std: float
    beta_hat: tuple
    reference: tuple


def holdout_eval(data, n0, p, estimator, seed=None, plan=DEFAULT_PLAN,
                 kernel=EPANECHNIKOV, reference=None):
    """Fit on the first n0 + p rows, score the direction on the rest.

    Rows are used in file order; pass an integer ``seed`` to shuffle the
    row order first.  ``reference=None`` compares against the batch fit on
    the full table (computed in file order either way).
    """
    estimator = canonical_estimator(estimator)
    obs = data.observations()
    n_total = len(obs)
    if n0 + p >= n_total:
        raise InsufficientDataError(
            f"need n0 + p < {n_total} rows to leave a holdout, got n0+p={n0 + p}"
        )
    if reference is None:
        ref = fit_batch(obs, kernel=kernel, plan=plan).directions.directions[:, 0]
    else:
        ref = np.asarray(reference, dtype=float)
        if ref.shape != (data.dim,):
            raise ValueError(f"reference shape {ref.shape} does not match d={data.dim}")
    if seed is not None:
        order = np.random.default_rng(seed).permutation(n_total)
        obs = [obs[i] for i in order]
    train, held = obs[: n0 + p], obs[n0 + p :]
    # one whitening for the whole training window, frozen during streaming,
    # shared by both estimator variants
    std = Standardizer.fit(np.array([o.x for o in train]))
    if estimator == "save_r":
        fit = fit_recursive(train[:n0], plan, kernel, standardize=std)
        for o in train[n0:]:
            update_fit(fit, o)
    else:
        fit = fit_batch(train, kernel=kernel, plan=plan, standardize=std)
    beta_hat = fit.directions.directions[:, 0]

    scores = []
    undefined = 0
    for o in held:
        try:
            scores.append(r_squared_projected(beta_hat, ref, o.x))
        except UndefinedForObservationError:
            undefined += 1
    mean = float(np.mean(scores)) if scores else float("nan")
    spread = float(np.std(scores, ddof=1)) if len(scores) > 1 else 0.0
    return HoldoutReport(
        estimator=estimator, n0=n0, p=p, seed=seed, n_eval=len(scores),
        n_undefined=undefined, r2i_mean=mean, r2i_std=spread,
        beta_hat=tuple(float(b) for b in beta_hat),
        reference=tuple(float(b) for b in ref),
    )
