"""Built-in internal consistency checks.

These re-derive a handful of core identities through deliberately separate
code paths — inline kernel arithmetic, direct weight products, matrix
reconstruction — and compare against the estimator's own results.  They are
meant to be run in an installed environment (``resave selfcheck``) to catch
a miscompiled or corrupted install, not to replace the test suite.

The ``kernel`` argument of :func:`run_selfcheck` exists as a fault-injection
seam: the reference side of the recursion check hard-codes the default
kernel's arithmetic, so passing a kernel whose profile has been perturbed
must make that check fail.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import EPANECHNIKOV
from .linalg import SymMatrix, inv_sqrt, sym_eigen
from .recursive import Observation, RecursiveState
from .save import fit_batch, fit_recursive
from .sequences import SequencePlan, build_ledger


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name, discrepancy, tol):
    return CheckResult(
        name, bool(discrepancy <= tol), f"max discrepancy {discrepancy:.3e} (tol {tol:.0e})"
    )


def _check_parts(name, parts):
    """parts: (label, value, tolerance) triples; the binding one is reported."""
    passed = all(v <= t for _, v, t in parts)
    label, v, t = max(parts, key=lambda p: p[1] / p[2])
    return CheckResult(name, passed, f"{label} {v:.3e} (tol {t:.0e})")


def _reference_moments(ys, xs, c1, y_eval):
    """Closed-form moments with inline arithmetic, step 1/i, kernel 0.75(1-u^2)."""
    n = len(ys)
    w = np.empty(n)
    for i in range(n):
        acc = 1.0 / (i + 1)
        for k in range(i + 1, n):
            acc *= 1.0 - 1.0 / (k + 1)
        w[i] = acc
    d = xs.shape[1]
    f = 0.0
    g = np.zeros(d)
    big_g = np.zeros((d, d))
    for i in range(n):
        h = float(i + 1) ** -c1
        u = (y_eval - ys[i]) / h
        kv = 0.75 * (1.0 - u * u) if abs(u) <= 1.0 else 0.0
        coeff = w[i] * kv / h
        f += coeff
        g += coeff * xs[i]
        big_g += coeff * np.outer(xs[i], xs[i])
    return f, g, big_g


def _recursion_check(kernel, seed):
    rng = np.random.default_rng(seed)
    n, d = 60, 3
    plan = SequencePlan()
    ys = rng.standard_normal(n) * 2.0
    xs = rng.standard_normal((n, d))
    state = RecursiveState(d, plan, kernel)
    for i in range(n):
        state.update(Observation(ys[i], xs[i]))
    worst = 0.0
    for y in list(ys) + [-1.2, 0.0, 0.7]:
        got = state.evaluate_at(float(y))
        f, g, big_g = _reference_moments(ys, xs, plan.c1, float(y))
        worst = max(
            worst,
            abs(got.density - f),
            float(np.abs(got.first_moment - g).max()),
            float(np.abs(got.second_moment - big_g).max()),
        )
    for i in range(n):
        pt = state.point(i)
        f, g, big_g = _reference_moments(ys, xs, plan.c1, pt.y)
        worst = max(
            worst,
            abs(pt.density - f),
            float(np.abs(pt.first_moment - g).max()),
            float(np.abs(pt.second_moment - big_g).max()),
        )
    return _check("recursion-vs-reference", worst, 1e-10)


def _weight_mass_check():
    n = 10_000
    ledger = build_ledger(1.0 / i for i in range(1, n + 1))
    mass_gap = abs(ledger.weights.sum() - (1.0 - ledger.remaining_mass))
    flat_gap = float(np.abs(ledger.weights * n - 1.0).max())
    return _check_parts(
        "weight-mass-identity",
        [("mass gap", mass_gap, 1e-12), ("relative gap to 1/n", flat_gap, 1e-11)],
    )


def _bridge_check(seed):
    rng = np.random.default_rng(seed)
    n, d = 150, 3
    plan = SequencePlan(c1=0.0)
    xs = rng.standard_normal((n, d))
    ys = xs[:, 0] + 0.5 * rng.standard_normal(n)
    data = [Observation(ys[i], xs[i]) for i in range(n)]
    rec = fit_recursive(data, plan)
    bat = fit_batch(data, h=1.0, plan=plan)
    gap = float(
        np.abs(rec.save_matrix.matrix.full() - bat.save_matrix.matrix.full()).max()
    )
    return _check("constant-bandwidth-bridge", gap, 1e-10)


def _eigen_check(seed):
    rng = np.random.default_rng(seed)
    d = 8
    a = rng.standard_normal((d, d))
    m = SymMatrix.from_full(a + a.T)
    vals, vecs = sym_eigen(m)
    full = m.full()
    recon = np.abs(vecs @ np.diag(vals) @ vecs.T - full).max() / np.abs(full).max()
    ortho = np.abs(vecs.T @ vecs - np.eye(d)).max()
    spd = SymMatrix.from_full(a.T @ a + 0.1 * np.eye(d))
    w = inv_sqrt(spd).full()
    whiten = np.abs(w @ spd.full() @ w - np.eye(d)).max()
    return _check_parts(
        "eigen-reconstruction",
        [
            ("relative reconstruction error", float(recon), 1e-9),
            ("orthonormality defect", float(ortho), 1e-10),
            ("whitening defect", float(whiten), 1e-8),
        ],
    )


def run_selfcheck(kernel=EPANECHNIKOV, seed=20260822):
    """Run all internal checks; returns a list of CheckResult."""
    return [
        _recursion_check(kernel, seed),
        _weight_mass_check(),
        _bridge_check(seed + 1),
        _eigen_check(seed + 2),
    ]
