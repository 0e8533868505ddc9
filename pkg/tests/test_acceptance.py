"""Project acceptance gate.

One test per headline claim, each announcing its verdict on a single
``ACCEPTANCE n: PASS/FAIL`` line even under captured output.  The heavy
replication runs are shared through module-scoped fixtures; everything is
seeded, so reruns are bit-for-bit identical apart from wall times.
"""
import time

import numpy as np
import pytest

from oracles import weights_direct
from resave.experiments import (
    MODEL1,
    MODEL2,
    generate,
    r_squared,
    run_replications,
    run_timing,
)
from resave.linalg import SymMatrix, inv_sqrt, sample_covariance, sym_eigen
from resave.recursive import Observation, RecursiveState, unpack_rows
from resave.save import (
    assemble_save,
    compute_ratios,
    fit_batch,
    fit_recursive,
    update_fit,
)
from resave.sequences import SequencePlan, build_ledger, truncation_level

SEED = 7  # root seed for every replicated run in this file


@pytest.fixture()
def announce(capsys):
    def _announce(num, ok, detail=""):
        tail = f"  ({detail})" if detail else ""
        with capsys.disabled():
            print(f"\nACCEPTANCE {num}: {'PASS' if ok else 'FAIL'}{tail}")
    return _announce


@pytest.fixture(scope="module")
def model1_table():
    t0 = time.perf_counter()
    report = run_replications(MODEL1, 100, 400, 200, "save-r", seed=SEED, n_jobs=1)
    return report, time.perf_counter() - t0


@pytest.fixture(scope="module")
def model2_table():
    runs = {}
    for estimator in ("save_r", "save_nr"):
        for p in (100, 400):
            runs[estimator, p] = run_replications(
                MODEL2, 100, p, 200, estimator, seed=SEED, n_jobs=1
            )
    return runs


def _skewness(values):
    v = np.asarray(values, dtype=float)
    c = v - v.mean()
    return float(np.mean(c**3) / np.mean(c**2) ** 1.5)


def test_criterion_1_model1_streaming_accuracy(model1_table, announce):
    report, elapsed = model1_table
    ok = (
        report.failures == 0
        and report.r2_mean >= 0.98
        and report.r2_std <= 0.02
        and elapsed <= 600.0
    )
    announce(1, ok, f"mean={report.r2_mean:.5f} std={report.r2_std:.5f} "
                    f"time={elapsed:.0f}s")
    assert report.failures == 0
    assert report.r2_mean >= 0.98
    assert report.r2_std <= 0.02
    assert elapsed <= 600.0


def test_criterion_2_model2_streaming_accuracy(model2_table, announce):
    report = model2_table["save_r", 400]
    ok = report.failures == 0 and report.r2_mean >= 0.99
    announce(2, ok, f"mean={report.r2_mean:.5f} std={report.r2_std:.5f}")
    assert report.failures == 0
    assert report.r2_mean >= 0.99


def test_criterion_3_streaming_at_least_as_accurate(model2_table, announce):
    margins = {
        p: model2_table["save_r", p].r2_mean - model2_table["save_nr", p].r2_mean
        for p in (100, 400)
    }
    ok = all(m >= 0.0 for m in margins.values())
    announce(3, ok, " ".join(f"p={p}: margin={m:+.5f}" for p, m in margins.items()))
    for p, m in margins.items():
        assert m >= 0.0, f"streaming mean fell below batch mean at p={p}"


def test_criterion_4_streaming_update_cost_ratio(announce):
    (row,) = run_timing(MODEL1, 100, [400], reps=5, seed=3)
    ok = row.ratio < 0.5
    announce(4, ok, f"ratio={row.ratio:.3f}")
    assert row.ratio < 0.5


def test_criterion_5_sequential_equals_closed_form(announce):
    t0 = time.perf_counter()
    worst_point = 0.0
    worst_save = 0.0
    for child in np.random.SeedSequence(505).spawn(20):
        rng = np.random.default_rng(child)
        n = int(rng.integers(20, 201))
        n0 = int(rng.integers(6, n))
        data = generate(MODEL1, n, rng)
        ys = np.array([o.y for o in data])
        xs = np.array([o.x for o in data])

        # one-at-a-time recursion vs the explicit weighted-sum form
        state = RecursiveState(5)
        for obs in data:
            state.update(obs)
        weights, _ = weights_direct([1.0 / i for i in range(1, n + 1)])
        hs = np.arange(1, n + 1, dtype=float) ** -0.2
        ker = 0.75 * np.clip(1.0 - ((ys[:, None] - ys[None, :]) / hs) ** 2, 0.0, None)
        coeff = ker / hs * weights
        outer = xs[:, :, None] * xs[:, None, :]
        worst_point = max(
            worst_point,
            np.abs(coeff.sum(axis=1) - state.density).max(),
            np.abs(coeff @ xs - state.first_moment).max(),
            np.abs(np.einsum("ij,jkl->ikl", coeff, outer)
                   - unpack_rows(5, state.second_moment_packed)).max(),
        )

        # streaming continuation vs a fresh fit on the concatenation
        fit = fit_recursive(data[:n0], standardize=False)
        for obs in data[n0:]:
            update_fit(fit, obs)
        whole = fit_recursive(data, standardize=False)
        worst_save = max(
            worst_save,
            np.abs(fit.save_matrix.matrix.packed
                   - whole.save_matrix.matrix.packed).max(),
        )
    elapsed = time.perf_counter() - t0
    ok = worst_point < 1e-10 and worst_save < 1e-10 and elapsed <= 60.0
    announce(5, ok, f"moments={worst_point:.2e} save={worst_save:.2e} "
                    f"time={elapsed:.1f}s")
    assert worst_point < 1e-10
    assert worst_save < 1e-10
    assert elapsed <= 60.0


def test_criterion_6_degenerate_identities(announce):
    # all-zero predictors: conditional moments vanish, only the identity
    # survives in the average
    rng = np.random.default_rng(8)
    state = RecursiveState(4)
    for y in rng.standard_normal(25):
        state.update(Observation(y, np.zeros(4)))
    ratios = compute_ratios(state.density, state.first_moment,
                            state.second_moment_packed, truncation_level(25))
    identity_exact = np.array_equal(assemble_save(ratios).matrix.full(), np.eye(4))

    # harmonic steps with a constant bandwidth reduce to the batch formula
    plan0 = SequencePlan(c1=0.0)
    data = generate(MODEL1, 150, np.random.default_rng(9))
    rec = fit_recursive(data, plan=plan0, standardize=False)
    bat = fit_batch(data, h=1.0, plan=plan0, standardize=False)
    bridge_gap = np.abs(rec.save_matrix.matrix.packed
                        - bat.save_matrix.matrix.packed).max()

    # weight-mass identity at ten thousand steps
    n = 10_000
    harmonic = build_ledger(1.0 / i for i in range(1, n + 1))
    general = build_ledger(min(2.0 / i, 1.0) for i in range(1, n + 1))
    mass_gap = max(
        abs(harmonic.weights.sum() - (1.0 - harmonic.remaining_mass)),
        abs(general.weights.sum() - (1.0 - general.remaining_mass)),
    )

    ok = identity_exact and bridge_gap < 1e-10 and mass_gap < 1e-12
    announce(6, ok, f"identity={'exact' if identity_exact else 'NOT exact'} "
                    f"bridge={bridge_gap:.2e} mass={mass_gap:.2e}")
    assert identity_exact
    assert bridge_gap < 1e-10
    assert mass_gap < 1e-12


def test_criterion_7_error_shrinks_like_root_n(announce):
    gaps = {400: [], 1600: []}
    for child in np.random.SeedSequence(21).spawn(100):
        rng = np.random.default_rng(child)
        data = generate(MODEL1, 1600, rng)
        for n in gaps:
            fit = fit_recursive(data[:n], standardize=False)
            gaps[n].append(1.0 - r_squared(fit.directions.directions[:, 0],
                                           MODEL1.beta))
    med400 = float(np.median(gaps[400]))
    med1600 = float(np.median(gaps[1600]))
    ok = med1600 < 0.7 * med400
    announce(7, ok, f"median(1-R2): n=400 {med400:.5f}, n=1600 {med1600:.5f}, "
                    f"ratio {med1600 / med400:.3f}")
    assert med1600 < 0.7 * med400


def test_criterion_8_direction_error_not_skewed(announce):
    beta = MODEL1.beta
    scale = float(np.linalg.norm(beta))
    stats = []
    for child in np.random.SeedSequence(SEED).spawn(200):
        rng = np.random.default_rng(child)
        data = generate(MODEL1, 500, rng)
        fit = fit_recursive(data[:100], standardize=False)
        for obs in data[100:]:
            update_fit(fit, obs)
        bh = fit.directions.directions[:, 0]
        bh = bh * (scale / np.linalg.norm(bh))
        if float(bh @ beta) < 0.0:
            bh = -bh
        stats.append(np.sqrt(500.0) * (bh[0] - beta[0]) / scale)
    skew = _skewness(stats)
    ok = abs(skew) < 0.5
    announce(8, ok, f"skewness={skew:+.3f} over {len(stats)} replicates")
    assert abs(skew) < 0.5


def test_criterion_9_eigen_and_whitening_accuracy(announce):
    rng = np.random.default_rng(12)
    worst_recon = 0.0
    worst_white = 0.0
    for d in range(1, 11):
        a = rng.standard_normal((d, d))
        m = SymMatrix.from_full(a @ a.T + 0.1 * np.eye(d))
        vals, vecs = sym_eigen(m)
        full = m.full()
        recon = (vecs * vals) @ vecs.T
        worst_recon = max(
            worst_recon,
            np.linalg.norm(recon - full) / np.linalg.norm(full),
        )
        _, cov = sample_covariance(rng.standard_normal((80, d)))
        w = inv_sqrt(cov).full()
        worst_white = max(
            worst_white,
            np.linalg.norm(w @ cov.full() @ w - np.eye(d)),
        )
    ok = worst_recon < 1e-9 and worst_white < 1e-8
    announce(9, ok, f"reconstruction={worst_recon:.2e} whitening={worst_white:.2e}")
    assert worst_recon < 1e-9
    assert worst_white < 1e-8
