"""CSV ingestion and the held-out real-data comparison."""
import gzip

import numpy as np
import pytest

from resave.errors import EmptyDatasetError, InsufficientDataError, SchemaError
from resave.ingestion import HoldoutReport, holdout_eval, load_csv

MESSY = """y,a,b
1.0,2.0,3.0
NA,1.0,1.0
4.0,5.0
inf,0.0,1.0
2.5,-1.0,0.5
"""


@pytest.fixture()
def messy_csv(tmp_path):
    path = tmp_path / "messy.csv"
    path.write_text(MESSY)
    return str(path)


def test_load_skips_bad_rows_and_records_lines(messy_csv):
    ds = load_csv(messy_csv, response="y")
    assert ds.n == 2
    assert ds.column_names == ("y", "a", "b")
    assert np.array_equal(ds.rows, [[1.0, 2.0, 3.0], [2.5, -1.0, 0.5]])
    # 1-based file line numbers: unparsable, short, non-finite
    assert ds.skipped_lines == (3, 4, 5)


def test_column_selection_by_name_and_index_agree(messy_csv):
    by_name = load_csv(messy_csv, response="y", predictors=["a", "b"])
    by_index = load_csv(messy_csv, response=0, predictors=[1, 2])
    assert by_name.response_index == by_index.response_index == 0
    assert by_name.predictor_indices == by_index.predictor_indices == (1, 2)
    assert np.array_equal(by_name.predictors(), by_index.predictors())
    assert np.array_equal(by_name.response(), by_index.response())


def test_default_predictors_are_all_other_columns(messy_csv):
    ds = load_csv(messy_csv, response="a")
    assert ds.predictor_indices == (0, 2)
    assert ds.dim == 2


def test_observations_round_trip(messy_csv):
    ds = load_csv(messy_csv, response="y")
    obs = ds.observations()
    assert len(obs) == 2
    assert obs[0].y == 1.0 and np.array_equal(obs[0].x, [2.0, 3.0])
    assert obs[1].y == 2.5 and np.array_equal(obs[1].x, [-1.0, 0.5])


def test_gzip_round_trip(tmp_path, messy_csv):
    gz = tmp_path / "messy.csv.gz"
    with gzip.open(gz, "wt", encoding="utf-8") as fh:
        fh.write(MESSY)
    plain = load_csv(messy_csv, response="y")
    packed = load_csv(str(gz), response="y")
    assert np.array_equal(plain.rows, packed.rows)
    assert plain.skipped_lines == packed.skipped_lines


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_csv(str(tmp_path / "nope.csv"), response="y")


def test_schema_errors(messy_csv, tmp_path):
    with pytest.raises(SchemaError):
        load_csv(messy_csv, response="zz")
    with pytest.raises(SchemaError):
        load_csv(messy_csv, response=7)
    with pytest.raises(SchemaError):
        load_csv(messy_csv, response="y", predictors=["y", "a"])
    with pytest.raises(SchemaError):
        load_csv(messy_csv, response="y", predictors=[1, 1])
    with pytest.raises(SchemaError):
        load_csv(messy_csv, response="y", predictors=[])
    dup = tmp_path / "dup.csv"
    dup.write_text("y,a,a\n1.0,2.0,3.0\n")
    with pytest.raises(SchemaError):
        load_csv(str(dup), response="y", predictors=["a"])
    # ambiguous only by name; index selection still works
    ds = load_csv(str(dup), response="y", predictors=[1])
    assert ds.predictor_indices == (1,)


def test_empty_inputs(tmp_path):
    blank = tmp_path / "blank.csv"
    blank.write_text("")
    with pytest.raises(EmptyDatasetError):
        load_csv(str(blank), response="y")
    header_only = tmp_path / "header.csv"
    header_only.write_text("y,a\nNA,1\n")
    with pytest.raises(EmptyDatasetError):
        load_csv(str(header_only), response="y")


# --- held-out evaluation on the bundled-style table ------------------------

@pytest.fixture(scope="module")
def standin(standin_csv):
    return load_csv(standin_csv, response="Glucose")


def test_standin_loads_clean(standin):
    assert standin.n == 2000
    assert standin.dim == 6
    assert standin.skipped_lines == ()
    assert "Glucose" not in [standin.column_names[i] for i in standin.predictor_indices]


def test_holdout_requires_a_holdout(standin):
    with pytest.raises(InsufficientDataError):
        holdout_eval(standin, 1000, 1000, "save-nr")


def test_holdout_reference_shape_checked(standin):
    with pytest.raises(ValueError):
        holdout_eval(standin, 100, 0, "save-nr", reference=[1.0, 0.0])


def test_holdout_self_comparison_is_perfect(standin):
    base = holdout_eval(standin, 100, 50, "save-nr")
    again = holdout_eval(standin, 100, 50, "save-nr", reference=base.beta_hat)
    assert abs(again.r2i_mean - 1.0) < 1e-12
    assert again.r2i_std < 1e-12
    assert again.n_eval + again.n_undefined == standin.n - 150


def test_holdout_deterministic(standin):
    a = holdout_eval(standin, 100, 50, "save-r", seed=3)
    b = holdout_eval(standin, 100, 50, "save-r", seed=3)
    assert a == b
    c = holdout_eval(standin, 100, 50, "save-r", seed=4)
    assert c.beta_hat != a.beta_hat


def test_holdout_streaming_matches_batch(standin):
    # the two estimators land on nearly the same direction, so their
    # held-out per-observation scores agree closely
    rec = holdout_eval(standin, 100, 400, "save-r")
    bat = holdout_eval(standin, 100, 400, "save-nr")
    assert isinstance(rec, HoldoutReport)
    assert rec.n0 == 100 and rec.p == 400
    assert rec.r2i_mean > 0.9 and bat.r2i_mean > 0.9
    assert abs(rec.r2i_mean - bat.r2i_mean) < 0.01
    assert rec.reference == bat.reference
