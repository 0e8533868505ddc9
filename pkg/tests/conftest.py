import pytest

from standin import write_csv


@pytest.fixture(scope="session")
def standin_csv(tmp_path_factory):
    """Diabetes-schema stand-in table, written once per session."""
    path = tmp_path_factory.mktemp("data") / "standin.csv"
    write_csv(str(path))
    return str(path)
