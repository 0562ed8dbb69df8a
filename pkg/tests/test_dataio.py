import io

import numpy as np
import pytest

from ssoe.dataio import read_series_csv, write_rows, write_series_csv
from ssoe.errors import InputError


def test_write_read_round_trip(tmp_path, rng):
    y = rng.normal(size=30)
    p = tmp_path / "s.csv"
    write_series_csv(p, y)
    np.testing.assert_array_equal(read_series_csv(p), y)
    np.testing.assert_array_equal(read_series_csv(p, "value"), y)
    np.testing.assert_array_equal(read_series_csv(p, 0), np.arange(1, 31))


def test_missing_values_become_nan(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("index,value\n1,1.5\n2,\n3,NA\n4,2\n")
    y = read_series_csv(p)
    assert y[0] == 1.5 and np.isnan(y[1]) and np.isnan(y[2]) and y[3] == 2


def test_bad_value_reports_line(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text("index,value\n1,1.0\n2,2.0\n3,abc\n")
    with pytest.raises(InputError, match="line 4"):
        read_series_csv(p)


@pytest.mark.parametrize("text, column", [
    ("", None),
    ("index,value\n", None),
    ("index,value\n1,2\n", "other"),
    ("index,value\n1,2\n", 5),
    ("index,value\n1\n", None),
])
def test_malformed_inputs(tmp_path, text, column):
    p = tmp_path / "s.csv"
    p.write_text(text)
    with pytest.raises(InputError):
        read_series_csv(p, column)


def test_missing_file(tmp_path):
    with pytest.raises(InputError):
        read_series_csv(tmp_path / "nope.csv")


def test_write_rows_repr_floats():
    buf = io.StringIO()
    write_rows(buf, [{"a": 0.1, "b": 2}], ["a", "b"])
    assert buf.getvalue() == "a,b\n0.1,2\n"
