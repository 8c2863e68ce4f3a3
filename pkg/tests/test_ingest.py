import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ivlasso.data import IntervalSample
from ivlasso.ingest import IngestError, ingest_csv, read_ohlc, write_bounds_wide


def write(tmp_path, text, name="data.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_bounds_wide_three_rows(tmp_path):
    p = write(tmp_path, "date,Y_L,Y_R,X1_L,X1_R\n2020-01-01,1,2,0.5,1.5\n2020-01-02,2,3,1,2\n2020-01-03,0,4,-1,1\n")
    s = ingest_csv(p)
    assert (s.T, s.p) == (3, 1) and s.column_names == ("X1",)
    np.testing.assert_array_equal(s.responses, [[1, 2], [2, 3], [0, 4]])
    np.testing.assert_array_equal(s.regressors[:, 0], [[0.5, 1.5], [1, 2], [-1, 1]])
    assert tuple(s.dates) == ("2020-01-01", "2020-01-02", "2020-01-03")


def test_intercepts_added(tmp_path):
    p = write(tmp_path, "Y_L,Y_R,X1_L,X1_R\n1,2,0,1\n3,5,1,1\n")
    s = ingest_csv(p, add_intercepts=True)
    assert s.column_names[:2] == ("const", "I0") and s.p == 3
    np.testing.assert_array_equal(s.regressors[:, 1], [[-0.5, 0.5]] * 2)


def test_reversed_bounds_kept(tmp_path):
    p = write(tmp_path, "Y_L,Y_R,X_L,X_R\n2,1,3,-3\n")
    s = ingest_csv(p)
    assert tuple(s.responses[0]) == (2, 1) and tuple(s.regressors[0, 0]) == (3, -3)


def test_custom_response(tmp_path):
    p = write(tmp_path, "A_L,A_R,B_L,B_R\n1,2,3,4\n")
    s = ingest_csv(p, response="B")
    assert s.column_names == ("A",) and tuple(s.responses[0]) == (3, 4)


def test_missing_right_bound(tmp_path):
    p = write(tmp_path, "Y_L,X_L,X_R\n1,2,3\n")
    with pytest.raises(IngestError, match="Y_R"):
        ingest_csv(p)
    p = write(tmp_path, "Y_L,Y_R,X_L\n1,2,3\n")
    with pytest.raises(IngestError, match="X_R"):
        ingest_csv(p)


def test_non_numeric(tmp_path):
    p = write(tmp_path, "Y_L,Y_R,X_L,X_R\n1,2,3,4\n1,abc,3,4\n")
    with pytest.raises(IngestError, match=r"row 3.*Y_R.*abc"):
        ingest_csv(p)
    p = write(tmp_path, "Y_L,Y_R,X_L,X_R\n1,nan,3,4\n")
    with pytest.raises(IngestError, match="non-finite"):
        ingest_csv(p)


def test_dates_checked(tmp_path):
    p = write(tmp_path, "date,Y_L,Y_R,X_L,X_R\n2020-01-02,1,2,3,4\n2020-01-01,1,2,3,4\n")
    with pytest.raises(IngestError, match="row 3.*not sorted"):
        ingest_csv(p)
    p = write(tmp_path, "date,Y_L,Y_R,X_L,X_R\n2020-01-01,1,2,3,4\n2020-01-02,1,2,3,4\n2020-01-02,1,2,3,4\n")
    with pytest.raises(IngestError, match="row 4.*duplicate"):
        ingest_csv(p)


def test_ragged_and_empty(tmp_path):
    with pytest.raises(IngestError, match="row 2"):
        ingest_csv(write(tmp_path, "Y_L,Y_R,X_L,X_R\n1,2,3\n"))
    with pytest.raises(IngestError, match="no data"):
        ingest_csv(write(tmp_path, "Y_L,Y_R,X_L,X_R\n"))
    with pytest.raises(IngestError):
        ingest_csv(write(tmp_path, "Y_L,Y_R\n1,2\n"))
    with pytest.raises(IngestError, match="schema"):
        ingest_csv(write(tmp_path, "Y_L,Y_R\n1,2\n"), schema="parquet")


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(1, 3), st.data())
def test_round_trip(tmp_path_factory, T, p, data):
    y = np.array(data.draw(st.lists(finite, min_size=2 * T, max_size=2 * T))).reshape(T, 2)
    z = np.array(data.draw(st.lists(finite, min_size=2 * T * p, max_size=2 * T * p))).reshape(T, p, 2)
    dates = tuple(f"2021-01-{d + 1:02d}" for d in range(T))
    s = IntervalSample(y, z, tuple(f"x{j}" for j in range(p)), "Y", dates)
    path = tmp_path_factory.mktemp("rt") / "s.csv"
    write_bounds_wide(s, path)
    back = ingest_csv(path)
    assert np.array_equal(back.responses, s.responses) and np.array_equal(back.regressors, s.regressors)
    assert back.column_names == s.column_names and tuple(back.dates) == dates


def test_interval_long(tmp_path):
    p = write(tmp_path, "date,series,left,right\n"
                        "d1,Y,1,2\nd1,X,0,1\nd2,Y,2,4\nd2,X,1,3\n")
    s = ingest_csv(p, schema="interval-long")
    assert s.column_names == ("X",) and tuple(s.dates) == ("d1", "d2")
    np.testing.assert_array_equal(s.responses, [[1, 2], [2, 4]])
    np.testing.assert_array_equal(s.regressors[:, 0], [[0, 1], [1, 3]])


def test_interval_long_errors(tmp_path):
    p = write(tmp_path, "date,series,left,right\nd1,Y,1,2\nd1,X,0,1\nd2,Y,2,4\n")
    with pytest.raises(IngestError, match="'X'.*d2"):
        ingest_csv(p, schema="interval-long")
    p = write(tmp_path, "date,series,left,right\nd2,Y,1,2\nd1,Y,0,1\n")
    with pytest.raises(IngestError, match="row 3"):
        ingest_csv(p, schema="interval-long")


def test_ohlc_return_intervals(tmp_path):
    p = write(tmp_path, "date,open,high,low,close\nd1,100,101,99,100\nd2,100,110,95,105\n", "SPX.csv")
    panel = read_ohlc(p)
    assert panel.assets == ("SPX",) and panel.dates == ("d2",)
    np.testing.assert_allclose(panel.intervals[0, 0], [math.log(0.95), math.log(1.10)], rtol=1e-15)
    assert panel.close_returns[0, 0] == pytest.approx(math.log(1.05))


def test_ohlc_multi_asset_sample(tmp_path):
    p = write(tmp_path, "date,asset,open,high,low,close\n"
                        "d1,IDX,1,1,1,100\nd2,IDX,1,104,98,102\nd1,A,1,1,1,10\nd2,A,1,11,9,10\n")
    s = ingest_csv(p, schema="ohlc", response="IDX")
    assert s.column_names == ("A",)
    np.testing.assert_allclose(s.responses[0], [math.log(0.98), math.log(1.04)])
    np.testing.assert_allclose(s.regressors[0, 0], [math.log(0.9), math.log(1.1)])


def test_ohlc_bad_prices(tmp_path):
    p = write(tmp_path, "date,high,low,close\nd1,1,1,1\nd2,1,0,1\n")
    with pytest.raises(IngestError, match="row 3.*positive"):
        read_ohlc(p)
    p = write(tmp_path, "date,high,low,close\nd1,1,1,1\n")
    with pytest.raises(IngestError, match="two dates"):
        read_ohlc(p)
