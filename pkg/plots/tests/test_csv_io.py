import numpy as np
import pytest

from catamp_plots.csv_io import (MalformedCsvError, find_lobes,
                                 load_trajectory_csv, load_wigner_csv)

WIGNER_OK = """\
p\\q,-1,0,1
-1,0.1,0.2,0.1
0,0.2,0.3,0.2
1,0.1,0.2,0.1
"""

TRAJ_OK = """\
t_over_T,re_gtilde,im_gtilde,abs_gtilde,g_over_omega
0,0.5,0,0.5,0.5
0.5,0,-0.5,0.5,0.5
1,-0.5,0,0.5,0.5
"""


def test_load_wigner_round_trip(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text(WIGNER_OK)
    data = load_wigner_csv(path)
    np.testing.assert_array_equal(data.q_axis, [-1, 0, 1])
    np.testing.assert_array_equal(data.p_axis, [-1, 0, 1])
    assert data.values[1, 1] == 0.3


def test_load_wigner_empty_file(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("")
    with pytest.raises(MalformedCsvError, match="empty"):
        load_wigner_csv(path)


def test_load_wigner_names_bad_row(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("p\\q,-1,0,1\n-1,0.1,0.2\n")
    with pytest.raises(MalformedCsvError, match="row 2"):
        load_wigner_csv(path)
    path.write_text("p\\q,-1,0,1\n-1,0.1,0.2,oops\n")
    with pytest.raises(MalformedCsvError, match="row 2"):
        load_wigner_csv(path)


def test_load_wigner_rejects_foreign_header(tmp_path):
    path = tmp_path / "w.csv"
    path.write_text("time,value\n0,1\n")
    with pytest.raises(MalformedCsvError, match="header"):
        load_wigner_csv(path)


def test_load_trajectory(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(TRAJ_OK)
    data = load_trajectory_csv(path)
    np.testing.assert_array_equal(data.t_over_period, [0, 0.5, 1])
    np.testing.assert_allclose(data.gtilde_abs, 0.5)
    assert data.g is not None


def test_load_trajectory_without_g_column(tmp_path):
    path = tmp_path / "t.csv"
    rows = [ln.rsplit(",", 1)[0] for ln in TRAJ_OK.strip().splitlines()]
    path.write_text("\n".join(rows) + "\n")
    data = load_trajectory_csv(path)
    assert data.g is None


def test_load_trajectory_names_bad_row(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text(TRAJ_OK + "2,nan,oops,1,1\n")
    with pytest.raises(MalformedCsvError, match="row 5"):
        load_trajectory_csv(path)


def test_find_lobes_two_gaussians(tmp_path):
    axis = np.linspace(-6, 6, 97)
    qq, pp = np.meshgrid(axis, axis)
    values = (np.exp(-(qq - 0.5) ** 2 - (pp - 4.0) ** 2)
              + np.exp(-(qq + 0.5) ** 2 - (pp + 4.0) ** 2))
    from catamp_plots.csv_io import WignerData
    lobes = find_lobes(WignerData(axis, axis, values))
    ps = sorted(p for _, p in lobes)
    assert ps[0] == pytest.approx(-4.0, abs=0.2)
    assert ps[1] == pytest.approx(4.0, abs=0.2)
