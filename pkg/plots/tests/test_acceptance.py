"""Secondary acceptance: render the fig1/fig2 bundled outputs end to end.

The simulator is driven strictly through its command line; these tests touch
nothing but the CSV files it emits.  The fig2 run uses reduced numerics
(dim 128, 256 steps per period), which leaves the lobe geometry checked here
untouched.
"""

import subprocess
import sys

import pytest

from catamp_plots.csv_io import find_lobes, load_wigner_csv
from catamp_plots.render import render_trajectory, render_wigner


def _run_catamp(args):
    proc = subprocess.run([sys.executable, "-m", "catamp.cli", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


@pytest.fixture(scope="module")
def fig1_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig1")
    _run_catamp(["frame", "fig1", "--out-dir", str(out)])
    return out / "gtilde.csv"


@pytest.fixture(scope="module")
def fig2_outputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig2")
    _run_catamp([
        "simulate", "fig2", "--out-dir", str(out),
        "--dim", "128", "--steps-per-period", "256",
        "--set", "outputs.wigner=amplified",
    ])
    return out


def test_fig1_trajectory_renders(fig1_csv, tmp_path):
    image = render_trajectory(fig1_csv, tmp_path / "fig1.png")
    assert image.exists() and image.stat().st_size > 2000


def test_fig2_wigner_renders(fig2_outputs, tmp_path):
    csv = fig2_outputs / "wigner_amplified.csv"
    image = render_wigner(csv, tmp_path / "fig2b.png",
                          inset_region=(-2.0, 2.0, -2.0, 2.0))
    assert image.exists() and image.stat().st_size > 2000


def test_fig2_trajectory_renders(fig2_outputs, tmp_path):
    image = render_trajectory(fig2_outputs / "gtilde.csv",
                              tmp_path / "fig2traj.png")
    assert image.exists() and image.stat().st_size > 2000


def test_fig2_lobes_separated_along_p(fig2_outputs):
    # the amplified cat is tilted by ~pi/2: its lobes sit on the p axis, so
    # the peak separation must be dominated by p, not q
    data = load_wigner_csv(fig2_outputs / "wigner_amplified.csv")
    (q1, p1), (q2, p2) = find_lobes(data, exclusion_radius=3.0)
    assert abs(p1 - p2) > 10.0
    assert abs(p1 - p2) > 3.0 * abs(q1 - q2)
