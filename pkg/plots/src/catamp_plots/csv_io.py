"""Readers for the simulator's CSV artifacts.

These scripts live on the far side of a file boundary: everything they know
about a run comes from the two documented CSV layouts (Wigner grids and frame
trajectories), never from simulator internals.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np


class MalformedCsvError(ValueError):
    """A CSV artifact failed to parse; the message names the offending row."""


@dataclass(frozen=True)
class WignerData:
    q_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray  # values[i, j] = W(q_axis[j], p_axis[i])


@dataclass(frozen=True)
class TrajectoryData:
    t_over_period: np.ndarray
    gtilde_re: np.ndarray
    gtilde_im: np.ndarray
    gtilde_abs: np.ndarray
    g: np.ndarray | None  # scheduled coupling, present in newer files


def load_wigner_csv(path) -> WignerData:
    """Parse the Wigner layout: header row = q axis, first column = p axis."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise MalformedCsvError(f"{path}: empty file")
    header = lines[0].split(",")
    if not header[0].startswith("p"):
        raise MalformedCsvError(
            f"{path}: row 1 is not a Wigner header (expected 'p\\q,...')"
        )
    try:
        q_axis = np.array([float(v) for v in header[1:]])
    except ValueError as exc:
        raise MalformedCsvError(f"{path}: row 1 has a non-numeric q value") from exc
    p_vals, rows = [], []
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(q_axis) + 1:
            raise MalformedCsvError(
                f"{path}: row {i} has {len(cells)} cells, expected "
                f"{len(q_axis) + 1}"
            )
        try:
            p_vals.append(float(cells[0]))
            rows.append([float(v) for v in cells[1:]])
        except ValueError as exc:
            raise MalformedCsvError(f"{path}: row {i} is not numeric") from exc
    if not rows:
        raise MalformedCsvError(f"{path}: no data rows")
    return WignerData(q_axis, np.array(p_vals), np.array(rows))


def load_trajectory_csv(path) -> TrajectoryData:
    """Parse the frame-trajectory layout (t/T, Re, Im, |gt|[, g])."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise MalformedCsvError(f"{path}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    required = ["t_over_T", "re_gtilde", "im_gtilde", "abs_gtilde"]
    if header[: len(required)] != required:
        raise MalformedCsvError(
            f"{path}: row 1 is not a trajectory header (expected "
            f"{','.join(required)}[,g_over_omega])"
        )
    has_g = len(header) > 4 and header[4] == "g_over_omega"
    cols = [[] for _ in header]
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise MalformedCsvError(
                f"{path}: row {i} has {len(cells)} cells, expected {len(header)}"
            )
        try:
            for store, cell in zip(cols, cells):
                store.append(float(cell))
        except ValueError as exc:
            raise MalformedCsvError(f"{path}: row {i} is not numeric") from exc
    if not cols[0]:
        raise MalformedCsvError(f"{path}: no data rows")
    return TrajectoryData(
        np.array(cols[0]), np.array(cols[1]), np.array(cols[2]),
        np.array(cols[3]), np.array(cols[4]) if has_g else None,
    )


def _box_blur(values: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return values
    kernel = np.ones(width) / width
    out = np.apply_along_axis(np.convolve, 1, values, kernel, mode="same")
    return np.apply_along_axis(np.convolve, 0, out, kernel, mode="same")


def find_lobes(data: WignerData, exclusion_radius: float = 2.0):
    """(q, p) locations of the two dominant coherent lobes of a cat grid.

    The grid is box-blurred over ~1 phase-space unit first: a cat's central
    interference fringes oscillate much faster than that and average away,
    while the Gaussian lobes survive.  Then greedy: global maximum, blank a
    disk, next maximum.  Works on the CSV values alone.
    """
    qq, pp = np.meshgrid(data.q_axis, data.p_axis)
    dq = float(np.median(np.diff(data.q_axis))) if len(data.q_axis) > 1 else 1.0
    width = max(1, int(round(1.2 / dq)))
    work = _box_blur(data.values, width)
    lobes = []
    for _ in range(2):
        idx = np.unravel_index(np.argmax(work), work.shape)
        q0, p0 = qq[idx], pp[idx]
        lobes.append((float(q0), float(p0)))
        mask = (qq - q0) ** 2 + (pp - p0) ** 2 < exclusion_radius ** 2
        work[mask] = -np.inf
    return lobes
