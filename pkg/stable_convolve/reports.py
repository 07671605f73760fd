"""CSV and JSON emission for paths, ladders and reports.

Floats are written with 17 significant digits, which round-trips every
float64 exactly, and rows always come out in the same order, so repeated
runs with the same seed produce byte-identical files.
"""

import csv
import math
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from .errors import ContractError
from .estimators import MomentReport
from .types import FieldPath, FieldRole, GridSpec, ModeSet

PathLike = Union[str, Path]

FIELD_HEADER = ["t", "mode_k", "value", "role"]
LADDER_HEADER = ["T", "estimate", "stderr", "M"]
TRAJECTORY_HEADER = ["t", "channel", "value"]


def fmt(value: float) -> str:
    return format(float(value), ".17g")


def _write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[str]]):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_field_csv(field: FieldPath, path: PathLike) -> None:
    """Write a field as long-format rows ``t,mode_k,value,role``, time-major."""
    times = field.grid.times
    indices = field.modes.indices
    role = field.role.value
    _write_rows(
        path,
        FIELD_HEADER,
        (
            (fmt(t), str(int(k)), fmt(field.values[i, j]), role)
            for j, t in enumerate(times)
            for i, k in enumerate(indices)
        ),
    )


def read_field_csv(path: PathLike, modes: ModeSet) -> FieldPath:
    """Read a field written by :func:`write_field_csv` back onto ``modes``.

    Raises:
        ContractError: If the file's mode indices or layout do not match
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != FIELD_HEADER:
            raise ContractError(f"unexpected header {reader.fieldnames}")
        rows = list(reader)
    if not rows:
        raise ContractError(f"{path} holds no rows")

    position = {int(k): i for i, k in enumerate(modes.indices)}
    times: List[float] = []
    for row in rows:
        t = float(row["t"])
        if not times or times[-1] != t:
            times.append(t)
    values = np.full((len(modes), len(times)), math.nan)
    for n, row in enumerate(rows):
        k = int(row["mode_k"])
        if k not in position:
            raise ContractError(f"mode {k} in {path} is not part of the mode set")
        values[position[k], n // len(modes)] = float(row["value"])
    if len(rows) != len(modes) * len(times) or np.isnan(values).any():
        raise ContractError(f"{path} does not hold a full (mode x time) table")

    n_steps = len(times) - 1
    horizon = times[-1] if n_steps else 1.0
    return FieldPath(
        grid=GridSpec(horizon=horizon, n_steps=n_steps),
        modes=modes,
        values=values,
        role=FieldRole(rows[0]["role"]),
    )


def write_ladder_csv(report: MomentReport, path: PathLike) -> None:
    """Write the ladder table ``T,estimate,stderr,M``."""
    _write_rows(
        path,
        LADDER_HEADER,
        (
            (fmt(pt.horizon), fmt(pt.estimate), fmt(pt.stderr), str(pt.replicas))
            for pt in report.points
        ),
    )


def write_trajectory_csv(field: FieldPath, path: PathLike) -> None:
    """Write a Burgers trajectory as ``t,channel,value`` rows."""
    times = field.grid.times
    channels = field.modes.indices
    _write_rows(
        path,
        TRAJECTORY_HEADER,
        (
            (fmt(t), str(int(k)), fmt(field.values[i, j]))
            for j, t in enumerate(times)
            for i, k in enumerate(channels)
        ),
    )


def write_series_csv(
    times: Sequence[float], values: Sequence[float], path: PathLike, name: str
) -> None:
    _write_rows(path, ["t", name], ((fmt(t), fmt(v)) for t, v in zip(times, values)))


def write_json(model: BaseModel, path: PathLike, exclude: Optional[set] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(model.model_dump_json(indent=2, exclude=exclude))
        fh.write("\n")
