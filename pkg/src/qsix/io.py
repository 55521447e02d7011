"""CSV reading and writing with a fixed, lossless number format."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .transforms import RadialProfile

PROFILE_COLUMNS = ("r", "u", "u1", "u2", "u3", "u4", "u5", "u6")
TRAJECTORY_HEADER = ("t", "v", "v1", "v2", "v3", "v4", "v5")
ORBIT_HEADER = ("n", "eps0", "eps2", "eps4", "period", "energy", "residual")
POHOZAEV_HEADER = ("n", "eps0", "h_rad", "p_cyl", "period")
REPORT_HEADER = ("r", "value")


class ProfileFormatError(ValueError):
    """Malformed profile CSV; ``line`` is 1-based."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def fmt(x) -> str:
    """17 significant digits; integers stay integers."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def render(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(x) for x in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(render(header, rows))
    return path


def append_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Append rows, writing the header first if the file is new or empty."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    if not fresh:
        with open(path) as fh:
            first = fh.readline().rstrip("\n")
        if first != ",".join(header):
            raise ValueError(f"{path} has header {first!r}, expected {','.join(header)!r}")
    text = render(header, rows)
    if not fresh:
        text = text.split("\n", 1)[1]
    with open(path, "a", newline="") as fh:
        fh.write(text)
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader if row]
    return header, np.array(rows, dtype=float).reshape(-1, len(header))


def profile_rows(profile: RadialProfile) -> tuple[tuple[str, ...], np.ndarray]:
    k = profile.order
    data = np.column_stack([profile.grid, profile.derivatives(k)])
    return PROFILE_COLUMNS[: 2 + k], data


def write_profile(path, profile: RadialProfile) -> Path:
    header, data = profile_rows(profile)
    return write_csv(path, header, data)


def parse_profile(text: str, n: int) -> RadialProfile:
    """Parse profile CSV text: header ``r,u`` followed by optional ``u1..u6``."""
    lines = text.splitlines()
    if not lines:
        raise ProfileFormatError(1, "empty file")
    header = [h.strip() for h in lines[0].split(",")]
    k = len(header) - 2
    if k < 0 or k > 6 or tuple(header) != PROFILE_COLUMNS[: len(header)]:
        raise ProfileFormatError(1, f"header must be a prefix of {','.join(PROFILE_COLUMNS)} "
                                    f"starting with r,u; got {lines[0]!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != len(header):
            raise ProfileFormatError(lineno, f"expected {len(header)} fields, got {len(fields)}")
        try:
            vals = [float(x) for x in fields]
        except ValueError as exc:
            raise ProfileFormatError(lineno, str(exc)) from None
        if not all(np.isfinite(vals)):
            raise ProfileFormatError(lineno, "non-finite value")
        if vals[0] <= 0 or vals[1] <= 0:
            raise ProfileFormatError(lineno, "r and u must be positive")
        if rows and vals[0] <= rows[-1][0]:
            raise ProfileFormatError(lineno, "radii must be strictly increasing")
        rows.append(vals)
    if not rows:
        raise ProfileFormatError(len(lines) + 1, "no data rows")
    data = np.array(rows)
    return RadialProfile(grid=data[:, 0], values=data[:, 1], n=n, jets=data[:, 2:] if k else None)


def read_profile(path, n: int) -> RadialProfile:
    with open(path, newline="") as fh:
        return parse_profile(fh.read(), n)


def to_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write(render(header, rows))
    return buf.getvalue()
