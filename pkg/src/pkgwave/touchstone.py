"""Touchstone v1.1 (.sNp) reading and writing.

Writer conventions (pinned by a golden-file test): option line
`# GHz S MA R 50`, magnitude/angle-in-degrees pairs with nine significant
digits, row-major matrix order for every port count, matrices of more
than two ports broken one matrix row per line group with at most four
pairs per line.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass

import numpy as np

_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}


class TouchstoneError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


@dataclass
class TouchstoneData:
    freqs_hz: np.ndarray
    s: np.ndarray  # (nf, n, n) complex
    z0: float

    @property
    def n_ports(self) -> int:
        return self.s.shape[1]


def _fmt(x: float) -> str:
    return f"{x:.8e}"


def write_touchstone(path, freqs_hz, s, z0: float = 50.0, comments: list[str] | None = None) -> None:
    """Write an N-port .sNp file; N is taken from the S array."""
    freqs_hz = np.asarray(freqs_hz, dtype=float)
    s = np.asarray(s, dtype=complex)
    nf, n, n2 = s.shape
    if n != n2 or nf != len(freqs_hz):
        raise ValueError(f"S array shape {s.shape} inconsistent with {len(freqs_hz)} frequencies")
    lines = []
    for c in comments or []:
        for sub in str(c).splitlines() or [""]:
            lines.append(f"! {sub}".rstrip())
    lines.append(f"# GHz S MA R {z0:g}")
    for fi in range(nf):
        pairs = []
        for i in range(n):
            for j in range(n):
                v = s[fi, i, j]
                pairs.append((abs(v), math.degrees(cmath.phase(v))))
        head = _fmt(freqs_hz[fi] / 1e9)
        if n <= 2:
            body = " ".join(f"{_fmt(m)} {_fmt(a)}" for m, a in pairs)
            lines.append(f"{head} {body}")
        else:
            first_row = True
            for i in range(n):
                row = pairs[i * n : (i + 1) * n]
                for start in range(0, n, 4):
                    chunk = row[start : start + 4]
                    body = " ".join(f"{_fmt(m)} {_fmt(a)}" for m, a in chunk)
                    if first_row and start == 0:
                        lines.append(f"{head} {body}")
                    else:
                        lines.append(f"  {body}")
                first_row = False
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def _n_ports_from_name(path) -> int:
    m = re.search(r"\.s(\d+)p$", str(path), re.IGNORECASE)
    if not m:
        raise TouchstoneError(f"cannot infer port count from file name {path!r}")
    return int(m.group(1))


def read_touchstone(path, n_ports: int | None = None) -> TouchstoneData:
    """Read a Touchstone v1.x S-parameter file (MA, RI, or DB formats)."""
    n = n_ports or _n_ports_from_name(path)
    unit = 1e9
    fmt = "ma"
    z0 = 50.0
    values: list[float] = []
    positions: list[tuple[int, int]] = []
    saw_options = False
    with open(path) as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("!", 1)[0].strip()
            if not line:
                continue
            if line.startswith("#"):
                if saw_options:
                    continue  # later option lines are ignored per v1.1
                saw_options = True
                toks = line[1:].lower().split()
                k = 0
                while k < len(toks):
                    t = toks[k]
                    if t in _FREQ_UNITS:
                        unit = _FREQ_UNITS[t]
                    elif t == "s":
                        pass
                    elif t in ("ma", "ri", "db"):
                        fmt = t
                    elif t == "r":
                        k += 1
                        if k >= len(toks):
                            raise TouchstoneError("option line: R without a value", lineno)
                        z0 = float(toks[k])
                    elif t in ("y", "z", "h", "g"):
                        raise TouchstoneError(f"unsupported parameter type {t.upper()}", lineno)
                    else:
                        raise TouchstoneError(f"unknown option token {t!r}", lineno)
                    k += 1
                continue
            col = 1
            for tok in line.split():
                try:
                    values.append(float(tok))
                except ValueError:
                    raise TouchstoneError(f"malformed number {tok!r}", lineno, col) from None
                positions.append((lineno, col))
                col += len(tok) + 1
    block = 1 + 2 * n * n
    if not values:
        raise TouchstoneError("no data lines found")
    if len(values) % block:
        lineno, col = positions[-1]
        raise TouchstoneError(
            f"data length {len(values)} is not a multiple of {block} values per frequency "
            f"for {n} ports",
            lineno,
            col,
        )
    arr = np.asarray(values).reshape(-1, block)
    freqs = arr[:, 0] * unit
    first = arr[:, 1::2]
    second = arr[:, 2::2]
    if fmt == "ma":
        s = first * np.exp(1j * np.radians(second))
    elif fmt == "db":
        s = 10.0 ** (first / 20.0) * np.exp(1j * np.radians(second))
    else:
        s = first + 1j * second
    return TouchstoneData(freqs_hz=freqs, s=s.reshape(-1, n, n), z0=z0)
