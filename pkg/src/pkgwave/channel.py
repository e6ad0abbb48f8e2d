"""Channel metrics derived from S-parameters.

Band-averaged coupling and the worst-pair benchmark, the mismatch-
corrected pair response

    G_i G_j |H_ij(f)|^2 = |S_ji(f)|^2 / ((1 - |S_ii(f)|^2)(1 - |S_jj(f)|^2)),

and the log-distance path-loss regression L = 10 n log10(d) + C.  All
operations are deterministic arithmetic on immutable S-parameter sets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .ports import DB_FLOOR, SParameterSet

REFLECTION_LIMIT = 1.0 - 1e-6


def band_average(sparams: SParameterSet, band=None, mode: str = "power") -> np.ndarray:
    """Off-diagonal band averages in dB (diagonal entries are NaN).

    mode="power" (default) averages |S|^2 linearly across the band before
    converting to dB; mode="db" averages the per-frequency dB values.
    """
    mask = _band_mask(sparams, band)
    n = sparams.n_ports
    out = np.full((n, n), np.nan)
    mags = np.abs(sparams.s[mask])  # (nf, n, n)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            m = mags[:, i, j]
            if mode == "power":
                out[i, j] = 10.0 * math.log10(max(float(np.mean(m * m)), 1e-300))
            elif mode == "db":
                out[i, j] = float(np.mean(20.0 * np.log10(np.maximum(m, 1e-300))))
            else:
                raise ValueError(f"unknown averaging mode {mode!r}")
    return np.maximum(out, DB_FLOOR)


def s_min(band_avg: np.ndarray) -> tuple[float, tuple[int, int]]:
    """Minimum off-diagonal band average and its (i, j) pair (0-based),
    lexicographic tie-break."""
    n = band_avg.shape[0]
    if band_avg.shape != (n, n) or n < 2:
        raise ValueError("need a square matrix of at least two ports")
    best = None
    arg = None
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            v = band_avg[i, j]
            if best is None or v < best:
                best, arg = v, (i, j)
    return float(best), arg


def channel_response(sparams: SParameterSet, pair: tuple[int, int]) -> np.ndarray:
    """Mismatch-corrected power transfer for one port pair, per frequency."""
    i, j = pair
    if i == j:
        raise ValueError("pair must couple two distinct ports")
    s = sparams.s
    for p in (i, j):
        refl = np.abs(s[:, p, p])
        bad = np.nonzero(refl >= REFLECTION_LIMIT)[0]
        if len(bad):
            f = sparams.freqs[bad[0]]
            raise ValueError(f"port {p} reflection magnitude >= 1 at {f:.6g} Hz")
    num = np.abs(s[:, j, i]) ** 2
    den = (1.0 - np.abs(s[:, i, i]) ** 2) * (1.0 - np.abs(s[:, j, j]) ** 2)
    return num / den


def path_loss_db(sparams: SParameterSet, pair: tuple[int, int], band=None) -> float:
    """L for one pair: -10 log10 of the band-mean mismatch-corrected
    response (antenna product left embedded)."""
    mask = _band_mask(sparams, band)
    resp = channel_response(sparams, pair)[mask]
    return min(-10.0 * math.log10(max(float(np.mean(resp)), 1e-300)), -DB_FLOOR)


@dataclass(frozen=True)
class PathLossFit:
    n: float
    c: float  # dB intercept at d = 1 m
    pairs: tuple[tuple[float, float], ...]  # (distance m, L dB)
    residual_rms: float

    def predict(self, d: float) -> float:
        return 10.0 * self.n * math.log10(d) + self.c


def fit_path_loss(pairs) -> PathLossFit:
    """Ordinary least squares of L (dB) against 10 log10(d)."""
    pairs = [(float(d), float(L)) for d, L in pairs]
    if len(pairs) < 3:
        raise ValueError("need at least 3 (distance, loss) pairs")
    if any(d <= 0 for d, _ in pairs):
        raise ValueError("distances must be positive")
    d = np.array([p[0] for p in pairs])
    L = np.array([p[1] for p in pairs])
    x = 10.0 * np.log10(d)
    if np.ptp(x) == 0.0:
        raise ValueError("need at least two distinct distances")
    xm = x.mean()
    lm = L.mean()
    n = float(np.sum((x - xm) * (L - lm)) / np.sum((x - xm) ** 2))
    c = float(lm - n * xm)
    resid = L - (n * x + c)
    return PathLossFit(
        n=n, c=c, pairs=tuple(pairs), residual_rms=float(np.sqrt(np.mean(resid**2)))
    )


@dataclass
class ChannelMetrics:
    band_avg_db: np.ndarray
    s_min_db: float
    s_min_pair: tuple[int, int]
    responses: dict[tuple[int, int], np.ndarray]


@dataclass
class ScenarioReport:
    """One analysis bundle for a complete S-matrix."""
    metrics: ChannelMetrics
    fit: PathLossFit | None
    pair_table: list[dict]  # i, j, distance_m, loss_db, band_avg_db
    band: tuple[float, float]
    averaging: str
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        m = self.metrics
        n = m.band_avg_db.shape[0]
        d = {
            "band_hz": [self.band[0], self.band[1]],
            "averaging": self.averaging,
            "n_ports": n,
            "band_avg_db": [
                [None if math.isnan(v) else v for v in row] for row in m.band_avg_db.tolist()
            ],
            "s_min_db": m.s_min_db,
            "s_min_pair": [m.s_min_pair[0] + 1, m.s_min_pair[1] + 1],  # 1-based port labels
            "pairs": self.pair_table,
            "provenance": self.provenance,
        }
        if self.fit is not None:
            d["path_loss_fit"] = {
                "n": self.fit.n,
                "c_db": self.fit.c,
                "residual_rms_db": self.fit.residual_rms,
                "n_points": len(self.fit.pairs),
            }
        else:
            d["path_loss_fit"] = None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def scenario_report(
    sparams: SParameterSet,
    feed_points=None,
    band=None,
    averaging: str = "power",
    provenance: dict | None = None,
) -> ScenarioReport:
    """Full analysis bundle: band-average matrix, worst pair, per-pair
    path loss, and (when feed coordinates allow) the distance regression."""
    lo, hi = _band_limits(sparams, band)
    avg = band_average(sparams, (lo, hi), mode=averaging)
    smin, arg = s_min(avg)
    n = sparams.n_ports
    responses = {}
    table = []
    fit_pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            responses[(i, j)] = channel_response(sparams, (i, j))
            loss = path_loss_db(sparams, (i, j), (lo, hi))
            dist = None
            if feed_points is not None:
                pi = np.asarray(feed_points[i], dtype=float)
                pj = np.asarray(feed_points[j], dtype=float)
                dist = float(np.linalg.norm(pi - pj))
                fit_pairs.append((dist, loss))
            table.append(
                {
                    "i": i + 1,
                    "j": j + 1,
                    "distance_m": dist,
                    "loss_db": loss,
                    "band_avg_db": float(avg[i, j]),
                }
            )
    fit = None
    if len(fit_pairs) >= 3 and len({round(d, 12) for d, _ in fit_pairs}) >= 2:
        fit = fit_path_loss(fit_pairs)
    return ScenarioReport(
        metrics=ChannelMetrics(avg, smin, arg, responses),
        fit=fit,
        pair_table=table,
        band=(lo, hi),
        averaging=averaging,
        provenance=provenance or {},
    )


def write_report_files(report: ScenarioReport, out_dir) -> None:
    """report.json plus gnuplot-ready CSV companions."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", newline="\n") as f:
        f.write(report.to_json() + "\n")
    avg = report.metrics.band_avg_db
    with open(os.path.join(out_dir, "band_avg.csv"), "w", newline="\n") as f:
        f.write("i,j,band_avg_db\n")
        n = avg.shape[0]
        for i in range(n):
            for j in range(n):
                if i != j:
                    f.write(f"{i + 1},{j + 1},{float(avg[i, j])!r}\n")
    with open(os.path.join(out_dir, "pathloss.csv"), "w", newline="\n") as f:
        f.write("d_mm,L_dB\n")
        for row in report.pair_table:
            if row["distance_m"] is not None:
                f.write(f"{float(row['distance_m'] * 1e3)!r},{float(row['loss_db'])!r}\n")
    with open(os.path.join(out_dir, "fit.csv"), "w", newline="\n") as f:
        f.write("n,C_dB,rms_dB\n")
        if report.fit is not None:
            f.write(
                f"{float(report.fit.n)!r},{float(report.fit.c)!r},"
                f"{float(report.fit.residual_rms)!r}\n"
            )


def _band_limits(sparams: SParameterSet, band) -> tuple[float, float]:
    if band is None:
        return float(sparams.freqs[0]), float(sparams.freqs[-1])
    if hasattr(band, "f_min"):
        return float(band.f_min), float(band.f_max)
    lo, hi = band
    return float(lo), float(hi)


def _band_mask(sparams: SParameterSet, band) -> np.ndarray:
    lo, hi = _band_limits(sparams, band)
    mask = sparams.band_mask(lo, hi)
    if not mask.any():
        raise ValueError(f"band [{lo:.6g}, {hi:.6g}] Hz contains no frequency samples")
    return mask
