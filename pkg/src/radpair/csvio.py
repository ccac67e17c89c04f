"""CSV emission and ingestion with fixed, byte-reproducible formatting."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .entanglement import CENSORED, LifetimeResult
from .exceptions import ValidationError
from .magnetometry import LifetimeCurve, SensitivityReport

SWEEP_HEADER = ("B_mT", "TE_ns", "censored")
SCAN_HEADER = ("B_mT", "TE_ns", "slope_ns_per_mT", "r", "deltaB_fund_mT", "deltaB_TE_mT")
TRAJECTORY_HEADER = ("t_ns", "trace", "singlet_prob", "concurrence")
INJECTED = "injected"


def fmt(x) -> str:
    """9 significant digits; NaN becomes an empty field."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".9g")


def write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def write_trajectory_csv(path: Path, times, traces, singlet_prob, concurrence) -> Path:
    rows = (
        (fmt(t), fmt(tr), fmt(p), fmt(c))
        for t, tr, p, c in zip(times, traces, singlet_prob, concurrence)
    )
    return write_csv(path, TRAJECTORY_HEADER, rows)


def write_sweep_csv(path: Path, curve: LifetimeCurve) -> Path:
    rows = (
        (fmt(b), fmt(r.T_E), "1" if r.censored else "0")
        for b, r in zip(curve.B_grid, curve.results)
    )
    return write_csv(path, SWEEP_HEADER, rows)


def write_scan_csv(path: Path, report: SensitivityReport) -> Path:
    rows = (
        (fmt(r.B), fmt(r.T_E), fmt(r.slope), fmt(r.r), fmt(r.dB_fund), fmt(r.dB_TE))
        for r in report.records
    )
    return write_csv(path, SCAN_HEADER, rows)


def read_curve_csv(path: str | Path) -> LifetimeCurve:
    """Parse a ``B_mT,TE_ns,censored`` file (the sweep output format)."""
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty curve file") from None
        if tuple(h.strip() for h in header) != SWEEP_HEADER:
            raise ValidationError(f"{path}: header must be {','.join(SWEEP_HEADER)}")
        B, results = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValidationError(f"{path}:{lineno}: expected 3 fields")
            try:
                b = float(row[0])
                censored = row[2].strip() == "1"
                te = None if censored or not row[1].strip() else float(row[1])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: malformed number") from None
            if row[2].strip() not in ("0", "1"):
                raise ValidationError(f"{path}:{lineno}: censored must be 0 or 1")
            if te is None:
                results.append(LifetimeResult(None, CENSORED, math.nan))
            else:
                results.append(LifetimeResult(te, INJECTED, math.nan))
            B.append(b)
    return LifetimeCurve(np.array(B), results)
