"""Per-iteration solver records and their CSV / JSON persistence.

Trace files use the column layout

    iter,l,u,diameter,kkt_residual,z,grad_norm,ratio

with floats printed to 17 significant digits (lossless for doubles), the
``z`` field holding semicolon-separated coordinates, and ``u``/``ratio``
left blank (CSV) or null (JSON) when absent.  Writing then reading a trace
reproduces every value bit-for-bit.
"""

import csv
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import TraceParseError

__all__ = ["TraceRecord", "SolverTrace"]

_FIELDS = ["iter", "l", "u", "diameter", "kkt_residual", "z", "grad_norm", "ratio"]


def _fmt(v):
    return "%.17g" % float(v)


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    l: float
    u: Optional[float]
    diameter: float
    kkt_residual: float
    z: np.ndarray
    grad_norm: float
    ratio: Optional[float]

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float))


@dataclass
class SolverTrace:
    records: list = field(default_factory=list)

    def append(self, record):
        if self.records and record.iter <= self.records[-1].iter:
            raise ValueError("iteration numbers must be strictly increasing")
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, idx):
        return self.records[idx]

    def levels(self):
        return np.array([r.l for r in self.records])

    def widths(self):
        """Bracket widths u - l; nan where u is absent."""
        return np.array([
            (r.u - r.l) if r.u is not None else np.nan for r in self.records
        ])

    def has_brackets(self):
        return bool(self.records) and all(r.u is not None for r in self.records)

    # ------------------------------------------------------------------ io

    def write(self, path, fmt="csv"):
        if fmt == "csv":
            self.write_csv(path)
        elif fmt == "json":
            self.write_json(path)
        else:
            raise ValueError(f"unknown trace format {fmt!r}")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_FIELDS)
            for r in self.records:
                writer.writerow([
                    r.iter,
                    _fmt(r.l),
                    "" if r.u is None else _fmt(r.u),
                    _fmt(r.diameter),
                    _fmt(r.kkt_residual),
                    ";".join(_fmt(c) for c in r.z),
                    _fmt(r.grad_norm),
                    "" if r.ratio is None else _fmt(r.ratio),
                ])

    def write_json(self, path):
        payload = []
        for r in self.records:
            payload.append({
                "iter": r.iter,
                "l": r.l,
                "u": r.u,
                "diameter": r.diameter,
                "kkt_residual": r.kkt_residual,
                "z": [float(c) for c in r.z],
                "grad_norm": r.grad_norm,
                "ratio": r.ratio,
            })
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")

    @classmethod
    def read(cls, path, fmt=None):
        if fmt is None:
            fmt = "json" if str(path).endswith(".json") else "csv"
        if fmt == "csv":
            return cls.read_csv(path)
        if fmt == "json":
            return cls.read_json(path)
        raise ValueError(f"unknown trace format {fmt!r}")

    @classmethod
    def read_csv(cls, path):
        trace = cls()
        try:
            with open(path, newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                if header != _FIELDS:
                    raise TraceParseError(f"unexpected header {header!r}")
                for row in reader:
                    if len(row) != len(_FIELDS):
                        raise TraceParseError(f"bad row {row!r}")
                    trace.append(TraceRecord(
                        iter=int(row[0]),
                        l=float(row[1]),
                        u=None if row[2] == "" else float(row[2]),
                        diameter=float(row[3]),
                        kkt_residual=float(row[4]),
                        z=np.array([float(t) for t in row[5].split(";") if t != ""]),
                        grad_norm=float(row[6]),
                        ratio=None if row[7] == "" else float(row[7]),
                    ))
        except (OSError, ValueError) as exc:
            raise TraceParseError(str(exc)) from exc
        return trace

    @classmethod
    def read_json(cls, path):
        trace = cls()
        try:
            with open(path) as fh:
                payload = json.load(fh)
            for row in payload:
                trace.append(TraceRecord(
                    iter=int(row["iter"]),
                    l=float(row["l"]),
                    u=None if row["u"] is None else float(row["u"]),
                    diameter=float(row["diameter"]),
                    kkt_residual=float(row["kkt_residual"]),
                    z=np.array([float(c) for c in row["z"]]),
                    grad_norm=float(row["grad_norm"]),
                    ratio=None if row["ratio"] is None else float(row["ratio"]),
                ))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise TraceParseError(str(exc)) from exc
        return trace
