"""Experiment reports: summary statistics, diagnostics, deterministic output.

JSON and CSV emission format every float with 17 significant digits
('%.17g': '.' decimal separator, lowercase exponent), which round-trips
binary64 exactly, so a report is byte-identical across runs with the same
configuration and seed.  Wall time is carried in a dedicated field excluded
from that guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SummaryStat",
    "Diagnostic",
    "ExperimentReport",
    "summarize",
    "check",
    "fmt_float",
    "to_json_text",
    "curve_to_csv",
]


@dataclass(frozen=True)
class SummaryStat:
    """Sample mean with standard error and normal 95% interval."""

    n: int
    mean: float
    se: float

    @property
    def ci95(self) -> tuple:
        return (self.mean - 1.96 * self.se, self.mean + 1.96 * self.se)


def summarize(samples) -> SummaryStat:
    """Mean, unbiased-std standard error, and ci95 of a sample."""
    arr = np.asarray(samples, dtype=float)
    n = arr.size
    if n < 2:
        raise ValueError(f"need at least 2 samples to summarize, got {n}")
    mean = float(np.mean(arr))
    se = float(np.std(arr, ddof=1) / math.sqrt(n))
    return SummaryStat(n=n, mean=mean, se=se)


@dataclass
class Diagnostic:
    """One named pass/fail entry with its measured margin.

    ``comparison`` states how the measurement was judged, e.g. ``measured <=
    threshold``.  Entries with asserted=False are reported observations that
    never gate the exit code.
    """

    name: str
    measured: float
    threshold: float
    comparison: str
    passed: bool
    asserted: bool = True

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": self.measured,
            "threshold": self.threshold,
            "comparison": self.comparison,
            "passed": self.passed,
            "asserted": self.asserted,
        }


def check(name: str, measured: float, threshold: float, comparison: str,
          asserted: bool = True) -> Diagnostic:
    """Build a diagnostic, evaluating the stated comparison."""
    ops = {
        "<=": lambda a, b: a <= b,
        "<": lambda a, b: a < b,
        ">=": lambda a, b: a >= b,
        ">": lambda a, b: a > b,
    }
    if comparison not in ops:
        raise ValueError(f"unknown comparison {comparison!r}")
    return Diagnostic(
        name=name,
        measured=float(measured),
        threshold=float(threshold),
        comparison=comparison,
        passed=bool(ops[comparison](measured, threshold)),
        asserted=asserted,
    )


@dataclass
class ExperimentReport:
    """Machine-readable result of one experiment run."""

    experiment: str
    config: dict
    alpha_star: float
    curves: dict = field(default_factory=dict)  # table name -> {column -> list}
    diagnostics: list = field(default_factory=list)
    wall_time_s: float = 0.0

    def add_curve(self, name: str, columns: dict):
        lengths = {len(v) for v in columns.values()}
        if len(lengths) > 1:
            raise ValueError(f"curve {name!r} has ragged columns")
        self.curves[name] = {k: [_as_scalar(x) for x in v] for k, v in columns.items()}

    @property
    def passed(self) -> bool:
        return all(d.passed for d in self.diagnostics if d.asserted)

    def to_dict(self, include_wall_time: bool = True) -> dict:
        out = {
            "experiment": self.experiment,
            "config": self.config,
            "alpha_star": self.alpha_star,
            "curves": self.curves,
            "diagnostics": [d.to_dict() for d in self.diagnostics],
            "passed": self.passed,
        }
        if include_wall_time:
            out["wall_time_s"] = self.wall_time_s
        return out

    def to_json(self, include_wall_time: bool = True) -> str:
        return to_json_text(self.to_dict(include_wall_time=include_wall_time))


def _as_scalar(x):
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def fmt_float(x: float) -> str:
    """17-significant-digit decimal rendering, lowercase exponent."""
    if x is None or not math.isfinite(x):
        raise ValueError(f"reports carry only finite numbers, got {x!r}")
    return format(float(x), ".17g")


def _json_escape(s: str) -> str:
    out = []
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def to_json_text(obj, indent: int = 2) -> str:
    """Deterministic JSON: insertion-ordered keys, %.17g floats, trailing newline."""

    def render(value, depth):
        pad = " " * (indent * depth)
        pad_in = " " * (indent * (depth + 1))
        if value is None:
            return "null"
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return fmt_float(float(value))
        if isinstance(value, str):
            return f'"{_json_escape(value)}"'
        if isinstance(value, (list, tuple, np.ndarray)):
            items = list(value)
            if not items:
                return "[]"
            body = ",\n".join(pad_in + render(v, depth + 1) for v in items)
            return "[\n" + body + "\n" + pad + "]"
        if isinstance(value, dict):
            if not value:
                return "{}"
            body = ",\n".join(
                f'{pad_in}"{_json_escape(str(k))}": ' + render(v, depth + 1)
                for k, v in value.items()
            )
            return "{\n" + body + "\n" + pad + "}"
        raise TypeError(f"cannot serialize {type(value)!r}")

    return render(obj, 0) + "\n"


def curve_to_csv(columns: dict) -> str:
    """One curve table as CSV text with stable headers and %.17g floats."""
    names = list(columns.keys())
    cols = [columns[k] for k in names]
    n = len(cols[0]) if cols else 0
    lines = [",".join(names)]
    for i in range(n):
        cells = []
        for col in cols:
            v = col[i]
            if v is None:
                cells.append("")
            elif isinstance(v, (bool, np.bool_)):
                cells.append("true" if v else "false")
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(fmt_float(float(v)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
