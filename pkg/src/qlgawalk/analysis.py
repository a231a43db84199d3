"""Position observables, spread series and deterministic CSV output."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .correspondence import Embedding
from .state import SparseState
from .walks import TwoDLabel, WalkModel

__all__ = [
    "Distribution",
    "SpreadSeries",
    "position_distribution",
    "spread_series",
    "emit_csv",
    "write_atomic",
    "fmt",
]


def fmt(v: float) -> str:
    """17 significant digits, shortest form (``1.0 -> '1'``)."""
    return format(float(v), ".17g")


@dataclass(frozen=True)
class Distribution:
    """Sorted ``(position, probability)`` pairs; positions are ints or ``(x, y)``."""

    support: tuple
    dims: int = 1

    @property
    def total(self) -> float:
        return float(sum(p for _, p in self.support))

    def as_dict(self) -> dict:
        return dict(self.support)

    def moments(self) -> tuple[float, float]:
        """Mean and standard deviation (1D only)."""
        if self.dims != 1:
            raise ValueError("moments are defined for 1D distributions")
        if not self.support:
            return 0.0, 0.0
        x = np.array([s for s, _ in self.support], dtype=float)
        p = np.array([q for _, q in self.support])
        mean = float(p @ x)
        var = float(p @ (x - mean) ** 2)
        return mean, float(np.sqrt(max(var, 0.0)))


def _position_of(label):
    if isinstance(label, TwoDLabel):
        return (label.x, label.y)
    return label.x


def position_distribution(state: SparseState, e: Embedding | None = None) -> Distribution:
    """Marginal probability of the walker position.

    Walk states are read directly. Configuration states need the embedding
    that identifies the walker; mass outside its sector is an error.

    Raises
    ------
    ValueError
        For configuration states without an embedding.
    """
    probs: dict = {}
    if e is not None:
        for cfg, a in state.items():
            label = e.backward(cfg)
            if label is None:
                raise ValueError(f"configuration {cfg!r} is not a single walker")
            pos = _position_of(label)
            probs[pos] = probs.get(pos, 0.0) + abs(a) ** 2
    else:
        for label, a in state.items():
            if not hasattr(label, "x"):
                raise ValueError("configuration states need an embedding")
            pos = _position_of(label)
            probs[pos] = probs.get(pos, 0.0) + abs(a) ** 2
    support = tuple(sorted(probs.items()))
    dims = 2 if support and isinstance(support[0][0], tuple) else 1
    return Distribution(support, dims)


@dataclass
class SpreadSeries:
    """Per-step mean and standard deviation with a linear fit of stddev vs t."""

    rows: list[tuple[int, float, float]] = field(default_factory=list)
    window: tuple[int, int] = (0, 0)
    slope: float = float("nan")
    intercept: float = float("nan")
    r2: float = float("nan")

    def stddev(self, t: int) -> float:
        for tt, _, s in self.rows:
            if tt == t:
                return s
        raise KeyError(t)


def _linear_fit(t: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else float("nan")
    return float(slope), float(intercept), r2


def spread_series(model: WalkModel, init: SparseState, t_max: int,
                  window: tuple[int, int] | None = None) -> SpreadSeries:
    """Evolve a 1D walk and fit stddev(t) over ``window`` (default ``[t_max/4, t_max]``)."""
    if window is None:
        window = (t_max // 4, t_max)
    lo, hi = window
    if not 0 <= lo < hi <= t_max:
        raise ValueError(f"window {window} must lie within [0, {t_max}]")
    walk = model.fresh()
    state = init
    mean, sd = position_distribution(state).moments()
    rows = [(0, mean, sd)]
    for t, state in enumerate(walk.evolve(state, t_max), start=1):
        mean, sd = position_distribution(state).moments()
        rows.append((t, mean, sd))
    sel = [(t, s) for t, _, s in rows if lo <= t <= hi]
    ts = np.array([t for t, _ in sel], dtype=float)
    ys = np.array([s for _, s in sel])
    slope, intercept, r2 = _linear_fit(ts, ys)
    return SpreadSeries(rows, (lo, hi), slope, intercept, r2)


def _csv_text(obj) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(obj, Distribution):
        if obj.dims == 2:
            w.writerow(["x", "y", "probability"])
            for (x, y), p in obj.support:
                w.writerow([x, y, fmt(p)])
        else:
            w.writerow(["position", "probability"])
            for x, p in obj.support:
                w.writerow([x, fmt(p)])
    elif isinstance(obj, SpreadSeries):
        w.writerow(["t", "mean", "stddev"])
        for t, m, s in obj.rows:
            w.writerow([t, fmt(m), fmt(s)])
    elif hasattr(obj, "to_csv"):
        return obj.to_csv()
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return buf.getvalue()


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write UTF-8 text via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_csv(obj, path: str | os.PathLike) -> None:
    """Serialize a distribution, spread series or equivalence report as CSV."""
    write_atomic(path, _csv_text(obj))
