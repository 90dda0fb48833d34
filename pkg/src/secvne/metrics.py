"""Revenue/cost accounting and the long-run AR / RC / ACC indicators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .embedding import Embedding, cost_of, revenue_of
from .network import ContractViolation, VirtualRequest

CSV_HEADER = (
    "window_end_time,arrivals,acceptances,acc_ratio,cum_revenue,cum_cost,avg_revenue,rc_ratio,rc_defined"
)
DEFAULT_WINDOW = 100.0


def revenue(vnr: VirtualRequest) -> int:
    return revenue_of(vnr)


def cost(emb: Embedding, vnr: VirtualRequest) -> int:
    return cost_of(vnr, emb.link_paths)


@dataclass(frozen=True)
class WindowRecord:
    window_end_time: float
    arrivals: int
    acceptances: int
    cum_revenue: int
    cum_cost: int
    elapsed: float

    @property
    def acc_ratio(self) -> float:
        return self.acceptances / self.arrivals if self.arrivals else 0.0

    @property
    def avg_revenue(self) -> float:
        return self.cum_revenue / self.elapsed if self.elapsed > 0 else 0.0

    @property
    def rc_defined(self) -> bool:
        return self.acceptances > 0 and self.cum_cost > 0

    @property
    def rc_ratio(self) -> float:
        # 1.0 sentinel until something has been accepted
        return self.cum_revenue / self.cum_cost if self.rc_defined else 1.0


@dataclass
class MetricsSeries:
    """Running indicators sampled at fixed time windows.

    Windows end at ``origin + k * window``; a record is emitted for every
    window boundary crossed, carrying cumulative totals up to that boundary.
    """

    origin: float = 0.0
    window: float = DEFAULT_WINDOW
    records: list[WindowRecord] = field(default_factory=list)
    arrivals: int = 0
    acceptances: int = 0
    cum_revenue: int = 0
    cum_cost: int = 0
    last_time: float = -math.inf
    _next_end: Optional[float] = None
    _closed: bool = False

    def _emit_until(self, t: float) -> None:
        if self._next_end is None:
            self._next_end = self.origin + self.window
        while self._next_end < t:
            self._push(self._next_end)
            self._next_end = self.origin + (len(self.records) + 1) * self.window

    def _push(self, end: float) -> None:
        self.records.append(
            WindowRecord(end, self.arrivals, self.acceptances, self.cum_revenue, self.cum_cost, end - self.origin)
        )

    def update(self, t: float, accepted: bool, revenue: int = 0, cost: int = 0) -> None:
        if self._closed:
            raise ContractViolation("series already closed")
        if t < self.last_time:
            raise ContractViolation(f"time went backwards: {t} < {self.last_time}")
        if t < self.origin:
            raise ContractViolation(f"time {t} precedes series origin {self.origin}")
        self._emit_until(t)
        self.last_time = t
        self.arrivals += 1
        if accepted:
            self.acceptances += 1
            self.cum_revenue += revenue
            self.cum_cost += cost

    def close(self) -> None:
        """Emit the window containing the last update, if not already emitted."""
        if self.arrivals == 0 or self._closed:
            return
        self._emit_until(self.last_time)
        self._push(self._next_end)
        self._closed = True


def update_series(series: MetricsSeries, t: float, outcome) -> None:
    """``outcome`` is ``None`` for a rejection or a ``(revenue, cost)`` pair."""
    if outcome is None:
        series.update(t, False)
    else:
        rev, cst = outcome
        series.update(t, True, rev, cst)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def record_row(rec: WindowRecord) -> list[str]:
    return [
        _fmt(rec.window_end_time),
        str(rec.arrivals),
        str(rec.acceptances),
        _fmt(rec.acc_ratio),
        _fmt(rec.cum_revenue),
        _fmt(rec.cum_cost),
        _fmt(rec.avg_revenue),
        _fmt(rec.rc_ratio),
        "1" if rec.rc_defined else "0",
    ]


def export_csv(series: MetricsSeries, destination) -> None:
    path = Path(destination)
    lines = [CSV_HEADER] + [",".join(record_row(r)) for r in series.records]
    try:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write metrics CSV to {path}: {exc}") from exc
