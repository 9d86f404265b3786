"""Calendar bucketing for the dashboard's four granularities."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import EmptySeries, FormatError
from .synth import ConsumptionSeries

GRANULARITIES = ("day", "week", "month", "year")


@dataclass(frozen=True)
class Bucket:
    period: str
    total_kwh: float
    mean_hourly_kwh: float
    peak_hour: str  # ISO timestamp of the largest reading in the bucket

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "total_kwh": self.total_kwh,
            "mean_hourly_kwh": self.mean_hourly_kwh,
            "peak_hour": self.peak_hour,
        }


@dataclass(frozen=True)
class AggregateView:
    granularity: str
    buckets: tuple[Bucket, ...]

    @property
    def total_kwh(self) -> float:
        return math.fsum(b.total_kwh for b in self.buckets)

    def to_dict(self) -> dict:
        return {
            "granularity": self.granularity,
            "buckets": [b.to_dict() for b in self.buckets],
            "total_kwh": self.total_kwh,
        }


def period_key(ts, granularity: str) -> str:
    if granularity == "day":
        return ts.date().isoformat()
    if granularity == "week":
        iso = ts.isocalendar()
        return f"{iso[0]}-W{iso[1]:02d}"
    if granularity == "month":
        return f"{ts.year:04d}-{ts.month:02d}"
    if granularity == "year":
        return f"{ts.year:04d}"
    raise FormatError("granularity", f"unknown granularity {granularity!r}")


def aggregate(series: ConsumptionSeries, granularity: str) -> AggregateView:
    """Bucket totals, hourly means, and peak hours in chronological order."""
    if granularity not in GRANULARITIES:
        raise FormatError("granularity", f"unknown granularity {granularity!r}")
    if len(series) == 0:
        raise EmptySeries("cannot aggregate an empty series")

    order: list[str] = []
    values: dict[str, list[float]] = {}
    peaks: dict[str, tuple[float, str]] = {}
    for ts, kwh in series.readings():
        key = period_key(ts, granularity)
        if key not in values:
            order.append(key)
            values[key] = []
            peaks[key] = (-1.0, "")
        values[key].append(kwh)
        if kwh > peaks[key][0]:
            peaks[key] = (kwh, ts.isoformat())

    buckets = tuple(
        Bucket(
            period=key,
            total_kwh=math.fsum(values[key]),
            mean_hourly_kwh=math.fsum(values[key]) / len(values[key]),
            peak_hour=peaks[key][1],
        )
        for key in order
    )
    return AggregateView(granularity=granularity, buckets=buckets)
