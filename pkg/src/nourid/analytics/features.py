"""Daily downsampling and supervised feature rows for the forecaster.

Rows exist only where every lag is available: the first 30 complete days
of a series are never targets. All lag and rolling columns are strictly
trailing, so no row can see its own target day.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from ..errors import SeriesTooShort
from .synth import HOURS_PER_DAY, ConsumptionSeries

PROPERTY_TYPE_CODE = {"household": 0, "agricultural": 1, "commercial": 2}

FEATURE_NAMES = (
    "lag_1", "lag_7", "lag_30", "roll_7", "roll_30",
    "day_of_week", "month", "property_type",
)

MIN_HISTORY_DAYS = 30


@dataclass(frozen=True)
class FeatureRow:
    target_date: date
    lag_1: float
    lag_7: float
    lag_30: float
    roll_7: float
    roll_30: float
    day_of_week: int
    month: int
    property_type: int
    target: float

    def vector(self) -> tuple[float, ...]:
        return (
            self.lag_1, self.lag_7, self.lag_30, self.roll_7, self.roll_30,
            float(self.day_of_week), float(self.month), float(self.property_type),
        )


def daily_totals(series: ConsumptionSeries) -> tuple[list[date], np.ndarray]:
    """Complete calendar days only; partial edge days are dropped."""
    dates: list[date] = []
    sums: dict[date, list[float]] = {}
    for ts, kwh in series.readings():
        day = ts.date()
        if day not in sums:
            dates.append(day)
            sums[day] = []
        sums[day].append(kwh)
    keep = [d for d in dates if len(sums[d]) == HOURS_PER_DAY]
    return keep, np.asarray([math.fsum(sums[d]) for d in keep], dtype=float)


def build_features(series: ConsumptionSeries, property_type: str) -> list[FeatureRow]:
    """One row per day from day 31 onward of the daily-downsampled series."""
    dates, totals = daily_totals(series)
    if len(dates) < MIN_HISTORY_DAYS + 1:
        raise SeriesTooShort(
            f"need more than {MIN_HISTORY_DAYS} complete days, have {len(dates)}"
        )
    code = PROPERTY_TYPE_CODE[property_type]
    rows: list[FeatureRow] = []
    for i in range(MIN_HISTORY_DAYS, len(dates)):
        rows.append(
            FeatureRow(
                target_date=dates[i],
                lag_1=float(totals[i - 1]),
                lag_7=float(totals[i - 7]),
                lag_30=float(totals[i - 30]),
                roll_7=float(totals[i - 7 : i].mean()),
                roll_30=float(totals[i - 30 : i].mean()),
                day_of_week=dates[i].weekday(),
                month=dates[i].month,
                property_type=code,
                target=float(totals[i]),
            )
        )
    return rows


def rows_to_arrays(rows: list[FeatureRow]) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray([r.vector() for r in rows], dtype=float)
    y = np.asarray([r.target for r in rows], dtype=float)
    return X, y
