"""Forecaster training, recursive prediction, baseline, and subsidy tiers."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

import numpy as np

from ..errors import InsufficientData, SeriesTooShort
from .boosting import BoostingParams, GradientBoostedTrees
from .features import (
    FEATURE_NAMES,
    MIN_HISTORY_DAYS,
    FeatureRow,
    build_features,
    daily_totals,
    rows_to_arrays,
)
from .synth import ConsumptionSeries

MIN_TRAINING_ROWS = 60
VALIDATION_FRACTION = 0.2


def mape(actual, predicted) -> float:
    actual = np.asarray(actual, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    denom = np.maximum(np.abs(actual), 1e-9)
    return float(np.mean(np.abs(actual - predicted) / denom))


@dataclass(frozen=True)
class ForecastModel:
    booster: GradientBoostedTrees
    params: BoostingParams
    seed: int
    feature_names: tuple[str, ...]
    validation_mape: float
    n_rows: int
    n_train: int

    def predict_rows(self, rows: list[FeatureRow]) -> np.ndarray:
        X, _ = rows_to_arrays(rows)
        return self.booster.predict(X)


def train_forecaster(rows: list[FeatureRow], params: BoostingParams | None = None,
                     seed: int = 0) -> ForecastModel:
    """Fit on the chronological first 80%, report MAPE on the held-out tail."""
    if len(rows) < MIN_TRAINING_ROWS:
        raise InsufficientData(f"need >= {MIN_TRAINING_ROWS} rows, have {len(rows)}")
    params = params or BoostingParams()
    n_val = max(1, int(round(VALIDATION_FRACTION * len(rows))))
    train_rows, val_rows = rows[:-n_val], rows[-n_val:]

    X_train, y_train = rows_to_arrays(train_rows)
    booster = GradientBoostedTrees(params, seed=seed).fit(X_train, y_train)

    X_val, y_val = rows_to_arrays(val_rows)
    val_mape = mape(y_val, booster.predict(X_val))
    return ForecastModel(
        booster=booster,
        params=params,
        seed=seed,
        feature_names=FEATURE_NAMES,
        validation_mape=val_mape,
        n_rows=len(rows),
        n_train=len(train_rows),
    )


def forecast(model: ForecastModel, series: ConsumptionSeries, property_type: str,
             horizon_days: int) -> list[tuple[date, float]]:
    """Recursive multi-step: each prediction feeds the next day's lags."""
    if horizon_days < 1:
        raise ValueError("horizon_days must be >= 1")
    from .features import PROPERTY_TYPE_CODE

    dates, totals = daily_totals(series)
    if len(dates) < MIN_HISTORY_DAYS:
        raise SeriesTooShort(f"need >= {MIN_HISTORY_DAYS} complete days, have {len(dates)}")
    history = list(map(float, totals))
    out: list[tuple[date, float]] = []
    day = dates[-1]
    for _ in range(horizon_days):
        day = day + timedelta(days=1)
        x = np.array(
            [
                [
                    history[-1],
                    history[-7],
                    history[-30],
                    float(np.mean(history[-7:])),
                    float(np.mean(history[-30:])),
                    float(day.weekday()),
                    float(day.month),
                    float(PROPERTY_TYPE_CODE[property_type]),
                ]
            ]
        )
        value = max(0.0, float(model.booster.predict(x)[0]))
        out.append((day, value))
        history.append(value)
    return out


def seasonal_naive(series: ConsumptionSeries, horizon_days: int) -> list[tuple[date, float]]:
    """Baseline: day t repeats the daily total from t - 7."""
    if horizon_days < 1:
        raise ValueError("horizon_days must be >= 1")
    dates, totals = daily_totals(series)
    if len(dates) < 7:
        raise SeriesTooShort(f"need >= 7 complete days, have {len(dates)}")
    history = list(map(float, totals))
    out: list[tuple[date, float]] = []
    day = dates[-1]
    for _ in range(horizon_days):
        day = day + timedelta(days=1)
        value = history[-7]
        out.append((day, value))
        history.append(value)
    return out


def evaluate_forecaster(series: ConsumptionSeries, property_type: str,
                        params: BoostingParams | None = None, seed: int = 0) -> dict:
    """Validation MAPE of the trained model vs the seasonal-naive baseline.

    Both predict the same held-out days one step ahead from actual history;
    the baseline's prediction for day t is exactly the lag_7 column.
    """
    rows = build_features(series, property_type)
    model = train_forecaster(rows, params, seed)
    val_rows = rows[-(len(rows) - model.n_train):]
    y_val = np.asarray([r.target for r in val_rows])
    baseline_pred = np.asarray([r.lag_7 for r in val_rows])
    return {
        "model_mape": model.validation_mape,
        "baseline_mape": mape(y_val, baseline_pred),
        "n_rows": len(rows),
        "n_validation": len(val_rows),
    }


@dataclass(frozen=True)
class SubsidyThresholds:
    """Tier bounds as trailing mean daily kWh (~100 and ~500 kWh monthly)."""

    tier_a_below: float = 3.3
    tier_b_below: float = 16.7


@dataclass(frozen=True)
class TierResult:
    tier: str
    mean_daily_kwh: float
    window_days: int
    rationale: str

    def to_dict(self) -> dict:
        return {
            "tier": self.tier,
            "mean_daily_kwh": self.mean_daily_kwh,
            "window_days": self.window_days,
            "rationale": self.rationale,
        }


def subsidy_tier(series: ConsumptionSeries,
                 thresholds: SubsidyThresholds | None = None) -> TierResult:
    """Tier by trailing-30-day mean daily kWh; boundaries go to the higher tier."""
    thresholds = thresholds or SubsidyThresholds()
    dates, totals = daily_totals(series)
    if len(dates) < 30:
        raise SeriesTooShort(f"need >= 30 complete days, have {len(dates)}")
    window = totals[-30:]
    mean_daily = float(window.mean())
    if mean_daily < thresholds.tier_a_below:
        tier = "A"
        rationale = f"mean daily {mean_daily:.2f} kWh < {thresholds.tier_a_below}"
    elif mean_daily < thresholds.tier_b_below:
        tier = "B"
        rationale = (
            f"mean daily {mean_daily:.2f} kWh in "
            f"[{thresholds.tier_a_below}, {thresholds.tier_b_below})"
        )
    else:
        tier = "C"
        rationale = f"mean daily {mean_daily:.2f} kWh >= {thresholds.tier_b_below}"
    return TierResult(
        tier=tier, mean_daily_kwh=mean_daily, window_days=30, rationale=rationale
    )
