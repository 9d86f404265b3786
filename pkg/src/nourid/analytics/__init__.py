"""Property-level consumption: synthesis, aggregation, forecasting, tiers."""

from .aggregate import AggregateView, Bucket, aggregate
from .features import FeatureRow, build_features, daily_totals
from .forecast import (
    BoostingParams,
    ForecastModel,
    SubsidyThresholds,
    evaluate_forecaster,
    forecast,
    seasonal_naive,
    subsidy_tier,
    train_forecaster,
)
from .synth import ConsumptionSeries, SeasonalShape, series_from_csv, series_to_csv, synthesize_series

__all__ = [
    "AggregateView",
    "Bucket",
    "aggregate",
    "FeatureRow",
    "build_features",
    "daily_totals",
    "BoostingParams",
    "ForecastModel",
    "SubsidyThresholds",
    "evaluate_forecaster",
    "forecast",
    "seasonal_naive",
    "subsidy_tier",
    "train_forecaster",
    "ConsumptionSeries",
    "SeasonalShape",
    "series_from_csv",
    "series_to_csv",
    "synthesize_series",
]
