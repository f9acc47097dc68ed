from uamfleet.harness.config import ExperimentConfig, Scenario, SweepSpec
from uamfleet.harness.pipeline import run_pipeline
from uamfleet.harness.plots import emit_plots
from uamfleet.harness.report import AggregateReport, ProfileRow, SweepPoint

__all__ = ["AggregateReport", "ExperimentConfig", "ProfileRow", "Scenario", "SweepPoint", "SweepSpec",
           "emit_plots", "run_pipeline"]
