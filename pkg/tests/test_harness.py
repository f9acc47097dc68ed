import json
import xml.etree.ElementTree as ET
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from uamfleet.harness import AggregateReport, ExperimentConfig, ProfileRow, Scenario, SweepPoint, SweepSpec
from uamfleet.harness import cli, emit_plots, run_pipeline
from uamfleet.harness.pipeline import sweep_sizes
from uamfleet.milp import SolverError
from uamfleet.network import ConfigError, NetworkConfig
from uamfleet.schedule import SyntheticScheduleParams

DATA = Path(__file__).parent / "data"
TINY_NET = NetworkConfig(steps_per_day=24, step_minutes=60, levels=2, soc_increment=0.4, kappa=1, tau=1)


def tiny_config(tmp_path, **kw):
    base = dict(scenarios=(Scenario(40, 0.7),), network=TINY_NET,
                synthetic=SyntheticScheduleParams(days=2, daily_flights_mean=150, seed=3),
                sweep=SweepSpec("relative", 2), time_limit=60, base_seed=9, output_dir=str(tmp_path / "out"))
    base.update(kw)
    return ExperimentConfig(**base)


def write_json(path, cfg: ExperimentConfig):
    path.write_text(json.dumps(cfg.to_dict()))
    return path


# --- config -------------------------------------------------------------------------

def test_config_round_trip_and_overrides(tmp_path):
    cfg = tiny_config(tmp_path)
    path = write_json(tmp_path / "c.json", cfg)
    assert ExperimentConfig.load(path) == cfg
    changed = ExperimentConfig.load(path, base_seed=4, jobs=None, rel_gap=0.01)
    assert changed.base_seed == 4 and changed.jobs == 1 and changed.rel_gap == 0.01


@pytest.mark.parametrize("bad", [
    {"scenarios": []},
    {"scenarios": [{"add": 10}], "sweep": {"depth": -1}},
    {"scenarios": [{"add": 10}], "sweep": {"mode": "sideways"}},
    {"scenarios": [{"add": 10}], "solver": "cplex"},
    {"scenarios": [{"add": 10}], "surprise": 1},
    {"scenarios": [{"add": 10}], "network": {"levels": 0}},
])
def test_config_rejects_bad_input(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "bad.json")


def test_absolute_sweep_centres_on_median(tmp_path):
    rows = [ProfileRow("d", 1, 0, zero_spill_fleet_size=f) for f in (4, 6, 9)]
    cfg = tiny_config(tmp_path, sweep=SweepSpec("absolute", 2))
    assert sweep_sizes(cfg, rows, 9) == [4, 5, 6]
    cfg = tiny_config(tmp_path, sweep=SweepSpec("absolute", 2, (7, 3, 3)))
    assert sweep_sizes(cfg, rows, 9) == [3, 7]
    cfg = tiny_config(tmp_path, sweep=SweepSpec("relative", 3))
    assert sweep_sizes(cfg, rows, 2) == [0, 1, 2]


# --- pipeline -------------------------------------------------------------------------

def test_zero_demand_gives_zero_fleet(tmp_path):
    cfg = tiny_config(tmp_path, scenarios=(Scenario(0, 0.0),),
                      synthetic=SyntheticScheduleParams(days=1, daily_flights_mean=100, seed=1))
    report = run_pipeline(cfg)
    (row,) = report.rows
    assert row.zero_spill_fleet_size == 0 and row.realized_passengers == 0
    assert all(p.spill == 0 and p.lower == 0 and p.upper == 0 for p in row.sweep.values())


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    cfg = tiny_config(tmp, scenarios=(Scenario(40, 0.7), Scenario(40, 0.0)))
    return cfg, run_pipeline(cfg)


def test_pipeline_outputs(tiny_run):
    cfg, report = tiny_run
    out = Path(cfg.output_dir)
    for name in ("report.csv", "summary.csv", "timings.csv", "config.json", "schedule.csv",
                 "profiles_add40_ar0.7.csv", "profiles_add40_ar0.csv", "series/add40_ar0/2019-01-02.csv"):
        assert (out / name).exists(), name
    assert len(report.rows) == 4 and not report.failures
    assert all(r.violations == 0 for r in report.rows)


def test_report_counts_match_profile_files(tiny_run):
    cfg, report = tiny_run
    for scen in cfg.scenarios:
        lines = (Path(cfg.output_dir) / f"profiles_{scen.label}.csv").read_text().splitlines()[1:]
        for row in report.rows_for(scen):
            assert row.realized_passengers == sum(1 for line in lines if line.startswith(row.day))


def test_spill_is_nonincreasing_in_fleet_size(tiny_run):
    _, report = tiny_run
    for row in report.rows:
        curve = row.spill_curve()
        assert curve[-1] == (row.zero_spill_fleet_size, 0)
        for (f0, s0), (f1, s1) in zip(curve, curve[1:]):
            assert s1 <= s0 + (row.sweep[f1].gap or 0)
        for f, p in row.sweep.items():
            assert p.lower <= p.upper


def test_rerun_is_byte_identical(tiny_run, tmp_path):
    cfg, _ = tiny_run
    again = replace(cfg, output_dir=str(tmp_path / "again"), jobs=2)
    run_pipeline(again)
    for name in ("report.csv", "summary.csv", "profiles_add40_ar0.7.csv", "schedule.csv"):
        assert (Path(cfg.output_dir) / name).read_bytes() == (tmp_path / "again" / name).read_bytes()


def test_report_csv_round_trip(tiny_run):
    _, report = tiny_run
    text = report.to_csv()
    assert AggregateReport.from_csv(text).to_csv() == text
    with pytest.raises(ValueError):
        AggregateReport.from_csv("a,b\n1,2\n")


def test_autoregression_widens_fleet_spread(tmp_path):
    cfg = tiny_config(tmp_path, scenarios=(Scenario(500, 0.0), Scenario(500, 0.7)),
                      synthetic=SyntheticScheduleParams(days=10, daily_flights_mean=200, seed=0),
                      sweep=SweepSpec("relative", 0), bounds=False, base_seed=0)
    report = run_pipeline(cfg, write=False)
    flat, ar = ([r.zero_spill_fleet_size for r in report.rows_for(s)] for s in cfg.scenarios)
    assert len(report.summary()) == 2
    assert np.std(ar) > np.std(flat)
    assert max(ar) - min(ar) > max(flat) - min(flat)


def test_failures_are_recorded_per_row(tmp_path):
    cfg = tiny_config(tmp_path, time_limit=1e-6, synthetic=SyntheticScheduleParams(days=1, daily_flights_mean=400,
                                                                                   seed=2))
    report = run_pipeline(cfg, write=False)
    (row,) = report.rows
    assert row.failed and "fleet sizing" in row.error


def test_unusable_solver_aborts(tmp_path, monkeypatch):
    from uamfleet.harness import pipeline

    def broken(name):
        raise SolverError("no binary")

    monkeypatch.setattr(pipeline, "get_adapter", broken)
    with pytest.raises(SolverError, match="install highspy"):
        run_pipeline(tiny_config(tmp_path))


# --- plots ----------------------------------------------------------------------------

def micro_report() -> AggregateReport:
    rows = []
    for k, (pax, fleet) in enumerate([(300, 5), (340, 6), (280, 5)]):
        row = ProfileRow(f"2019-01-0{k + 1}", 500, 0.7, pax, pax // 3, fleet, "Optimal", 0.0)
        for f in (4, 5, 6):
            spill = max(fleet - f, 0) * 7.0
            row.sweep[f] = SweepPoint(f, spill, "Optimal", 0.0, int(spill) - 2 if spill else 0, int(spill) + 5)
        rows.append(row)
    rows.append(ProfileRow("2019-01-01", 1500, 0.0, 900, 300, 11, "Optimal", 0.0))
    return AggregateReport(rows)


def test_plots_match_golden(tmp_path):
    with pytest.warns(UserWarning, match="add1500_ar0"):
        paths = emit_plots(micro_report(), tmp_path)
    names = sorted(p.name for p in paths)
    assert names == ["fleet_size.svg", "passengers.svg", "spill.svg", "spill_spread_add500_ar0.7.svg"]
    for p in paths:
        ET.fromstring(p.read_text())
        assert p.read_text() == (DATA / "golden_svg" / p.name).read_text(), p.name


def test_empty_scenario_warns_and_writes_nothing(tmp_path):
    report = AggregateReport([], [Scenario(500, 0.7)])
    with pytest.warns(UserWarning):
        assert emit_plots(report, tmp_path) == []
    assert not list(tmp_path.glob("*.svg"))


def test_single_point_series_is_valid_svg(tmp_path):
    row = ProfileRow("2019-01-01", 10, 0.0, 5, 2, 1, "Optimal", 0.0)
    row.sweep[1] = SweepPoint(1, 0.0, "Optimal", 0.0, 0, 0)
    with pytest.warns(UserWarning, match="add20_ar0"):  # the second scenario has no sweep
        paths = emit_plots(AggregateReport([row, ProfileRow("2019-01-01", 20, 0.0)]), tmp_path)
    for p in paths:
        root = ET.fromstring(p.read_text())
        assert root.tag.endswith("svg")


# --- CLI ------------------------------------------------------------------------------

NET_FLAGS = ["--steps-per-day", "24", "--step-minutes", "60", "--levels", "2", "--soc-increment", "0.4",
             "--tau", "1", "--kappa", "1"]


def test_cli_stages_compose(tmp_path, capsys):
    sched, prof, series = tmp_path / "s.csv", tmp_path / "p.csv", tmp_path / "series.csv"
    assert cli.main(["gen-schedule", "--days", "2", "--flights", "150", "--seed", "3", "-o", str(sched)]) == 0
    assert cli.main(["gen-demand", "--schedule", str(sched), "--add", "30", "--seed", "1", "-o", str(prof)]) == 0
    assert cli.main(["dispatch", "--profiles", str(prof), *NET_FLAGS, "-o", str(series)]) == 0
    assert series.read_text().startswith("from,to,step,flights,passengers")
    out = tmp_path / "fleet.csv"
    assert cli.main(["size-fleet", "--series", str(series), *NET_FLAGS, "-o", str(out)]) == 0
    fleet = int(out.read_text().splitlines()[1].split(",")[0])
    assert fleet > 0
    spill = tmp_path / "spill.csv"
    assert cli.main(["spill", "--series", str(series), "--fleet-size", "0", *NET_FLAGS, "-o", str(spill)]) == 0
    pax = sum(int(line.split(",")[4]) for line in series.read_text().splitlines()[1:])
    assert sum(int(line.split(",")[3]) for line in spill.read_text().splitlines()[1:]) == pax
    bounds = tmp_path / "bounds.csv"
    assert cli.main(["simulate-bounds", "--series", str(series), "--fleet-size", str(fleet), *NET_FLAGS,
                     "--upper-out", str(tmp_path / "ub.csv"), "-o", str(bounds)]) == 0
    assert bounds.read_text().splitlines()[0] == "bound,daily_spill,flights_flown,repositioning_flights"
    assert (tmp_path / "ub.csv").read_text().startswith("from,to,step,spill")


def test_cli_experiment_and_plot(tmp_path):
    cfg = tiny_config(tmp_path, synthetic=SyntheticScheduleParams(days=1, daily_flights_mean=150, seed=3))
    path = write_json(tmp_path / "c.json", cfg)
    out = tmp_path / "exp"
    assert cli.main(["experiment", "--config", str(path), "--output", str(out), "--seed", "2"]) == 0
    assert (out / "plots" / "spill.svg").exists()
    assert json.loads((out / "config.json").read_text())["base_seed"] == 2
    assert cli.main(["plot", "--report", str(out / "report.csv"), "--out", str(tmp_path / "pl")]) == 0
    assert (tmp_path / "pl" / "fleet_size.svg").read_text() == (out / "plots" / "fleet_size.svg").read_text()


def test_cli_exit_codes(tmp_path, monkeypatch):
    assert cli.main(["experiment", "--config", str(tmp_path / "none.json")]) == cli.EXIT_CONFIG
    assert cli.main(["dispatch", "--profiles", str(tmp_path / "none.csv")]) == cli.EXIT_CONFIG
    cfg = tiny_config(tmp_path, time_limit=1e-6,
                      synthetic=SyntheticScheduleParams(days=1, daily_flights_mean=400, seed=2))
    path = write_json(tmp_path / "c.json", cfg)
    assert cli.main(["experiment", "--config", str(path), "--output", str(tmp_path / "o")]) == cli.EXIT_PARTIAL

    from uamfleet.harness import pipeline

    def broken(name):
        raise SolverError("no binary")

    monkeypatch.setattr(pipeline, "get_adapter", broken)
    assert cli.main(["experiment", "--config", str(path), "--output", str(tmp_path / "o2")]) == cli.EXIT_SOLVER
