"""Per-profile rows, the wide report CSV and per-scenario summary statistics.

Gap columns are absolute (objective minus proven bound), so a spill entry is
optimal to within ``gap`` passengers and a fleet size to within ``fleet_gap``
aircraft.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from uamfleet.harness.config import Scenario

BASE_COLUMNS = ("day", "add", "ar_coeff", "realized_passengers", "realized_flights", "zero_spill_fleet_size",
                "fleet_status", "fleet_gap", "violations", "error")
POINT_FIELDS = ("spill", "status", "gap", "lower", "upper")


@dataclass
class SweepPoint:
    fleet_size: int
    spill: float | None = None
    status: str = ""
    gap: float | None = None
    lower: int | None = None
    upper: int | None = None
    runtime: float = 0.0


@dataclass
class ProfileRow:
    day: str
    add: float
    ar_coeff: float
    realized_passengers: int = 0
    realized_flights: int = 0
    zero_spill_fleet_size: int | None = None
    fleet_status: str = ""
    fleet_gap: float | None = None
    fleet_runtime: float = 0.0
    violations: int = 0
    error: str = ""
    sweep: dict[int, SweepPoint] = field(default_factory=dict)

    @property
    def scenario(self) -> Scenario:
        return Scenario(self.add, self.ar_coeff)

    @property
    def failed(self) -> bool:
        return bool(self.error) or any(p.spill is None for p in self.sweep.values())

    def spill_curve(self) -> list[tuple[int, float]]:
        return [(f, p.spill) for f, p in sorted(self.sweep.items()) if p.spill is not None]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return str(int(x)) if x.is_integer() else f"{x:.6g}"
    return str(x)


def _num(text: str, kind=float):
    return None if text == "" else kind(float(text)) if kind is int else kind(text)


def _quartiles(values) -> tuple:
    if not values:
        return None, None, None
    q1, med, q3 = np.percentile(np.asarray(values, dtype=float), [25, 50, 75])
    return float(q1), float(med), float(q3)


class AggregateReport:
    def __init__(self, rows: list[ProfileRow], scenarios: list[Scenario] | None = None):
        self.rows = list(rows)
        if scenarios is None:
            scenarios = list(dict.fromkeys(r.scenario for r in self.rows))
        self.scenarios = list(scenarios)

    @property
    def fleet_sizes(self) -> list[int]:
        return sorted({f for r in self.rows for f in r.sweep})

    @property
    def failures(self) -> list[ProfileRow]:
        return [r for r in self.rows if r.failed]

    def rows_for(self, scenario: Scenario) -> list[ProfileRow]:
        return [r for r in self.rows if r.scenario == scenario]

    # --- report.csv -------------------------------------------------------------

    def columns(self) -> list[str]:
        cols = list(BASE_COLUMNS)
        for f in self.fleet_sizes:
            cols += [f"{name}_F{f}" for name in POINT_FIELDS]
        return cols

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns())
        for r in self.rows:
            out = [r.day, _fmt(float(r.add)), _fmt(float(r.ar_coeff)), r.realized_passengers, r.realized_flights,
                   _fmt(r.zero_spill_fleet_size), r.fleet_status, _fmt(r.fleet_gap), r.violations, r.error]
            for f in self.fleet_sizes:
                p = r.sweep.get(f)
                out += [""] * len(POINT_FIELDS) if p is None else [
                    _fmt(p.spill), p.status, _fmt(p.gap), _fmt(p.lower), _fmt(p.upper)]
            w.writerow(out)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "AggregateReport":
        reader = csv.DictReader(io.StringIO(text))
        header = reader.fieldnames or []
        if tuple(header[: len(BASE_COLUMNS)]) != BASE_COLUMNS:
            raise ValueError("not a report.csv: unexpected header")
        sizes = sorted({int(c.split("_F")[-1]) for c in header[len(BASE_COLUMNS):]})
        rows = []
        for rec in reader:
            row = ProfileRow(day=rec["day"], add=float(rec["add"]), ar_coeff=float(rec["ar_coeff"]),
                             realized_passengers=int(rec["realized_passengers"]),
                             realized_flights=int(rec["realized_flights"]),
                             zero_spill_fleet_size=_num(rec["zero_spill_fleet_size"], int),
                             fleet_status=rec["fleet_status"], fleet_gap=_num(rec["fleet_gap"]),
                             violations=int(rec["violations"]), error=rec["error"])
            for f in sizes:
                if rec[f"status_F{f}"] == "" and rec[f"spill_F{f}"] == "":
                    continue
                row.sweep[f] = SweepPoint(f, _num(rec[f"spill_F{f}"]), rec[f"status_F{f}"], _num(rec[f"gap_F{f}"]),
                                          _num(rec[f"lower_F{f}"], int), _num(rec[f"upper_F{f}"], int))
            rows.append(row)
        return cls(rows)

    # --- summary.csv -----------------------------------------------------------

    def summary(self) -> list[dict]:
        out = []
        for scen in self.scenarios:
            rows = self.rows_for(scen)
            pax = [r.realized_passengers for r in rows]
            fleet = [r.zero_spill_fleet_size for r in rows if r.zero_spill_fleet_size is not None]
            entry = {"scenario": scen.label, "add": scen.add, "ar_coeff": scen.ar_coeff, "profiles": len(rows),
                     "failures": sum(r.failed for r in rows)}
            entry["passengers_q1"], entry["passengers_median"], entry["passengers_q3"] = _quartiles(pax)
            entry["fleet_q1"], entry["fleet_median"], entry["fleet_q3"] = _quartiles(fleet)
            entry["fleet_min"] = min(fleet) if fleet else None
            entry["fleet_max"] = max(fleet) if fleet else None
            for f in self.fleet_sizes:
                points = [r.sweep[f] for r in rows if f in r.sweep]
                spills = [p.spill for p in points if p.spill is not None]
                lows = [p.lower for p in points if p.lower is not None]
                ups = [p.upper for p in points if p.upper is not None]
                entry[f"spill_mean_F{f}"] = float(np.mean(spills)) if spills else None
                entry[f"spill_var_F{f}"] = float(np.var(spills)) if spills else None
                entry[f"lower_mean_F{f}"] = float(np.mean(lows)) if lows else None
                entry[f"upper_mean_F{f}"] = float(np.mean(ups)) if ups else None
            out.append(entry)
        return out

    def summary_csv(self) -> str:
        entries = self.summary()
        cols = list(dict.fromkeys(k for e in entries for k in e))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for e in entries:
            w.writerow([_fmt(float(v)) if isinstance(v, (int, float)) and not isinstance(v, bool)
                        and k not in ("profiles", "failures") else _fmt(v) for k, v in
                        ((c, e.get(c)) for c in cols)])
        return buf.getvalue()

    def timings_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("day", "add", "ar_coeff", "model", "fleet_size", "runtime_s"))
        for r in self.rows:
            w.writerow((r.day, _fmt(float(r.add)), _fmt(float(r.ar_coeff)), "fleet_sizing", "",
                        f"{r.fleet_runtime:.3f}"))
            for f, p in sorted(r.sweep.items()):
                w.writerow((r.day, _fmt(float(r.add)), _fmt(float(r.ar_coeff)), "spill", f, f"{p.runtime:.3f}"))
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> None:
        """report.csv and summary.csv are deterministic; wall-clock times go to timings.csv."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.csv").write_text(self.to_csv())
        (out_dir / "summary.csv").write_text(self.summary_csv())
        (out_dir / "timings.csv").write_text(self.timings_csv())
