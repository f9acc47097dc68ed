"""Solver adapters.

``HighsAdapter`` hands HiGHS the CPLEX-LP text produced by :func:`write_lp`;
``ScipyAdapter`` passes the model in memory to ``scipy.optimize.milp``.  Each
solve uses a fresh solver handle.
"""

from __future__ import annotations

import os
import tempfile
import time
from dataclasses import dataclass

import numpy as np

from uamfleet.milp.lpformat import write_lp
from uamfleet.milp.model import MilpModel, Solution, Status

INTEGRALITY_TOL = 1e-6
OPTIMAL_GAP_TOL = 1e-9


class SolverError(RuntimeError):
    """The solver could not be run or returned something unusable."""

    def __init__(self, message: str, log: str = ""):
        super().__init__(message + (f"\n--- solver log ---\n{log}" if log else ""))
        self.log = log


@dataclass(frozen=True)
class SolverLimits:
    time_limit: float = 600.0
    rel_gap: float = 0.005
    # objectives here are integer counts plus a tiny flight penalty, so an
    # absolute gap below 1 already certifies the integer part
    abs_gap: float | None = 0.5
    threads: int | None = 1
    relax: bool = False

    @classmethod
    def exact(cls, time_limit: float = 600.0) -> "SolverLimits":
        return cls(time_limit=time_limit, rel_gap=0.0, abs_gap=0.0)


def _round_values(model: MilpModel, raw) -> dict:
    values = {}
    for col, x in enumerate(raw):
        var = model.variables[col]
        if var.integer:
            r = round(float(x))
            if abs(x - r) > INTEGRALITY_TOL:
                raise SolverError(f"non-integral value {x!r} for {var.name}")
            x = int(r)
        if x:
            values[var.name] = x
    return values


def _classify(has_solution: bool, objective, bound, proven: bool) -> tuple[Status, float | None]:
    if not has_solution:
        return Status.TIMED_OUT, None
    gap = 0.0
    if bound is not None and objective is not None:
        abs_gap = max(0.0, objective - bound)
        gap = abs_gap / max(abs(objective), 1e-10) if abs_gap > OPTIMAL_GAP_TOL else 0.0
    if proven and gap == 0.0:
        return Status.OPTIMAL, 0.0
    return Status.FEASIBLE, gap


def _trivial(model: MilpModel) -> Solution:
    return Solution(Status.OPTIMAL, 0.0, {}, 0.0, 0.0, 0.0, "trivial")


class HighsAdapter:
    name = "highs"
    accepts_lp_file = True

    def __init__(self, keep_lp: str | None = None):
        self.keep_lp = keep_lp

    def solve(self, model: MilpModel, limits: SolverLimits = SolverLimits(), start: dict | None = None) -> Solution:
        if not model.variables:
            return _trivial(model)
        try:
            import highspy
        except ImportError as exc:  # pragma: no cover - dependency is declared
            raise SolverError("highspy is not installed") from exc

        with tempfile.TemporaryDirectory(prefix="uamfleet-") as tmp:
            lp_path = self.keep_lp or os.path.join(tmp, f"{model.name}.lp")
            log_path = os.path.join(tmp, "highs.log")
            with open(lp_path, "w") as fh:
                fh.write(write_lp(model))
            return self.solve_file(lp_path, model, limits, log_path, start)

    def solve_file(self, lp_path: str, model: MilpModel, limits: SolverLimits, log_path: str | None = None,
                   start: dict | None = None) -> Solution:
        """Solve an LP file; ``start`` maps variable names to a feasible assignment."""
        import highspy

        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        if log_path:
            h.setOptionValue("log_file", log_path)
        h.setOptionValue("time_limit", float(limits.time_limit))
        h.setOptionValue("mip_rel_gap", float(limits.rel_gap))
        if limits.abs_gap is not None:
            h.setOptionValue("mip_abs_gap", float(limits.abs_gap))
        if limits.threads:
            h.setOptionValue("threads", int(limits.threads))
        if limits.relax:
            h.setOptionValue("solve_relaxation", True)

        def log_text():
            if log_path and os.path.exists(log_path):
                with open(log_path) as fh:
                    return fh.read()
            return ""

        t0 = time.perf_counter()
        status = h.readModel(lp_path)
        if status == highspy.HighsStatus.kError:
            raise SolverError(f"HiGHS could not read {lp_path}", log_text())
        if start and not limits.relax:
            guess = highspy.HighsSolution()
            guess.col_value = [float(start.get(name, 0)) for name in h.getLp().col_names_]
            h.setSolution(guess)
        run_status = h.run()
        runtime = time.perf_counter() - t0
        if run_status == highspy.HighsStatus.kError:
            raise SolverError("HiGHS run failed", log_text())

        ms = h.getModelStatus()
        MS = highspy.HighsModelStatus
        if ms in (MS.kInfeasible, MS.kUnboundedOrInfeasible):
            return Solution(Status.INFEASIBLE, runtime=runtime, solver=self.name)
        if ms == MS.kUnbounded:
            raise SolverError("model is unbounded", log_text())
        info = h.getInfo()
        has_solution = info.primal_solution_status == 2  # kSolutionStatusFeasible
        if ms not in (MS.kOptimal, MS.kTimeLimit, MS.kIterationLimit, MS.kSolutionLimit, MS.kInterrupt):
            if not has_solution:
                raise SolverError(f"HiGHS ended with status {h.modelStatusToString(ms)}", log_text())
        if not has_solution:
            return Solution(Status.TIMED_OUT, runtime=runtime, solver=self.name)

        objective = float(info.objective_function_value)
        bound = float(info.mip_dual_bound) if not limits.relax and np.isfinite(info.mip_dual_bound) else objective
        if limits.relax:
            values = {}
            names = h.getLp().col_names_
            for name, x in zip(names, h.getSolution().col_value):
                if x:
                    values[name] = float(x)
            return Solution(Status.OPTIMAL if ms == MS.kOptimal else Status.FEASIBLE, objective, values,
                            0.0, objective, runtime, self.name)

        names = h.getLp().col_names_
        col_value = h.getSolution().col_value
        raw = np.zeros(model.n_variables)
        for name, x in zip(names, col_value):
            if model.has(name):
                raw[model.column(name)] = x
        values = _round_values(model, raw)
        status, gap = _classify(True, objective, bound, ms == MS.kOptimal)
        return Solution(status, objective, values, gap, bound, runtime, self.name)


class ScipyAdapter:
    """In-memory path through ``scipy.optimize.milp`` (no absolute-gap option)."""

    name = "scipy"
    accepts_lp_file = False

    def solve(self, model: MilpModel, limits: SolverLimits = SolverLimits(), start: dict | None = None) -> Solution:
        # scipy.optimize.milp takes no initial solution, so ``start`` is ignored
        if not model.variables:
            return _trivial(model)
        from scipy.optimize import Bounds, LinearConstraint, milp
        from scipy.sparse import coo_array

        n = model.n_variables
        c = np.zeros(n)
        for col, coef in model.objective.items():
            c[col] = coef
        rows, cols, data = [], [], []
        lo = np.empty(model.n_constraints)
        hi = np.empty(model.n_constraints)
        for r, con in enumerate(model.constraints):
            for col, coef in con.terms.items():
                rows.append(r)
                cols.append(col)
                data.append(coef)
            lo[r] = con.rhs if con.sense in (">=", "=") else -np.inf
            hi[r] = con.rhs if con.sense in ("<=", "=") else np.inf
        lb = np.array([v.lb for v in model.variables], dtype=float)
        ub = np.array([np.inf if v.ub is None else v.ub for v in model.variables], dtype=float)
        integrality = np.zeros(n) if limits.relax else np.array([1 if v.integer else 0 for v in model.variables])
        constraints = []
        if model.constraints:
            A = coo_array((data, (rows, cols)), shape=(model.n_constraints, n)).tocsr()
            constraints.append(LinearConstraint(A, lo, hi))
        t0 = time.perf_counter()
        try:
            res = milp(c, constraints=constraints, integrality=integrality, bounds=Bounds(lb, ub),
                       options={"time_limit": float(limits.time_limit), "mip_rel_gap": float(limits.rel_gap),
                                "disp": False})
        except Exception as exc:  # scipy surfaces HiGHS failures as generic errors
            raise SolverError(f"scipy.optimize.milp failed: {exc}") from exc
        runtime = time.perf_counter() - t0
        if res.status == 2:
            return Solution(Status.INFEASIBLE, runtime=runtime, solver=self.name)
        if res.status == 3:
            raise SolverError("model is unbounded")
        if res.x is None:
            if res.status == 1:
                return Solution(Status.TIMED_OUT, runtime=runtime, solver=self.name)
            raise SolverError(f"scipy.optimize.milp: {res.message}")
        objective = float(res.fun)
        if limits.relax:
            values = {model.variables[k].name: float(x) for k, x in enumerate(res.x) if x}
            return Solution(Status.OPTIMAL, objective, values, 0.0, objective, runtime, self.name)
        bound = getattr(res, "mip_dual_bound", None)
        bound = float(bound) if bound is not None and np.isfinite(bound) else None
        values = _round_values(model, res.x)
        status, gap = _classify(True, objective, bound, res.status == 0)
        if bound is None and res.status != 0:
            gap = float(getattr(res, "mip_gap", np.nan))
        return Solution(status, objective, values, gap, bound, runtime, self.name)


ADAPTERS = {"highs": HighsAdapter, "scipy": ScipyAdapter}


def get_adapter(name: str):
    try:
        return ADAPTERS[name]()
    except KeyError:
        raise SolverError(f"unknown solver {name!r}; choose from {sorted(ADAPTERS)}") from None


def solve(model: MilpModel, adapter=None, limits: SolverLimits = SolverLimits(), start=None) -> Solution:
    """Solve with the named or given adapter; ``start`` is an optional feasible
    assignment (a ``Solution`` or a name -> value map) used as a warm start."""
    adapter = HighsAdapter() if adapter is None else (get_adapter(adapter) if isinstance(adapter, str) else adapter)
    if isinstance(start, Solution):
        start = start.values
    return adapter.solve(model, limits, start=start)
