"""Explicit linear model and solution containers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

KIND_ORDER = {"n": 0, "u": 1, "C": 2, "s": 3}
TAGS = ("dynamics", "demand", "energy", "cyclic", "spill_pos", "spill_def", "fleet_fix")


def var_name(kind: str, index: tuple) -> str:
    return kind + "_" + "_".join(str(i) for i in index) if index else kind


@dataclass
class Variable:
    name: str
    kind: str
    index: tuple
    lb: float = 0.0
    ub: float | None = None
    integer: bool = True

    def sort_key(self):
        return (KIND_ORDER.get(self.kind, len(KIND_ORDER)), self.kind, self.index)


@dataclass
class Constraint:
    name: str
    tag: str
    index: tuple
    terms: dict  # column -> coefficient
    sense: str  # "<=", ">=", "="
    rhs: float


@dataclass
class MilpModel:
    name: str = "model"
    kind: str = "generic"
    variables: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)  # column -> coefficient
    constraints: list = field(default_factory=list)
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._columns = {v.name: c for c, v in enumerate(self.variables)}

    def add_variable(self, kind: str, index: tuple = (), lb: float = 0.0, ub: float | None = None,
                     integer: bool = True, name: str | None = None) -> int:
        name = name or var_name(kind, index)
        if name in self._columns:
            raise ValueError(f"duplicate variable {name}")
        self._columns[name] = len(self.variables)
        self.variables.append(Variable(name, kind, tuple(index), lb, ub, integer))
        return self._columns[name]

    def column(self, name: str) -> int:
        return self._columns[name]

    def has(self, name: str) -> bool:
        return name in self._columns

    def add_constraint(self, tag: str, index: tuple, terms: dict, sense: str, rhs: float,
                       name: str | None = None) -> Constraint:
        if sense not in ("<=", ">=", "="):
            raise ValueError(f"bad constraint sense {sense!r}")
        for col in terms:
            if not 0 <= col < len(self.variables):
                raise ValueError(f"constraint references unknown column {col}")
        con = Constraint(name or var_name(tag, index), tag, tuple(index), dict(terms), sense, float(rhs))
        self.constraints.append(con)
        return con

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    def evaluate_objective(self, values: dict) -> float:
        return sum(coef * values.get(self.variables[c].name, 0) for c, coef in self.objective.items())


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    TIMED_OUT = "TimedOut"

    @property
    def has_solution(self) -> bool:
        return self in (Status.OPTIMAL, Status.FEASIBLE)


@dataclass
class Solution:
    status: Status
    objective_value: float | None = None
    values: dict = field(default_factory=dict)  # variable name -> int, zeros omitted
    gap: float | None = None  # relative gap for Feasible results
    bound: float | None = None  # best proven dual bound
    runtime: float = 0.0
    solver: str = ""

    def __getitem__(self, name: str) -> int:
        return self.values.get(name, 0)

    def get(self, kind: str, *index) -> int:
        return self.values.get(var_name(kind, index), 0)

    @property
    def absolute_gap(self) -> float:
        if self.objective_value is None or self.bound is None:
            return 0.0
        return max(0.0, self.objective_value - self.bound)

    def describe(self) -> str:
        if self.status is Status.FEASIBLE and self.gap is not None:
            return f"Feasible(gap={self.gap:.4g})"
        return self.status.value
