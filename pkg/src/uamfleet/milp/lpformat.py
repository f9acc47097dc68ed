"""CPLEX LP text output."""

from __future__ import annotations

from uamfleet.milp.model import MilpModel

_TERMS_PER_LINE = 8


def _num(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def _expr(model: MilpModel, terms: dict) -> list[str]:
    """Render ``terms`` as wrapped lines of ``+ c name`` chunks."""
    chunks = []
    for col in sorted(terms):
        coef = terms[col]
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        name = model.variables[col].name
        body = name if mag == 1 else f"{_num(mag)} {name}"
        chunks.append(f"{sign} {body}")
    if not chunks:
        return ["0 " + model.variables[0].name] if model.variables else ["0"]
    if chunks[0].startswith("+ "):
        chunks[0] = chunks[0][2:]
    return [" ".join(chunks[k:k + _TERMS_PER_LINE]) for k in range(0, len(chunks), _TERMS_PER_LINE)]


def write_lp(model: MilpModel) -> str:
    lines = [f"\\ {model.name}"]
    if not model.variables:
        lines.append("END")
        return "\n".join(lines) + "\n"

    lines.append("Minimize")
    expr = _expr(model, model.objective)
    lines.append(" obj: " + expr[0])
    lines.extend("  " + rest for rest in expr[1:])

    lines.append("Subject To")
    for con in model.constraints:
        expr = _expr(model, con.terms)
        op = "=" if con.sense == "=" else con.sense
        if len(expr) == 1:
            lines.append(f" {con.name}: {expr[0]} {op} {_num(con.rhs)}")
        else:
            lines.append(f" {con.name}: {expr[0]}")
            lines.extend("  " + rest for rest in expr[1:-1])
            lines.append(f"  {expr[-1]} {op} {_num(con.rhs)}")

    ordered = sorted(model.variables, key=lambda v: v.sort_key())
    bounds = []
    for v in ordered:
        if v.ub is not None:
            bounds.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
        elif v.lb != 0:
            bounds.append(f" {v.name} >= {_num(v.lb)}")
    if bounds:
        lines.append("Bounds")
        lines.extend(bounds)
    generals = [v.name for v in ordered if v.integer]
    if generals:
        lines.append("General")
        for k in range(0, len(generals), _TERMS_PER_LINE):
            lines.append(" " + " ".join(generals[k:k + _TERMS_PER_LINE]))
    lines.append("END")
    return "\n".join(lines) + "\n"
