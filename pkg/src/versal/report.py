"""Uniform result records for checks and solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass
class Report:
    verdict: str
    caps: dict = field(default_factory=dict)
    findings: list = field(default_factory=list)  # (location, residual) pairs
    unchecked: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.findings

    def add(self, location, residual):
        self.findings.append((location, residual))

    def to_dict(self):
        out = {
            "verdict": self.verdict,
            "caps": jsonable(self.caps),
            "findings": [{"location": jsonable(loc), "residual": jsonable(res)}
                         for loc, res in self.findings],
        }
        if self.unchecked:
            out["unchecked"] = jsonable(self.unchecked)
        if self.data:
            out["data"] = jsonable(self.data)
        return out


def jsonable(x):
    """Convert nested results into JSON-ready values with exact scalars as text."""
    from .coefficients.field import Gaussian, format_scalar
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, (Fraction, Gaussian)):
        return format_scalar(x)
    if isinstance(x, float):
        return "inf" if x == float("inf") else repr(x)
    if isinstance(x, dict):
        return {_key(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_json"):
        return x.to_json()
    return str(x)


def _key(k):
    if isinstance(k, str):
        return k
    if isinstance(k, tuple):
        return ",".join(str(a) for a in k)
    return str(k)
