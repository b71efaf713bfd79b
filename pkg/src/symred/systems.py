"""Equation systems in solved form and normal-form rewriting on their
solution manifolds."""

from __future__ import annotations

from dataclasses import dataclass, field

from .expr import (
    Expr, ExprError, IterationCapExceeded, Jet, atoms, contains, substitute,
)
from .jets import JetSpace, total_derivative_multi
from .zerotest import Constraint


class ConflictingConstraints(ExprError):
    pass


@dataclass(frozen=True)
class EquationSystem:
    """Equations ``leading jet coordinate = right-hand side`` plus the
    domain constraints under which they are meant."""

    js: JetSpace
    equations: tuple  # of (Jet, Expr)
    constraints: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "equations", tuple(self.equations))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        leads = [lhs for lhs, _ in self.equations]
        if len(set(leads)) != len(leads):
            raise ConflictingConstraints("leading coordinates must be pairwise distinct")
        for lhs, rhs in self.equations:
            if contains(rhs, lhs):
                raise ValueError(f"right side of {lhs!r} contains its own leading coordinate")

    @property
    def order(self) -> int:
        orders = [lhs.order for lhs, _ in self.equations]
        orders += [a.order for _, rhs in self.equations
                   for a in atoms(rhs, Jet)]
        return max(orders, default=0)

    def residual_exprs(self):
        return [lhs - rhs for lhs, rhs in self.equations]


def _divides(lead: Jet, jet: Jet) -> bool:
    if lead.dep != jet.dep:
        return False
    have = dict(jet.index)
    return all(have.get(v, 0) >= c for v, c in lead.index)


def _quotient(lead: Jet, jet: Jet):
    have = dict(jet.index)
    for v, c in lead.index:
        have[v] -= c
    return tuple((v, c) for v, c in have.items() if c)


def restrict_to_manifold(e: Expr, sys: EquationSystem, extra=(),
                         cap: int = 64, order_cap: int = 8) -> Expr:
    """Exhaustively rewrite leading coordinates and all their
    total-derivative consequences until nothing rewritable remains.

    ``extra`` supplies additional solved-form pairs (invariant-surface
    conditions and the like); they may not clash with the system's own
    leading coordinates.
    """
    rules = {}
    for lhs, rhs in list(sys.equations) + list(extra):
        if lhs in rules and rules[lhs] != rhs:
            raise ConflictingConstraints(f"conflicting rules for {lhs!r}")
        rules[lhs] = rhs

    js = sys.js
    for _ in range(cap):
        batch = {}
        for a in atoms(e, Jet):
            best = None
            for lead in rules:
                if _divides(lead, a):
                    if best is None or lead.order > best.order or \
                            (lead.order == best.order and (lead.dep, lead.index) <
                             (best.dep, best.index)):
                        best = lead
            if best is None:
                continue
            if a.order > order_cap:
                raise IterationCapExceeded(
                    f"manifold rewriting exceeded order cap {order_cap} at {a!r}")
            batch[a] = total_derivative_multi(rules[best], _quotient(best, a), js)
        if not batch:
            return e
        e = substitute(e, batch)
    raise IterationCapExceeded("manifold rewriting did not terminate")


@dataclass
class CheckReport:
    """Outcome of an invariance/reduction/compatibility check."""

    verdict: str  # "pass" | "fail" | "inconclusive"
    entries: list = field(default_factory=list)  # per-residual dicts
    seed: int = 0
    tol_abs: float = 1e-9
    tol_rel: float = 1e-9
    provenance: str = "symbolic"
    witness: dict | None = None
    assumptions: tuple = ()
    kind: str = ""
    case: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "kind": self.kind,
            "verdict": self.verdict,
            "residual_max": max((ent.get("witness_value", 0.0) for ent in self.entries),
                                key=abs, default=0.0),
            "seed": self.seed,
            "tolerances": {"abs": self.tol_abs, "rel": self.tol_rel},
            "provenance": self.provenance,
            "witness": self.witness,
            "assumptions": list(self.assumptions),
        }


def aggregate_report(results, seed: int, kind: str = "", case: str = "",
                     tol_abs: float = 1e-9, tol_rel: float = 1e-9,
                     assumptions=()) -> CheckReport:
    """Combine per-residual ZeroResults into one CheckReport."""
    entries = []
    verdict = "pass"
    witness = None
    provenance = "symbolic"
    for label, zr in results:
        entries.append({
            "label": label,
            "verdict": zr.verdict,
            "provenance": zr.provenance,
            "witness": zr.witness,
            "witness_value": zr.witness_value,
            "points_tested": zr.points_tested,
            "residual": zr.residual,
        })
        if zr.provenance == "probabilistic":
            provenance = "probabilistic"
        if zr.verdict == "nonzero":
            verdict = "fail"
            if witness is None:
                witness = zr.witness
        elif zr.verdict == "inconclusive" and verdict != "fail":
            verdict = "inconclusive"
    return CheckReport(verdict=verdict, entries=entries, seed=seed,
                       tol_abs=tol_abs, tol_rel=tol_rel, provenance=provenance,
                       witness=witness, assumptions=tuple(assumptions),
                       kind=kind, case=case)
