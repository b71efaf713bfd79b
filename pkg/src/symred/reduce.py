"""Ansatz substitution: verifying and deriving reduced systems, checking
transformation compatibility between equations, and testing overdetermined
first-order pairs for compatibility.

An ansatz assigns expressions (in invariant variables and unknown
functions of them) to jet coordinates of the original dependents.  When
an invariant variable is defined implicitly, its base-variable
derivatives are obtained by solving the linear chain system; the pivot
determinants of that solve become mandatory domain constraints.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .expr import (
    Add, DomainFault, Expr, ExprError, Jet, Mul, Num, ONE, Param,
    ParameterBinding, Var,
    ZERO, add, atoms, diff_partial, eval_with_scale, expand, mul, pow_,
    simplify, substitute,
)
from .jets import JetSpace, total_derivative
from .linalg import SingularImplicitSystem, gaussian_eliminate
from .numeric import NoConvergence, newton_system
from .rewrites import (
    assume_positive, expand_trig, reduce_even_cosines, sqrt_pythagoras,
)
from .systems import CheckReport, EquationSystem, aggregate_report, restrict_to_manifold
from .zerotest import Constraint, ZeroResult, _sym_name, is_zero

ReducedSystem = EquationSystem


class UnreducedVariable(ExprError):
    """A residual kept a bare independent variable that the candidate
    manifold cannot rewrite and the sampler cannot bound."""


def _check_seed(seed: int, i: int) -> int:
    return (seed * 1000003 + i) & 0x7FFFFFFF


@dataclass(frozen=True)
class Ansatz:
    """Substitution rules for jet coordinates of the original dependents.

    ``targets``: (Jet, Expr) pairs; the expressions live in the base
    variables, the invariant variables, and the unknown functions.
    ``phis``: unknown function name -> argument variables.
    ``invariants``: invariant variable -> defining expression (in base
    variables and original dependents); the definition may be implicit
    through the targets.
    ``positive``/``nonneg``: opt-in branch assumptions used when a
    reduced system is derived (logarithm splitting and choosing the
    nonnegative square root of 1 - sin^2).
    """

    js: JetSpace
    targets: tuple
    phis: dict
    invariants: dict = field(default_factory=dict)
    constraints: tuple = ()
    positive: bool = False
    nonneg: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "phis",
                           {p: tuple(a) for p, a in dict(self.phis).items()})
        object.__setattr__(self, "invariants", dict(self.invariants))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "nonneg", tuple(self.nonneg))


@dataclass(frozen=True)
class AnsatzFrame:
    """An ansatz resolved on the extended jet space: the unknown
    functions are dependents, implicit invariant variables carry their
    solved chain rules, and the targets form a rewriting system."""

    js: JetSpace
    system: EquationSystem
    constraints: tuple
    chains: dict


def ansatz_derivatives(a: Ansatz) -> AnsatzFrame:
    """Resolve an ansatz: extend the jet space with the unknown
    functions, solve the chain system for implicit invariant variables,
    and package the targets as a solved-form rewriting system.

    Raises SingularImplicitSystem when the chain system cannot be
    solved; each pivot of the solve is returned as a nonvanishing
    constraint.
    """
    full_js = a.js.with_dependents(a.phis)
    constraints = list(a.constraints)
    chains: dict = {w: {} for w in a.invariants}
    if a.invariants:
        order0 = {lhs: rhs for lhs, rhs in a.targets}
        defs = {w: substitute(d, order0) for w, d in a.invariants.items()}
        ws = sorted(defs)
        pivot_seen = set()
        for x in full_js.independent:
            holders = {w: Param(f"_D_{w}_{x}") for w in ws}
            tmp_js = full_js.with_chains({w: {x: holders[w]} for w in ws})
            eqs = [holders[w] - total_derivative(defs[w], x, tmp_js) for w in ws]
            solution, _, pivots = gaussian_eliminate(eqs, [holders[w] for w in ws])
            for w in ws:
                chains[w][x] = simplify(solution[holders[w]])
            for p in pivots:
                p = simplify(p)
                if not isinstance(p, Num) and p not in pivot_seen:
                    pivot_seen.add(p)
                    constraints.append(Constraint(p, "!="))
        full_js = full_js.with_chains(chains)
    system = EquationSystem(full_js, a.targets, name=a.name or "ansatz")
    return AnsatzFrame(full_js, system, tuple(constraints), chains)


def _compat_residuals(a: Ansatz, frame: AnsatzFrame):
    """Cross-derivative compatibility residuals among first-order targets
    of the same dependent: D_j R_i - D_i R_j."""
    by_dep: dict = {}
    for lhs, rhs in a.targets:
        if lhs.order == 1 and len(lhs.index) == 1:
            by_dep.setdefault(lhs.dep, []).append((lhs.index[0][0], rhs))
    out = []
    for dep in sorted(by_dep):
        rules = sorted(by_dep[dep])
        for (xi, ri), (xj, rj) in itertools.combinations(rules, 2):
            r = total_derivative(ri, xj, frame.js) - total_derivative(rj, xi, frame.js)
            out.append((f"compatibility {dep} ({xi},{xj})", r))
    return out


def verify_reduction(a: Ansatz, original: EquationSystem,
                     candidate: EquationSystem, seed: int = 0,
                     tol_abs: float = 1e-9, tol_rel: float = 1e-9,
                     binding: ParameterBinding | None = None) -> CheckReport:
    """Check that the ansatz maps solutions of the candidate reduced
    system to solutions of the original: substitute the ansatz into each
    original equation (and into the targets' own cross-derivative
    compatibility), restrict to the candidate manifold, zero-test."""
    frame = ansatz_derivatives(a)
    cand = EquationSystem(frame.js, candidate.equations, candidate.constraints,
                          candidate.name)
    constraints = tuple(original.constraints) + frame.constraints + \
        tuple(candidate.constraints)
    labelled = [(f"equation {i}", lhs - rhs)
                for i, (lhs, rhs) in enumerate(original.equations)]
    labelled += _compat_residuals(a, frame)
    results = []
    for i, (label, r) in enumerate(labelled):
        r = restrict_to_manifold(r, frame.system)
        r = restrict_to_manifold(r, cand)
        zr = is_zero(r, constraints, seed=_check_seed(seed, i),
                     tol_abs=tol_abs, tol_rel=tol_rel, binding=binding)
        results.append((label, zr))
    return aggregate_report(results, seed, kind="reduction",
                            case=a.name or original.name,
                            tol_abs=tol_abs, tol_rel=tol_rel)


@dataclass
class ReductionFailure:
    """Structured outcome when no reduced system exists for an ansatz."""

    reason: str
    offending: Expr | None = None
    case: str = ""

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "kind": "derive-reduction",
            "verdict": "fail",
            "reason": self.reason,
            "offending": repr(self.offending) if self.offending is not None else None,
        }


def _touches(e: Expr, syms) -> bool:
    return bool(atoms(e) & syms)


def _coefficient_split(r: Expr, elim):
    """Write an expanded sum as  sum_k key_k * coeff_k  where the keys
    collect every factor involving the eliminable symbols.  The keys are
    assumed functionally independent, so each coefficient must vanish."""
    groups: dict = {}
    terms = r.terms if isinstance(r, Add) else (r,)
    for t in terms:
        factors = t.factors if isinstance(t, Mul) else (t,)
        hot = [f for f in factors if _touches(f, elim)]
        cold = [f for f in factors if not _touches(f, elim)]
        key = mul(*hot) if hot else ONE
        groups.setdefault(key, []).append(mul(*cold) if cold else ONE)
    return {k: simplify(add(*v)) for k, v in groups.items()}


def _solve_linear(c: Expr, lead: Jet):
    """Solve a linear equation ``c == 0`` for ``lead``; returns
    (rhs, pivot) or None if c is not linear in lead."""
    d = simplify(diff_partial(c, lead))
    if d == ZERO or substitute(d, {lead: ZERO}) != d:
        return None
    rem = substitute(c, {lead: ZERO})
    rhs = simplify(mul(Num(-1), rem, pow_(d, Num(-1))))
    return rhs, d


def derive_reduction(a: Ansatz, original: EquationSystem, seed: int = 0,
                     binding: ParameterBinding | None = None):
    """Derive the reduced system the ansatz imposes on its unknown
    functions, or explain why none exists.

    The substituted residuals are separated by the symbols the reduction
    must eliminate (leftover base variables and bare original
    dependents); each coefficient becomes one equation, solved linearly
    for its highest unknown-function derivative.  Returns a
    ReducedSystem on success and a ReductionFailure otherwise.
    """
    case = a.name or original.name
    try:
        frame = ansatz_derivatives(a)
    except SingularImplicitSystem as exc:
        return ReductionFailure(f"implicit invariant chain is singular: {exc}",
                                case=case)

    kept = set(a.invariants)
    for args in a.phis.values():
        kept.update(args)
    elim_vars = {x for x in a.js.independent if x not in kept}
    orig_deps = set(a.js.dependents)

    residuals = [lhs - rhs for lhs, rhs in original.equations]
    residuals += [r for _, r in _compat_residuals(a, frame)]

    solved: list = []  # (lead, rhs, pivot)
    for r in residuals:
        r = restrict_to_manifold(r, frame.system)
        if a.positive:
            r = assume_positive(r)
        elim = {s for s in atoms(r)
                if (isinstance(s, Var) and s.name in elim_vars) or
                (isinstance(s, Jet) and s.dep in orig_deps)}
        r = sqrt_pythagoras(r, a.nonneg)
        r = expand(simplify(expand_trig(r, elim)))
        # even cosine powers only appear once products are distributed,
        # and reducing them introduces new products, so alternate
        for _ in range(8):
            nxt = expand(simplify(reduce_even_cosines(r, elim)))
            if nxt == r:
                break
            r = nxt
        elim = {s for s in atoms(r)
                if (isinstance(s, Var) and s.name in elim_vars) or
                (isinstance(s, Jet) and s.dep in orig_deps)}
        for key, coeff in sorted(_coefficient_split(r, elim).items(),
                                 key=lambda kv: repr(kv[0])):
            coeff = simplify(coeff)
            if coeff == ZERO:
                continue
            if isinstance(coeff, Num):
                return ReductionFailure(
                    "inconsistent: a separated coefficient is a nonzero constant",
                    offending=key, case=case)
            phi_jets = [s for s in atoms(coeff, Jet) if s.dep in a.phis]
            deriv_jets = [s for s in phi_jets if s.order >= 1]
            if not deriv_jets:
                return ReductionFailure(
                    "a separated term has no unknown-function derivative to match "
                    "(degenerate ansatz)", offending=coeff, case=case)
            lead = max(deriv_jets, key=lambda j: (j.order, j.dep, j.index))
            solution = _solve_linear(coeff, lead)
            if solution is None:
                return ReductionFailure(
                    "cannot solve a separated equation linearly for its "
                    "highest unknown-function derivative",
                    offending=coeff, case=case)
            solved.append((lead, solution[0], solution[1]))

    # dedupe repeated equations (the same relation often arrives from
    # several coefficients); conflicting right sides are a failure
    kept_eqs: dict = {}
    kept_pivots: list = []
    for i, (lead, rhs, pivot) in enumerate(solved):
        if lead in kept_eqs:
            if kept_eqs[lead] == rhs:
                continue
            zr = is_zero(kept_eqs[lead] - rhs, frame.constraints,
                         seed=_check_seed(seed, 500 + i), binding=binding)
            if zr.is_zero:
                continue
            return ReductionFailure(
                "inconsistent: two separated equations force different values "
                f"for {lead!r}", offending=kept_eqs[lead] - rhs, case=case)
        kept_eqs[lead] = rhs
        if not isinstance(pivot, Num) and \
                all(c.expr != pivot for c in kept_pivots):
            kept_pivots.append(Constraint(pivot, "!="))

    if not kept_eqs:
        return ReductionFailure("the ansatz produced no equations", case=case)
    if len(kept_eqs) > len(a.phis):
        return ReductionFailure(
            f"{len(kept_eqs)} independent reduced equations for "
            f"{len(a.phis)} unknown functions", case=case)

    equations = sorted(kept_eqs.items(), key=lambda kv: (kv[0].dep, kv[0].index))
    return ReducedSystem(frame.js, equations,
                         frame.constraints + tuple(kept_pivots),
                         name=(a.name + " reduced") if a.name else "reduced")


def systems_equivalent(s1: EquationSystem, s2: EquationSystem, seed: int = 0,
                       constraints=(), binding: ParameterBinding | None = None,
                       tol_abs: float = 1e-9, tol_rel: float = 1e-9) -> CheckReport:
    """Same leading coordinates and identical right sides on the shared
    constraint domain."""
    e1, e2 = dict(s1.equations), dict(s2.equations)
    cs = tuple(constraints) + tuple(s1.constraints) + tuple(s2.constraints)
    results = []
    if set(e1) != set(e2):
        missing = set(e1) ^ set(e2)
        zr = ZeroResult("nonzero", "symbolic",
                        witness={"leads": sorted(_sym_name(j) for j in missing)})
        results.append(("leading coordinates differ", zr))
    else:
        for i, lead in enumerate(sorted(e1, key=lambda j: (j.dep, j.index))):
            zr = is_zero(e1[lead] - e2[lead], cs, seed=_check_seed(seed, i),
                         tol_abs=tol_abs, tol_rel=tol_rel, binding=binding)
            results.append((_sym_name(lead), zr))
    return aggregate_report(results, seed, kind="system-equivalence",
                            case=f"{s1.name} == {s2.name}",
                            tol_abs=tol_abs, tol_rel=tol_rel)


# ---------------------------------------------------------------------------
# transformations between equations

@dataclass(frozen=True)
class BacklundRelation:
    """First-order relations expressing derivatives of a new dependent
    through an old one, claimed to map solutions of ``source`` (an
    equation for the old dependent) to solutions of ``target``."""

    js: JetSpace
    relations: tuple  # ((Jet, Expr), ...)
    source: EquationSystem
    target: EquationSystem
    constraints: tuple = ()
    name: str = ""


def verify_backlund(bt: BacklundRelation, seed: int = 0,
                    tol_abs: float = 1e-9, tol_rel: float = 1e-9,
                    binding: ParameterBinding | None = None) -> CheckReport:
    """Pass iff, modulo the source equation and the relations themselves,
    (a) the relations are cross-derivative compatible and (b) the target
    equation's residual vanishes."""
    source = EquationSystem(bt.js, bt.source.equations, bt.source.constraints,
                            bt.source.name)
    constraints = tuple(bt.constraints) + tuple(source.constraints) + \
        tuple(bt.target.constraints)
    labelled = []
    by_dep: dict = {}
    for lhs, rhs in bt.relations:
        if lhs.order == 1 and len(lhs.index) == 1:
            by_dep.setdefault(lhs.dep, []).append((lhs.index[0][0], rhs))
    for dep in sorted(by_dep):
        for (xi, ri), (xj, rj) in itertools.combinations(sorted(by_dep[dep]), 2):
            r = total_derivative(ri, xj, bt.js) - total_derivative(rj, xi, bt.js)
            labelled.append((f"compatibility {dep} ({xi},{xj})", r))
    for i, (lhs, rhs) in enumerate(bt.target.equations):
        labelled.append((f"target equation {i}", lhs - rhs))
    results = []
    for i, (label, r) in enumerate(labelled):
        r = restrict_to_manifold(r, source, extra=bt.relations)
        zr = is_zero(r, constraints, seed=_check_seed(seed, i),
                     tol_abs=tol_abs, tol_rel=tol_rel, binding=binding)
        results.append((label, zr))
    return aggregate_report(results, seed, kind="backlund", case=bt.name,
                            tol_abs=tol_abs, tol_rel=tol_rel)


# ---------------------------------------------------------------------------
# overdetermined first-order pairs

def _solve_first_derivatives(assignments, point, binding, rng, tries: int = 8):
    """Numeric values of the assigned first-derivative jets at a base
    point.  The assignments may be implicit (right sides containing the
    jets themselves), so this is a small Newton solve with random
    restarts."""
    unknowns = [lhs for lhs, _ in assignments]
    residuals = [lhs - rhs for lhs, rhs in assignments]
    for _ in range(tries):
        guesses = [rng.uniform(-2.0, 2.0) for _ in unknowns]
        try:
            vals = newton_system(residuals, unknowns, point, binding,
                                 guesses=guesses)
            return dict(zip(unknowns, vals))
        except (NoConvergence, DomainFault):
            continue
    return None


def check_overdetermined(assignments, js: JetSpace, seed: int = 0,
                         constraints=(), binding: ParameterBinding | None = None,
                         box=None, n: int = 32, tol_abs: float = 1e-9,
                         tol_rel: float = 1e-9) -> CheckReport:
    """Compatibility of an overdetermined pair of first-order relations
    for one dependent variable.

    The second-derivative jets are eliminated symbolically from the
    differentiated relations; the leftover rows of that elimination are
    the compatibility conditions, which are then tested numerically on
    the solution manifold (base point sampled, first derivatives solved
    from the relations at each point)."""
    assignments = tuple(assignments)
    deps = {lhs.dep for lhs, _ in assignments}
    if len(deps) != 1:
        raise ValueError("assignments must concern a single dependent variable")
    dep = deps.pop()
    args = js.dependents[dep]

    unknowns = sorted({lhs.lift(x) for lhs, _ in assignments for x in args},
                      key=lambda j: j.index)
    eqs = []
    for lhs, rhs in assignments:
        for x in args:
            eqs.append(lhs.lift(x) - total_derivative(rhs, x, js))
    solution, leftovers, _ = gaussian_eliminate(eqs, unknowns)
    leftovers = [simplify(lo) for lo in leftovers]
    leftovers = [lo for lo in leftovers if lo != ZERO]
    if not leftovers:
        return aggregate_report([("compatibility", ZeroResult("zero", "symbolic"))],
                                seed, kind="overdetermined", case=dep,
                                tol_abs=tol_abs, tol_rel=tol_rel)

    binding = binding or ParameterBinding()
    first_jets = set(j for j, _ in assignments)
    results = []
    for i, lo in enumerate(leftovers):
        rng = random.Random(_check_seed(seed, i))
        free = [s for s in sorted(atoms(lo), key=_sym_name)
                if not (isinstance(s, Jet) and s in first_jets)
                and not (isinstance(s, Param) and s.name in binding.params)]
        for _, rhs in assignments:
            for s in sorted(atoms(rhs), key=_sym_name):
                if isinstance(s, Jet) and s in first_jets:
                    continue
                if isinstance(s, Param) and s.name in binding.params:
                    continue
                if s not in free:
                    free.append(s)
        tested = 0
        budget = 256
        verdict = None
        witness = None
        witness_value = 0.0
        box = box or {}
        while tested < n and budget > 0:
            point = {}
            for s in free:
                lo_hi = box.get(_sym_name(s), (0.2, 2.0))
                point[s] = rng.uniform(*lo_hi)
            budget -= 1
            try:
                if not all(c.holds(point, binding) for c in constraints):
                    continue
            except DomainFault:
                continue
            derivs = _solve_first_derivatives(assignments, point, binding, rng)
            if derivs is None:
                continue
            point.update(derivs)
            try:
                val, scale = eval_with_scale(lo, point, binding)
            except DomainFault:
                continue
            tested += 1
            if abs(val) > tol_abs + tol_rel * scale:
                verdict = "nonzero"
                witness = {_sym_name(k): v for k, v in point.items()}
                witness_value = val
                break
        if verdict is None:
            verdict = "zero" if tested >= n else "inconclusive"
        results.append((f"compatibility condition {i}",
                        ZeroResult(verdict, "probabilistic", witness=witness,
                                   witness_value=witness_value,
                                   points_tested=tested, residual=lo)))
    return aggregate_report(results, seed, kind="overdetermined", case=dep,
                            tol_abs=tol_abs, tol_rel=tol_rel)
