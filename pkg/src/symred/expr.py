"""Immutable symbolic expression kernel.

Every expression is normalized on construction: sums and products are
flattened and sorted under a fixed total order, numeric constants are
folded exactly (Fraction arithmetic), like terms are collected, and
same-base powers in a product are merged.  No domain-unsafe rewriting
happens by default: ``exp(ln(x))`` stays as written, ``ln(a*b)`` is never
split.  Opt-in rewrites live in :mod:`symred.rewrites`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping


class ExprError(Exception):
    pass


class UnboundSymbol(ExprError):
    pass


class DomainFault(ExprError):
    """Numeric evaluation left the real domain (ln of non-positive,
    sqrt of negative, division by zero, or a NaN/Inf intermediate)."""


class IterationCapExceeded(ExprError):
    pass


BUILTIN_FUNCTIONS = ("sin", "cos", "tan", "arctan", "exp", "ln", "abs")

_KIND_NUM = 0
_KIND_VAR = 1
_KIND_PARAM = 2
_KIND_JET = 3
_KIND_FUNC = 4
_KIND_OPAQUE = 5
_KIND_POW = 6
_KIND_MUL = 7
_KIND_ADD = 8


class Expr:
    """Base class; all nodes are immutable and hashable."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return add(self, mul(NUM_MINUS_ONE, _coerce(other)))

    def __rsub__(self, other):
        return add(_coerce(other), mul(NUM_MINUS_ONE, self))

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return mul(self, pow_(_coerce(other), NUM_MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(_coerce(other), pow_(self, NUM_MINUS_ONE))

    def __pow__(self, other):
        return pow_(self, _coerce(other))

    def __neg__(self):
        return mul(NUM_MINUS_ONE, self)

    def __repr__(self):  # debug aid; the parser module owns pretty printing
        from . import parser

        return parser.print_expression(self)


@dataclass(frozen=True, repr=False)
class Num(Expr):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True, repr=False)
class Var(Expr):
    """Independent variable (also used for invariant variables)."""

    name: str


@dataclass(frozen=True, repr=False)
class Param(Expr):
    name: str


@dataclass(frozen=True, repr=False)
class Jet(Expr):
    """Jet coordinate: dependent variable with a derivative multi-index.

    ``index`` is a sorted tuple of (variable name, count>0) pairs; the
    empty tuple denotes the dependent variable itself.  Mixed partials
    are identified automatically by this representation.
    """

    dep: str
    index: tuple = ()

    def __post_init__(self):
        idx = tuple(sorted((v, int(c)) for v, c in self.index if c))
        if any(c < 0 for _, c in idx):
            raise ValueError("negative derivative count")
        object.__setattr__(self, "index", idx)

    @property
    def order(self) -> int:
        return sum(c for _, c in self.index)

    def lift(self, var: str, by: int = 1) -> "Jet":
        d = dict(self.index)
        d[var] = d.get(var, 0) + by
        return Jet(self.dep, tuple(d.items()))


@dataclass(frozen=True, repr=False)
class Add(Expr):
    terms: tuple


@dataclass(frozen=True, repr=False)
class Mul(Expr):
    factors: tuple


@dataclass(frozen=True, repr=False)
class Pow(Expr):
    base: Expr
    exp: Expr


@dataclass(frozen=True, repr=False)
class Func(Expr):
    """Builtin unary function application (sqrt normalizes to Pow ^1/2)."""

    name: str
    arg: Expr


@dataclass(frozen=True, repr=False)
class Opaque(Expr):
    """Opaque function symbol applied to one argument.

    ``order`` counts formal derivatives: F is order 0, F' order 1, ...
    """

    name: str
    arg: Expr
    order: int = 0


ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))
NUM_MINUS_ONE = Num(Fraction(-1))
HALF = Num(Fraction(1, 2))


def _coerce(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction)):
        return Num(Fraction(v))
    raise TypeError(f"cannot coerce {v!r} to Expr")


def integer(n) -> Num:
    return Num(Fraction(n))


def rational(p, q) -> Num:
    return Num(Fraction(p, q))


# ---------------------------------------------------------------------------
# total order on nodes

def sort_key(e: Expr):
    if isinstance(e, Num):
        return (_KIND_NUM, e.value)
    if isinstance(e, Var):
        return (_KIND_VAR, e.name)
    if isinstance(e, Param):
        return (_KIND_PARAM, e.name)
    if isinstance(e, Jet):
        return (_KIND_JET, e.dep, e.index)
    if isinstance(e, Func):
        return (_KIND_FUNC, e.name, sort_key(e.arg))
    if isinstance(e, Opaque):
        return (_KIND_OPAQUE, e.name, e.order, sort_key(e.arg))
    if isinstance(e, Pow):
        return (_KIND_POW, sort_key(e.base), sort_key(e.exp))
    if isinstance(e, Mul):
        return (_KIND_MUL, tuple(sort_key(f) for f in e.factors))
    if isinstance(e, Add):
        return (_KIND_ADD, tuple(sort_key(t) for t in e.terms))
    raise TypeError(type(e))


# ---------------------------------------------------------------------------
# normalizing constructors

def _split_coeff(term: Expr):
    """term -> (rational coefficient, non-numeric rest or None)."""
    if isinstance(term, Num):
        return term.value, None
    if isinstance(term, Mul) and isinstance(term.factors[0], Num):
        rest = term.factors[1:]
        rest_e = rest[0] if len(rest) == 1 else Mul(rest)
        return term.factors[0].value, rest_e
    return Fraction(1), term


def add(*terms) -> Expr:
    flat = []
    for t in terms:
        t = _coerce(t)
        if isinstance(t, Add):
            flat.extend(t.terms)
        else:
            flat.append(t)
    const = Fraction(0)
    by_rest: dict = {}
    order: list = []
    for t in flat:
        c, rest = _split_coeff(t)
        if rest is None:
            const += c
        else:
            if rest not in by_rest:
                by_rest[rest] = Fraction(0)
                order.append(rest)
            by_rest[rest] += c
    out = []
    for rest in order:
        c = by_rest[rest]
        if c == 0:
            continue
        out.append(rest if c == 1 else mul(Num(c), rest))
    out.sort(key=sort_key)
    if const != 0:
        out.insert(0, Num(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return Add(tuple(out))


def _split_power(f: Expr):
    if isinstance(f, Pow):
        return f.base, f.exp
    return f, ONE


def mul(*factors) -> Expr:
    flat = []
    for f in factors:
        f = _coerce(f)
        if isinstance(f, Mul):
            flat.extend(f.factors)
        else:
            flat.append(f)
    coeff = Fraction(1)
    by_base: dict = {}
    order: list = []
    for f in flat:
        if isinstance(f, Num):
            coeff *= f.value
            continue
        base, exp = _split_power(f)
        if base not in by_base:
            by_base[base] = []
            order.append(base)
        by_base[base].append(exp)
    if coeff == 0:
        return ZERO
    out = []
    redo = False
    for base in order:
        p = pow_(base, add(*by_base[base]))
        if isinstance(p, Num):
            coeff *= p.value
        elif isinstance(p, Mul):
            # pow_ distributed an integer exponent over a product; the new
            # factors may merge with other bases, so renormalize once more
            redo = True
            out.append(p)
        else:
            out.append(p)
    if coeff == 0:
        return ZERO
    if redo:
        return mul(Num(coeff), *out)
    out.sort(key=sort_key)
    if coeff != 1:
        out.insert(0, Num(coeff))
    if not out:
        return ONE
    if len(out) == 1:
        return out[0]
    return Mul(tuple(out))


def pow_(base, exp) -> Expr:
    base = _coerce(base)
    exp = _coerce(exp)
    if isinstance(exp, Num):
        if exp.value == 0:
            return ONE
        if exp.value == 1:
            return base
        if isinstance(base, Num):
            if exp.value.denominator == 1:
                n = int(exp.value)
                if base.value == 0 and n < 0:
                    return Pow(base, exp)  # kept symbolic; eval faults
                return Num(base.value ** n)
            if base.value == 1:
                return ONE
            if base.value == 0 and exp.value > 0:
                return ZERO
        if exp.value.denominator == 1:
            # integer exponents distribute safely over products and
            # compose with inner powers
            if isinstance(base, Mul):
                return mul(*(pow_(f, exp) for f in base.factors))
            if isinstance(base, Pow):
                return pow_(base.base, mul(base.exp, exp))
    if isinstance(base, Num) and base.value == 1:
        return ONE
    return Pow(base, exp)


_ODD_FUNCTIONS = ("sin", "tan", "arctan")


def _extract_negation(e: Expr):
    """Canonical sign of an argument: negative numbers, products with a
    negative coefficient, and sums whose leading term is negative."""
    if isinstance(e, Num):
        return e.value < 0, Num(-e.value)
    if isinstance(e, Mul) and isinstance(e.factors[0], Num) and e.factors[0].value < 0:
        return True, mul(NUM_MINUS_ONE, e)
    if isinstance(e, Add):
        neg, _ = _extract_negation(e.terms[0])
        if neg:
            # negate term-by-term so the result is again a plain sum;
            # wrapping in Mul(-1, ...) would re-trigger extraction
            return True, add(*(mul(NUM_MINUS_ONE, t) for t in e.terms))
    return False, e


def func(name: str, arg) -> Expr:
    arg = _coerce(arg)
    if name == "sqrt":
        return pow_(arg, HALF)
    if name not in BUILTIN_FUNCTIONS:
        raise ValueError(f"unknown builtin function {name!r}")
    if name in _ODD_FUNCTIONS or name in ("cos", "abs"):
        neg, pos = _extract_negation(arg)
        if neg:
            if name in _ODD_FUNCTIONS:
                return mul(NUM_MINUS_ONE, Func(name, pos))
            return Func(name, pos)
    return Func(name, arg)


def opaque(name: str, arg, order: int = 0) -> Expr:
    return Opaque(name, _coerce(arg), order)


# ---------------------------------------------------------------------------
# traversal helpers

def children(e: Expr) -> tuple:
    if isinstance(e, Add):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, Pow):
        return (e.base, e.exp)
    if isinstance(e, (Func, Opaque)):
        return (e.arg,)
    return ()


def rebuild(e: Expr, kids: Iterable[Expr]) -> Expr:
    kids = tuple(kids)
    if isinstance(e, Add):
        return add(*kids)
    if isinstance(e, Mul):
        return mul(*kids)
    if isinstance(e, Pow):
        return pow_(*kids)
    if isinstance(e, Func):
        return func(e.name, kids[0])
    if isinstance(e, Opaque):
        return Opaque(e.name, kids[0], e.order)
    return e


def atoms(e: Expr, kind=None) -> set:
    """All Var/Param/Jet leaves (optionally filtered by class)."""
    out = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, (Var, Param, Jet)):
            if kind is None or isinstance(n, kind):
                out.add(n)
        else:
            stack.extend(children(n))
    return out


def opaque_names(e: Expr) -> set:
    out = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Opaque):
            out.add(n.name)
        stack.extend(children(n))
    return out


def subexpressions(e: Expr):
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(children(n))


def contains(e: Expr, sub: Expr) -> bool:
    return any(n == sub for n in subexpressions(e))


# ---------------------------------------------------------------------------
# core operations

def simplify(e: Expr) -> Expr:
    """Rebuild bottom-up through the normalizing constructors.

    Construction already normalizes, so this is idempotent by design;
    it exists as the explicit entry point for externally built trees.
    """
    kids = children(e)
    if not kids:
        return e
    return rebuild(e, (simplify(k) for k in kids))


def expand(e: Expr) -> Expr:
    """Distribute products over sums and expand positive integer powers
    of sums.  Used by the reduction spliter; not part of normalization."""
    kids = children(e)
    if kids:
        e = rebuild(e, (expand(k) for k in kids))
    if isinstance(e, Pow) and isinstance(e.exp, Num) and \
            e.exp.value.denominator == 1 and e.exp.value > 1 and \
            isinstance(e.base, Add):
        n = int(e.exp.value)
        out = ONE
        for _ in range(n):
            out = expand(mul(out, e.base))
        return out
    if isinstance(e, Mul):
        sums = [f for f in e.factors if isinstance(f, Add)]
        if sums:
            first = sums[0]
            rest = list(e.factors)
            rest.remove(first)
            return expand(add(*(mul(t, *rest) for t in first.terms)))
    return e


_DIFF_TABLE: dict = {}


def _fill_diff_table():
    _DIFF_TABLE["sin"] = lambda a: func("cos", a)
    _DIFF_TABLE["cos"] = lambda a: mul(NUM_MINUS_ONE, func("sin", a))
    _DIFF_TABLE["tan"] = lambda a: add(ONE, pow_(func("tan", a), 2))
    _DIFF_TABLE["arctan"] = lambda a: pow_(add(ONE, pow_(a, 2)), NUM_MINUS_ONE)
    _DIFF_TABLE["exp"] = lambda a: Func("exp", a)
    _DIFF_TABLE["ln"] = lambda a: pow_(a, NUM_MINUS_ONE)
    _DIFF_TABLE["abs"] = lambda a: mul(a, pow_(func("abs", a), NUM_MINUS_ONE))


_fill_diff_table()


def diff_partial(e: Expr, v: Expr) -> Expr:
    """Exact partial derivative treating every jet coordinate as an
    independent symbol.  ``v`` must be a Var, Param, or Jet."""
    if not isinstance(v, (Var, Param, Jet)):
        raise TypeError("differentiation variable must be Var, Param or Jet")
    return _diff(e, v)


def _diff(e: Expr, v: Expr) -> Expr:
    if e == v:
        return ONE
    if isinstance(e, (Num, Var, Param, Jet)):
        return ZERO
    if isinstance(e, Add):
        return add(*(_diff(t, v) for t in e.terms))
    if isinstance(e, Mul):
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = _diff(f, v)
            if df is ZERO or df == ZERO:
                continue
            parts.append(mul(df, *(g for j, g in enumerate(fs) if j != i)))
        return add(*parts) if parts else ZERO
    if isinstance(e, Pow):
        db = _diff(e.base, v)
        de = _diff(e.exp, v)
        parts = []
        if db != ZERO:
            parts.append(mul(e.exp, pow_(e.base, add(e.exp, NUM_MINUS_ONE)), db))
        if de != ZERO:
            parts.append(mul(pow_(e.base, e.exp), func("ln", e.base), de))
        return add(*parts) if parts else ZERO
    if isinstance(e, Func):
        da = _diff(e.arg, v)
        if da == ZERO:
            return ZERO
        return mul(_DIFF_TABLE[e.name](e.arg), da)
    if isinstance(e, Opaque):
        da = _diff(e.arg, v)
        if da == ZERO:
            return ZERO
        return mul(Opaque(e.name, e.arg, e.order + 1), da)
    raise TypeError(type(e))


def substitute(e: Expr, rules: Mapping[Expr, Expr], fixed_point: bool = False,
               cap: int = 32) -> Expr:
    """Simultaneous substitution followed by normalization.

    Rules are keyed by whole subexpressions (usually atoms); a rule's
    replacement is not rescanned within the same pass.  Fixed-point
    mode re-applies passes until stable or ``cap`` is hit.
    """
    if not rules:
        return simplify(e)
    if not fixed_point:
        return _subst_once(e, rules)
    cur = e
    for _ in range(cap):
        nxt = _subst_once(cur, rules)
        if nxt == cur:
            return cur
        cur = nxt
    raise IterationCapExceeded("substitution did not reach a fixed point")


def _subst_once(e: Expr, rules: Mapping[Expr, Expr]) -> Expr:
    hit = rules.get(e)
    if hit is not None:
        return hit
    kids = children(e)
    if not kids:
        return e
    return rebuild(e, (_subst_once(k, rules) for k in kids))


# ---------------------------------------------------------------------------
# numeric evaluation

class OpaqueInstance:
    """Concrete evaluable stand-in for an opaque function symbol.

    Holds callables per derivative order.  Missing orders raise
    UnboundSymbol at evaluation time.
    """

    def __init__(self, *derivs: Callable[[float], float]):
        self.derivs = list(derivs)

    def __call__(self, order: int, x: float) -> float:
        if order >= len(self.derivs) or self.derivs[order] is None:
            raise UnboundSymbol(f"opaque function derivative order {order} unbound")
        return self.derivs[order](x)

    @classmethod
    def constant(cls, c: float, depth: int = 6) -> "OpaqueInstance":
        fns = [lambda x, c=c: c] + [(lambda x: 0.0) for _ in range(depth)]
        return cls(*fns)

    @classmethod
    def from_polynomial(cls, coeffs, depth: int = 6) -> "OpaqueInstance":
        """Polynomial sum c_i x^i with exact derivative chain."""
        fns = []
        cur = list(coeffs)
        for _ in range(depth + 1):
            fns.append(lambda x, cs=tuple(cur): sum(c * x ** i for i, c in enumerate(cs)))
            cur = [i * c for i, c in enumerate(cur)][1:] or [0.0]
        return cls(*fns)

    @classmethod
    def sin(cls) -> "OpaqueInstance":
        return cls(math.sin, math.cos,
                   lambda x: -math.sin(x), lambda x: -math.cos(x),
                   math.sin, math.cos)


class ParameterBinding:
    """Numeric values for parameters plus concrete instances for opaque
    function symbols."""

    def __init__(self, params: Mapping[str, float] | None = None,
                 functions: Mapping[str, OpaqueInstance] | None = None):
        self.params = dict(params or {})
        self.functions = dict(functions or {})

    def extended(self, params=None, functions=None) -> "ParameterBinding":
        p = dict(self.params)
        p.update(params or {})
        f = dict(self.functions)
        f.update(functions or {})
        return ParameterBinding(p, f)


_MATH_TABLE = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "arctan": math.atan,
    "exp": math.exp,
    "abs": abs,
}


def eval_numeric(e: Expr, point: Mapping[Expr, float] | None = None,
                 binding: ParameterBinding | None = None) -> float:
    """IEEE double evaluation.  NaN/Inf and out-of-domain arguments raise
    DomainFault; unknown symbols raise UnboundSymbol."""
    val, _ = eval_with_scale(e, point, binding)
    return val


def eval_with_scale(e: Expr, point: Mapping[Expr, float] | None = None,
                    binding: ParameterBinding | None = None):
    """Evaluate and also report the largest |subterm| encountered, used
    for relative tolerance in the zero test."""
    point = point or {}
    binding = binding or ParameterBinding()
    scale = [0.0]
    val = _eval(e, point, binding, scale)
    return val, scale[0]


def _note(scale, v: float) -> float:
    if not math.isfinite(v):
        raise DomainFault("non-finite intermediate value")
    a = abs(v)
    if a > scale[0]:
        scale[0] = a
    return v


def _eval(e: Expr, point, binding, scale) -> float:
    if isinstance(e, Num):
        return _note(scale, float(e.value))
    if isinstance(e, (Var, Jet)):
        if e in point:
            return _note(scale, float(point[e]))
        raise UnboundSymbol(f"unbound symbol {e!r}")
    if isinstance(e, Param):
        if e in point:
            return _note(scale, float(point[e]))
        if e.name in binding.params:
            return _note(scale, float(binding.params[e.name]))
        raise UnboundSymbol(f"unbound parameter {e.name}")
    if isinstance(e, Add):
        return _note(scale, sum(_eval(t, point, binding, scale) for t in e.terms))
    if isinstance(e, Mul):
        out = 1.0
        for f in e.factors:
            out *= _eval(f, point, binding, scale)
        return _note(scale, out)
    if isinstance(e, Pow):
        b = _eval(e.base, point, binding, scale)
        x = _eval(e.exp, point, binding, scale)
        if b == 0.0 and x < 0:
            raise DomainFault("division by zero")
        if b < 0.0:
            if isinstance(e.exp, Num) and e.exp.value.denominator == 1:
                return _note(scale, b ** int(e.exp.value))
            raise DomainFault("negative base under fractional power")
        try:
            return _note(scale, b ** x)
        except OverflowError as exc:
            raise DomainFault("overflow in power") from exc
    if isinstance(e, Func):
        a = _eval(e.arg, point, binding, scale)
        if e.name == "ln":
            if a <= 0.0:
                raise DomainFault("ln of non-positive value")
            return _note(scale, math.log(a))
        try:
            return _note(scale, _MATH_TABLE[e.name](a))
        except (ValueError, OverflowError) as exc:
            raise DomainFault(str(exc)) from exc
    if isinstance(e, Opaque):
        a = _eval(e.arg, point, binding, scale)
        inst = binding.functions.get(e.name)
        if inst is None:
            raise UnboundSymbol(f"opaque function {e.name!r} unbound")
        try:
            return _note(scale, float(inst(e.order, a)))
        except (ValueError, OverflowError) as exc:
            raise DomainFault(str(exc)) from exc
    raise TypeError(type(e))
