"""Immutable expression nodes and the canonicalizing constructors.

Node classes store their children verbatim, so the parser can build raw
trees.  The lowercase constructors (``add``, ``mul``, ``power``, ``func``)
assume canonical children and return a canonical result; ``simplify``
rebuilds an arbitrary tree through them.
"""

from __future__ import annotations

from fractions import Fraction
import math
from numbers import Number

FUNCTIONS = (
    "sin", "cos", "tan", "cot", "sinh", "cosh", "tanh", "coth",
    "exp", "ln", "arctan", "sqrt", "lambertW",
)


class Expr:
    __slots__ = ("_hash", "_key", "_free")
    kind = "Expr"

    def _init(self, args):
        self._hash = hash((self.kind, args))
        self._key = None
        self._free = None

    # structural identity -------------------------------------------------
    def _args(self):
        raise NotImplementedError

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr) or other.kind != self.kind or other._hash != self._hash:
            return False
        return self._args() == other._args()

    def __ne__(self, other):
        return not self.__eq__(other)

    @property
    def sort_key(self):
        if self._key is None:
            self._key = self._make_key()
        return self._key

    @property
    def free_symbols(self) -> frozenset:
        if self._free is None:
            out = frozenset()
            for c in self.children():
                out = out | c.free_symbols
            self._free = out
        return self._free

    def children(self) -> tuple:
        return ()

    # arithmetic sugar, always canonical ----------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), MINUS_ONE))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, MINUS_ONE))

    def __pow__(self, other):
        return power(self, as_expr(other))

    def __rpow__(self, other):
        return power(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __str__(self):
        from .printing import to_text
        return to_text(self)

    def __repr__(self):
        return f"parse({str(self)!r})"


class Const(Expr):
    """Exact rational constant."""

    __slots__ = ("value",)
    kind = "Const"

    def __init__(self, value):
        self.value = Fraction(value)
        self._init((self.value,))

    def _args(self):
        return (self.value,)

    def _make_key(self):
        return (0, self.value)

    @property
    def free_symbols(self):
        return frozenset()


class Float(Expr):
    __slots__ = ("value",)
    kind = "Float"

    def __init__(self, value):
        self.value = float(value)
        self._init((self.value,))

    def _args(self):
        return (self.value,)

    def _make_key(self):
        return (1, self.value)

    @property
    def free_symbols(self):
        return frozenset()


class Symbol(Expr):
    __slots__ = ("name",)
    kind = "Symbol"

    def __init__(self, name: str):
        self.name = name
        self._init((name,))

    def _args(self):
        return (self.name,)

    def _make_key(self):
        return (2, self.name)

    @property
    def free_symbols(self):
        return frozenset((self.name,))


class Add(Expr):
    __slots__ = ("terms",)
    kind = "Add"

    def __init__(self, terms):
        self.terms = tuple(terms)
        self._init(self.terms)

    def _args(self):
        return self.terms

    def children(self):
        return self.terms

    def _make_key(self):
        return (6, tuple(t.sort_key for t in self.terms))


class Mul(Expr):
    __slots__ = ("factors",)
    kind = "Mul"

    def __init__(self, factors):
        self.factors = tuple(factors)
        self._init(self.factors)

    def _args(self):
        return self.factors

    def children(self):
        return self.factors

    def _make_key(self):
        return (5, tuple(f.sort_key for f in self.factors))


class Pow(Expr):
    __slots__ = ("base", "exp")
    kind = "Pow"

    def __init__(self, base, exp):
        self.base = base
        self.exp = exp
        self._init((base, exp))

    def _args(self):
        return (self.base, self.exp)

    def children(self):
        return (self.base, self.exp)

    def _make_key(self):
        return (3, self.base.sort_key, self.exp.sort_key)


class Func(Expr):
    __slots__ = ("name", "arg")
    kind = "Func"

    def __init__(self, name: str, arg):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg
        self._init((name, arg))

    def _args(self):
        return (self.name, self.arg)

    def children(self):
        return (self.arg,)

    def _make_key(self):
        return (4, self.name, self.arg.sort_key)


ZERO = Const(0)
ONE = Const(1)
MINUS_ONE = Const(-1)
HALF = Const(Fraction(1, 2))


def is_number(e) -> bool:
    return isinstance(e, (Const, Float))


def number(v) -> Expr:
    if isinstance(v, float):
        return Float(v)
    return Const(v)


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, str):
        return Symbol(v)
    if isinstance(v, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(v, (int, Fraction)):
        return Const(v)
    if isinstance(v, Number):
        return Float(float(v))
    raise TypeError(f"cannot convert {type(v).__name__} to Expr")


def symbols(names: str):
    return tuple(Symbol(n) for n in names.split())


def _is_int(v) -> bool:
    if isinstance(v, Fraction):
        return v.denominator == 1
    return float(v).is_integer()


# canonical constructors --------------------------------------------------

def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def _split_coeff(term):
    if isinstance(term, Mul) and is_number(term.factors[0]):
        rest = term.factors[1:]
        return term.factors[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return 1, term


def _scaled(c, rest):
    if c == 1 and not isinstance(c, float):
        return rest
    if isinstance(rest, Mul):
        return Mul((number(c),) + rest.factors)
    return Mul((number(c), rest))


def _factors_of(e):
    return e.factors if isinstance(e, Mul) else (e,)


_PYTHAGOREAN = {"sin": ("cos", 1), "sinh": ("cosh", -1)}


def _trig_pass(coeffs):
    """Apply sin^2+cos^2=1 and sinh^2-cosh^2=-1 once, returning leftover terms."""
    for rest in list(coeffs):
        c = coeffs.get(rest)
        if c is None:
            continue
        fs = _factors_of(rest)
        for i, f in enumerate(fs):
            if not (isinstance(f, Pow) and isinstance(f.base, Func) and f.base.name in _PYTHAGOREAN
                    and isinstance(f.exp, Const) and f.exp.value == 2):
                continue
            partner_name, sign = _PYTHAGOREAN[f.base.name]
            partner_factor = Pow(Func(partner_name, f.base.arg), f.exp)
            others = fs[:i] + fs[i + 1:]
            partner = mul(partner_factor, *others)
            pc, prest = _split_coeff(partner)
            if prest in coeffs and coeffs[prest] * pc == sign * c:
                del coeffs[rest]
                del coeffs[prest]
                return mul(number(c * sign), *others)
    return None


def add(*args) -> Expr:
    const = Fraction(0)
    coeffs: dict = {}
    stack = list(reversed(args))
    while stack:
        a = stack.pop()
        if isinstance(a, Add):
            stack.extend(reversed(a.terms))
        elif is_number(a):
            const = const + a.value
        else:
            c, rest = _split_coeff(a)
            coeffs[rest] = coeffs.get(rest, 0) + c
    for rest in [r for r, c in coeffs.items() if c == 0]:
        del coeffs[rest]
    while True:
        left = _trig_pass(coeffs)
        if left is None:
            break
        if is_number(left):
            const = const + left.value
        else:
            c, rest = _split_coeff(left)
            coeffs[rest] = coeffs.get(rest, 0) + c
            if coeffs[rest] == 0:
                del coeffs[rest]
    terms = sorted((_scaled(c, r) for r, c in coeffs.items()), key=lambda t: t.sort_key)
    if const != 0 or isinstance(const, float):
        if not terms:
            return number(const)
        if const != 0:
            terms.insert(0, number(const))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(terms)


def mul(*args) -> Expr:
    coeff = Fraction(1)
    powers: dict = {}
    exp_args = []
    stack = list(reversed(args))
    while stack:
        f = stack.pop()
        if isinstance(f, Mul):
            stack.extend(reversed(f.factors))
        elif is_number(f):
            coeff = coeff * f.value
        elif isinstance(f, Func) and f.name == "exp":
            exp_args.append(f.arg)
        else:
            base, e = (f.base, f.exp) if isinstance(f, Pow) else (f, ONE)
            powers.setdefault(base, []).append(e)
    if coeff == 0:
        return ZERO
    factors = []

    def absorb(p):
        nonlocal coeff
        for q in _factors_of(p):
            if is_number(q):
                coeff = coeff * q.value
            else:
                factors.append(q)

    for base, exps in powers.items():
        if len(exps) == 1:
            e = exps[0]
            absorb(base if e == ONE else Pow(base, e))
        else:
            absorb(power(base, add(*exps)))
    if exp_args:
        absorb(func("exp", add(*exp_args)))
    if coeff == 0:
        return ZERO
    factors.sort(key=lambda f: f.sort_key)
    if not factors:
        return number(coeff)
    if coeff == 1 and not isinstance(coeff, float):
        return factors[0] if len(factors) == 1 else Mul(factors)
    return Mul([number(coeff)] + factors)


def _int_root(n: int, q: int):
    if n < 0:
        return None
    r = round(n ** (1.0 / q)) if n else 0
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand ** q == n:
            return cand
    return None


def _number_power(b, e):
    bv, ev = b.value, e.value
    if isinstance(bv, float) or isinstance(ev, float):
        try:
            if bv < 0 and not float(ev).is_integer():
                return Pow(b, e)
            return Float(float(bv) ** float(ev))
        except (ZeroDivisionError, OverflowError):
            return Pow(b, e)
    if ev.denominator == 1:
        if bv == 0 and ev < 0:
            return Pow(b, e)
        return Const(bv ** ev.numerator)
    if bv > 0:
        q = ev.denominator
        rn, rd = _int_root(bv.numerator, q), _int_root(bv.denominator, q)
        if rn is not None and rd is not None:
            return Const(Fraction(rn, rd) ** ev.numerator)
    return Pow(b, e)


def power(b: Expr, e: Expr) -> Expr:
    if is_number(e):
        ev = e.value
        if ev == 0:
            return ONE
        if ev == 1:
            return b
        if is_number(b):
            return _number_power(b, e)
        if _is_int(ev):
            if isinstance(b, Pow):
                return power(b.base, mul(b.exp, e))
            if isinstance(b, Mul):
                return mul(*[power(f, e) for f in b.factors])
        if isinstance(b, Func) and b.name == "exp":
            return func("exp", mul(e, b.arg))
    if is_number(b):
        if b.value == 1:
            return ONE
        if b.value == 0 and is_number(e) and e.value > 0:
            return ZERO
    return Pow(b, e)


_ZERO_VALUES = {
    "sin": ZERO, "cos": ONE, "tan": ZERO, "sinh": ZERO, "cosh": ONE, "tanh": ZERO,
    "exp": ONE, "arctan": ZERO, "lambertW": ZERO,
}

_FLOAT_FUNCS = {
    "sin": math.sin, "cos": math.cos, "tan": math.tan, "cot": lambda v: 1.0 / math.tan(v),
    "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh, "coth": lambda v: 1.0 / math.tanh(v),
    "exp": math.exp, "ln": math.log, "arctan": math.atan, "sqrt": math.sqrt,
}


def _ln_power_term(t):
    """Return (base, c) when ``t`` is c*ln(base) with numeric c."""
    if isinstance(t, Func) and t.name == "ln":
        return t.arg, ONE
    if (isinstance(t, Mul) and len(t.factors) == 2 and is_number(t.factors[0])
            and isinstance(t.factors[1], Func) and t.factors[1].name == "ln"):
        return t.factors[1].arg, t.factors[0]
    return None


def func(name: str, a: Expr) -> Expr:
    if name == "sqrt":
        return power(a, HALF)
    if isinstance(a, Float) and name in _FLOAT_FUNCS:
        try:
            return Float(_FLOAT_FUNCS[name](a.value))
        except (ValueError, ZeroDivisionError, OverflowError):
            return Func(name, a)
    if a == ZERO and name in _ZERO_VALUES:
        return _ZERO_VALUES[name]
    if name == "exp":
        if isinstance(a, Func) and a.name == "ln":
            return a.arg
        # exp(s + c*ln(b)) -> b^c * exp(s)
        terms = a.terms if isinstance(a, Add) else (a,)
        logs = [_ln_power_term(t) for t in terms]
        if any(logs):
            rest = add(*[t for t, lg in zip(terms, logs) if lg is None])
            pieces = [power(lg[0], lg[1]) for lg in logs if lg]
            return mul(func("exp", rest), *pieces)
    if name == "ln":
        if a == ONE:
            return ZERO
        if isinstance(a, Func) and a.name == "exp":
            return a.arg
    return Func(name, a)


def simplify(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up through the canonical constructors.

    The result is a canonical form: simplifying it again returns an equal
    tree.
    """
    memo: dict = {}

    def go(n):
        hit = memo.get(n)
        if hit is not None:
            return hit
        if isinstance(n, (Const, Float, Symbol)):
            out = n
        elif isinstance(n, Add):
            out = add(*[go(t) for t in n.terms])
        elif isinstance(n, Mul):
            out = mul(*[go(f) for f in n.factors])
        elif isinstance(n, Pow):
            out = power(go(n.base), go(n.exp))
        elif isinstance(n, Func):
            out = func(n.name, go(n.arg))
        else:
            raise TypeError(f"not an expression: {n!r}")
        memo[n] = out
        return out

    out = go(e)
    # a second pass settles the rare cases where a rewrite exposes a new one
    if out != e:
        for _ in range(4):
            memo.clear()
            again = go(out)
            if again == out:
                break
            out = again
    return out


def free_symbols(e: Expr) -> frozenset:
    return e.free_symbols
