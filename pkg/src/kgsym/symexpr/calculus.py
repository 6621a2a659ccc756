"""Symbolic differentiation and substitution."""

from __future__ import annotations

from functools import lru_cache

from .core import (
    Add, Const, Expr, Func, Mul, ONE, Pow, Symbol, ZERO, MINUS_ONE,
    add, as_expr, func, mul, power, simplify,
)


def _outer_derivative(name: str, a: Expr) -> Expr:
    f = lambda n: func(n, a)  # noqa: E731
    if name == "sin":
        return f("cos")
    if name == "cos":
        return mul(MINUS_ONE, f("sin"))
    if name == "tan":
        return add(ONE, power(f("tan"), Const(2)))
    if name == "cot":
        return mul(MINUS_ONE, add(ONE, power(f("cot"), Const(2))))
    if name == "sinh":
        return f("cosh")
    if name == "cosh":
        return f("sinh")
    if name == "tanh":
        return add(ONE, mul(MINUS_ONE, power(f("tanh"), Const(2))))
    if name == "coth":
        return add(ONE, mul(MINUS_ONE, power(f("coth"), Const(2))))
    if name == "exp":
        return f("exp")
    if name == "ln":
        return power(a, MINUS_ONE)
    if name == "arctan":
        return power(add(ONE, power(a, Const(2))), MINUS_ONE)
    if name == "sqrt":
        return mul(Const(1) / 2, power(a, Const(-1) / 2))
    if name == "lambertW":
        w = f("lambertW")
        return mul(w, power(a, MINUS_ONE), power(add(ONE, w), MINUS_ONE))
    raise ValueError(f"no derivative rule for {name}")


@lru_cache(maxsize=200_000)
def _d(e: Expr, s: str) -> Expr:
    if s not in e.free_symbols:
        return ZERO
    if isinstance(e, Symbol):
        return ONE
    if isinstance(e, Add):
        return add(*[_d(t, s) for t in e.terms])
    if isinstance(e, Mul):
        fs = e.factors
        terms = []
        for i, f in enumerate(fs):
            df = _d(f, s)
            if df != ZERO:
                terms.append(mul(*fs[:i], df, *fs[i + 1:]))
        return add(*terms)
    if isinstance(e, Pow):
        b, x = e.base, e.exp
        if s not in x.free_symbols:
            return mul(x, power(b, add(x, MINUS_ONE)), _d(b, s))
        return mul(e, add(mul(_d(x, s), func("ln", b)), mul(x, _d(b, s), power(b, MINUS_ONE))))
    if isinstance(e, Func):
        return mul(_outer_derivative(e.name, e.arg), _d(e.arg, s))
    raise TypeError(f"cannot differentiate {e!r}")


def differentiate(e: Expr, s, times: int = 1) -> Expr:
    """Derivative of ``e`` with respect to the symbol ``s`` (name or Symbol)."""
    name = s.name if isinstance(s, Symbol) else str(s)
    out = simplify(as_expr(e))
    for _ in range(times):
        out = _d(out, name)
    return out


def gradient(e: Expr, coords) -> tuple:
    return tuple(differentiate(e, c) for c in coords)


def substitute(e: Expr, mapping) -> Expr:
    """Replace symbols by expressions and return the canonical result.

    ``mapping`` maps symbol names (or Symbols) to expressions or numbers.
    """
    table = {}
    for k, v in dict(mapping).items():
        table[k.name if isinstance(k, Symbol) else str(k)] = simplify(as_expr(v))
    memo: dict = {}

    def go(n):
        hit = memo.get(n)
        if hit is not None:
            return hit
        if not (n.free_symbols & table.keys()):
            out = simplify(n) if isinstance(n, (Add, Mul, Pow, Func)) else n
        elif isinstance(n, Symbol):
            out = table[n.name]
        elif isinstance(n, Add):
            out = add(*[go(t) for t in n.terms])
        elif isinstance(n, Mul):
            out = mul(*[go(f) for f in n.factors])
        elif isinstance(n, Pow):
            out = power(go(n.base), go(n.exp))
        elif isinstance(n, Func):
            out = func(n.name, go(n.arg))
        else:
            out = n
        memo[n] = out
        return out

    return go(as_expr(e))

