"""Numeric evaluation: compiled closures, domain errors, probabilistic zero test."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Mapping

import numpy as np

from ..numerics import lambert_w
from .core import Add, Const, Expr, Float, Func, Mul, Pow, Symbol, as_expr

_INV_E = math.exp(-1.0)


class EvalError(ValueError):
    pass


class UnboundSymbolError(EvalError):
    def __init__(self, names):
        self.names = tuple(sorted(names))
        super().__init__(f"unbound symbols: {', '.join(self.names)}")


class EvalDomainError(EvalError):
    """Evaluation left the real domain; ``subexpr`` is the offending node."""

    def __init__(self, message: str, subexpr=None):
        self.subexpr = subexpr
        if subexpr is not None:
            message = f"{message} in {subexpr}"
        super().__init__(message)


class ZeroTestUndecidable(EvalError):
    pass


class _Domain(Exception):
    pass


def _ln(v):
    if v <= 0.0:
        raise _Domain
    return math.log(v)


def _sqrt(v):
    if v < 0.0:
        raise _Domain
    return math.sqrt(v)


def _rpow(b, e):
    if b < 0.0:
        raise _Domain
    if b == 0.0 and e < 0.0:
        raise _Domain
    return b ** e


def _lw(v):
    if v < -_INV_E - 1e-15:
        raise _Domain
    return lambert_w(v)


def _cot(v):
    return 1.0 / math.tan(v)


def _coth(v):
    return 1.0 / math.tanh(v)


_FUNC_NAMES = {
    "sin": "_m.sin", "cos": "_m.cos", "tan": "_m.tan", "cot": "_cot",
    "sinh": "_m.sinh", "cosh": "_m.cosh", "tanh": "_m.tanh", "coth": "_coth",
    "exp": "_m.exp", "ln": "_ln", "arctan": "_m.atan", "sqrt": "_sqrt", "lambertW": "_lw",
}

_ENV = {"_m": math, "_ln": _ln, "_sqrt": _sqrt, "_rpow": _rpow, "_lw": _lw, "_cot": _cot, "_coth": _coth}


def _codegen(e: Expr, args: tuple):
    lines = []
    names: dict = {}
    counter = [0]

    def fresh():
        counter[0] += 1
        return f"v{counter[0]}"

    def visit(n):
        hit = names.get(n)
        if hit is not None:
            return hit
        if isinstance(n, Const):
            return repr(float(n.value))
        if isinstance(n, Float):
            return repr(n.value)
        if isinstance(n, Symbol):
            return f"a{args.index(n.name)}"
        if isinstance(n, Add):
            code = " + ".join(visit(t) for t in n.terms)
        elif isinstance(n, Mul):
            code = " * ".join(visit(f) for f in n.factors)
        elif isinstance(n, Pow):
            b = visit(n.base)
            if isinstance(n.exp, Const) and n.exp.value.denominator == 1:
                k = n.exp.value.numerator
                code = f"({b}) ** {k}" if k >= 0 else f"1.0 / (({b}) ** {-k})"
            else:
                code = f"_rpow({b}, {visit(n.exp)})"
        elif isinstance(n, Func):
            code = f"{_FUNC_NAMES[n.name]}({visit(n.arg)})"
        else:
            raise TypeError(f"cannot compile {n!r}")
        var = fresh()
        lines.append(f"    {var} = {code}")
        names[n] = var
        return var

    result = visit(e)
    params = ", ".join(f"a{i}" for i in range(len(args)))
    src = f"def _f({params}):\n" + "\n".join(lines) + f"\n    return {result}\n"
    return src


@lru_cache(maxsize=4096)
def _compile_positional(e: Expr, args: tuple):
    src = _codegen(e, args)
    env = dict(_ENV)
    exec(src, env)  # noqa: S102 - source generated from our own tree
    return env["_f"]


def _interpret(n, env):
    """Slow evaluator used only to name the node that raised."""
    if isinstance(n, (Const, Float)):
        return float(n.value)
    if isinstance(n, Symbol):
        return float(env[n.name])
    try:
        if isinstance(n, Add):
            return sum(_interpret(t, env) for t in n.terms)
        if isinstance(n, Mul):
            out = 1.0
            for f in n.factors:
                out *= _interpret(f, env)
            return out
        if isinstance(n, Pow):
            b, ex = _interpret(n.base, env), _interpret(n.exp, env)
            if float(ex).is_integer():
                return b ** int(ex)
            return _rpow(b, ex)
        if isinstance(n, Func):
            a = _interpret(n.arg, env)
            fn = _FUNC_NAMES[n.name]
            return (getattr(math, fn[3:]) if fn.startswith("_m.") else _ENV[fn])(a)
    except EvalDomainError:
        raise
    except (_Domain, ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvalDomainError(f"domain violation ({type(exc).__name__})", n) from None
    raise TypeError(f"cannot evaluate {n!r}")


class Compiled:
    """A compiled expression; call with positional values in ``args`` order."""

    def __init__(self, e: Expr, args=None):
        self.expr = as_expr(e)
        free = self.expr.free_symbols
        self.args = tuple(args) if args is not None else tuple(sorted(free))
        missing = free - set(self.args)
        if missing:
            raise UnboundSymbolError(missing)
        self._fn = _compile_positional(self.expr, self.args)

    def __call__(self, *values) -> float:
        try:
            return self._fn(*values)
        except (_Domain, ValueError, ZeroDivisionError, OverflowError):
            _interpret(self.expr, dict(zip(self.args, values)))
            raise EvalDomainError("domain violation", self.expr) from None

    def at(self, assignment: Mapping[str, float]) -> float:
        return self(*[assignment[a] for a in self.args])


def compile_expr(e: Expr, args=None) -> Compiled:
    return Compiled(e, args)


def eval_at(e: Expr, assignment: Mapping[str, float]) -> float:
    e = as_expr(e)
    missing = e.free_symbols - set(assignment)
    if missing:
        raise UnboundSymbolError(missing)
    c = Compiled(e, tuple(sorted(e.free_symbols)))
    return c.at(assignment)


DEFAULT_SAMPLES = 20
DEFAULT_TOL = 1e-9
RETRY_FACTOR = 10


def sample_max_abs(e: Expr, domain: Mapping[str, tuple], n: int = DEFAULT_SAMPLES, seed: int = 0) -> float:
    """Largest |e| over ``n`` seeded points of a box domain.

    Points where evaluation fails or is non-finite are redrawn, up to
    ``RETRY_FACTOR * n`` draws in total.
    """
    e = as_expr(e)
    missing = e.free_symbols - set(domain)
    if missing:
        raise UnboundSymbolError(missing)
    names = sorted(domain)
    fn = Compiled(e, tuple(names))
    rng = np.random.default_rng(seed)
    lows = [domain[k][0] for k in names]
    highs = [domain[k][1] for k in names]
    worst = 0.0
    good = draws = 0
    while good < n:
        draws += 1
        if draws > RETRY_FACTOR * n:
            raise ZeroTestUndecidable(f"only {good} of {n} sample points were admissible for {e}")
        vals = [float(rng.uniform(lo, hi)) for lo, hi in zip(lows, highs)]
        try:
            v = fn(*vals)
        except EvalDomainError:
            continue
        if not math.isfinite(v):
            continue
        good += 1
        worst = max(worst, abs(v))
    return worst


def is_zero_probabilistic(e: Expr, domain: Mapping[str, tuple], n: int = DEFAULT_SAMPLES,
                          tol: float = DEFAULT_TOL, seed: int = 0) -> bool:
    """True when |e| < tol at ``n`` seeded sample points of ``domain``."""
    return sample_max_abs(e, domain, n, seed) < tol
