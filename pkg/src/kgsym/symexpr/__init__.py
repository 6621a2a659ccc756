"""A small exact computer-algebra core for real scalar expressions."""

from .core import (
    FUNCTIONS, HALF, MINUS_ONE, ONE, ZERO,
    Add, Const, Expr, Float, Func, Mul, Pow, Symbol,
    add, as_expr, free_symbols, func, is_number, mul, neg, number, power, simplify, symbols,
)
from .calculus import differentiate, gradient, substitute
from .evaluate import (
    Compiled, EvalDomainError, EvalError, UnboundSymbolError, ZeroTestUndecidable,
    compile_expr, eval_at, is_zero_probabilistic, sample_max_abs,
)
from .parser import ParseError, UnknownFunctionError, parse
from .printing import to_text


def sx(text: str) -> Expr:
    """Parse and simplify in one step."""
    return simplify(parse(text))


def sin(a): return func("sin", as_expr(a))
def cos(a): return func("cos", as_expr(a))
def tan(a): return func("tan", as_expr(a))
def cot(a): return func("cot", as_expr(a))
def sinh(a): return func("sinh", as_expr(a))
def cosh(a): return func("cosh", as_expr(a))
def tanh(a): return func("tanh", as_expr(a))
def coth(a): return func("coth", as_expr(a))
def exp(a): return func("exp", as_expr(a))
def ln(a): return func("ln", as_expr(a))
def arctan(a): return func("arctan", as_expr(a))
def sqrt(a): return func("sqrt", as_expr(a))
def lambert_w(a): return func("lambertW", as_expr(a))


__all__ = [
    "FUNCTIONS", "HALF", "MINUS_ONE", "ONE", "ZERO",
    "Add", "Const", "Expr", "Float", "Func", "Mul", "Pow", "Symbol",
    "add", "as_expr", "free_symbols", "func", "is_number", "mul", "neg", "number", "power",
    "simplify", "symbols", "differentiate", "gradient", "substitute",
    "Compiled", "EvalDomainError", "EvalError", "UnboundSymbolError", "ZeroTestUndecidable",
    "compile_expr", "eval_at", "is_zero_probabilistic", "sample_max_abs",
    "ParseError", "UnknownFunctionError", "parse", "to_text", "sx",
    "sin", "cos", "tan", "cot", "sinh", "cosh", "tanh", "coth", "exp", "ln", "arctan", "sqrt",
    "lambert_w",
]
