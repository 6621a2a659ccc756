"""Text rendering that the parser reads back."""

from __future__ import annotations

from fractions import Fraction

from .core import Add, Const, Float, Func, Mul, Pow, Symbol, is_number

_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def _number_text(v):
    if isinstance(v, Fraction):
        if v.denominator == 1:
            text = str(v.numerator)
            return text, (_NEG if v < 0 else _ATOM)
        return f"{v.numerator}/{v.denominator}", (_NEG if v < 0 else _MUL)
    text = repr(float(v))
    return text, (_NEG if v < 0 else _ATOM)


def _wrap(pair, min_prec):
    text, prec = pair
    return f"({text})" if prec < min_prec else text


def _is_negative_term(e):
    if is_number(e):
        return e.value < 0
    return isinstance(e, Mul) and is_number(e.factors[0]) and e.factors[0].value < 0


def _negate(e):
    # only called on terms accepted by _is_negative_term, so stay structural
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Float):
        return Float(-e.value)
    c = e.factors[0]
    rest = e.factors[1:]
    flipped = Const(-c.value) if isinstance(c, Const) else Float(-c.value)
    if flipped.value == 1 and isinstance(flipped, Const):
        return rest[0] if len(rest) == 1 else Mul(rest)
    return Mul((flipped,) + rest)


def _fmt(e):
    if isinstance(e, (Const, Float)):
        return _number_text(e.value)
    if isinstance(e, Symbol):
        return e.name, _ATOM
    if isinstance(e, Func):
        return f"{e.name}({_fmt(e.arg)[0]})", _ATOM
    if isinstance(e, Add):
        parts = []
        for i, t in enumerate(e.terms):
            if i and _is_negative_term(t):
                parts.append(" - " + _wrap(_fmt(_negate(t)), _MUL))
            elif i:
                parts.append(" + " + _wrap(_fmt(t), _MUL))
            else:
                parts.append(_wrap(_fmt(t), _NEG))
        return "".join(parts), _ADD
    if isinstance(e, Mul):
        factors = list(e.factors)
        lead = ""
        if is_number(factors[0]) and len(factors) > 1:
            c = factors.pop(0)
            if isinstance(c, Const) and c.value == -1:
                lead = "-"
            else:
                lead = _wrap(_number_text(c.value), _NEG) + "*"
        num, den = [], []
        for f in factors:
            if isinstance(f, Pow) and is_number(f.exp) and f.exp.value < 0 and not is_number(f.base):
                inv = f.base if f.exp.value == -1 else Pow(f.base, type(f.exp)(-f.exp.value))
                den.append(_wrap(_fmt(inv), _POW))
            else:
                num.append(_wrap(_fmt(f), _NEG))
        if not num and lead not in ("", "-"):
            body, lead = lead[:-1], ""
        else:
            body = "*".join(num) if num else "1"
        if den:
            body += "/" + "/".join(den)
        if lead == "-":
            return "-" + body, _NEG
        return lead + body, _MUL
    if isinstance(e, Pow):
        base = _wrap(_fmt(e.base), _ATOM)
        exp_text, exp_prec = _fmt(e.exp)
        if exp_prec < _ATOM:
            exp_text = f"({exp_text})"
        return f"{base}^{exp_text}", _POW
    raise TypeError(f"cannot print {e!r}")


def to_text(e) -> str:
    return _fmt(e)[0]
