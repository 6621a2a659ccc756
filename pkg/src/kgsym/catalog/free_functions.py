"""Concrete stand-ins for the arbitrary functions appearing in potential templates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from ..symexpr import Expr, Const, ONE, add, exp, mul, power, simplify


@dataclass(frozen=True)
class FreeFunctionInstance:
    name: str
    build: Callable[[Sequence[Expr]], Expr]

    def __call__(self, args: Sequence[Expr]) -> Expr:
        return simplify(self.build(tuple(args)))


def _gaussian(args):
    return exp(mul(Const(-1), add(*[power(a, Const(2)) for a in args])))


def _chain(args):
    terms, prod = [], ONE
    for a in args:
        prod = mul(prod, a)
        terms.append(prod)
    return add(*terms)


GAUSSIAN = FreeFunctionInstance("gaussian", _gaussian)
CHAIN = FreeFunctionInstance("chain", _chain)
DEFAULT_INSTANCES = (GAUSSIAN, CHAIN)


def instance_by_name(name: str) -> FreeFunctionInstance:
    for inst in DEFAULT_INSTANCES:
        if inst.name == name:
            return inst
    raise KeyError(f"unknown free-function instance {name!r}")


__all__ = ["FreeFunctionInstance", "GAUSSIAN", "CHAIN", "DEFAULT_INSTANCES", "instance_by_name"]
