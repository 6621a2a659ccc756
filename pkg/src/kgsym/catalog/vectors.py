"""Catalog of Killing and conformal Killing vectors per family."""

from __future__ import annotations

from dataclasses import dataclass

from ..geometry import CKV, HV, KV, VectorField
from ..symexpr import Const, Expr, ZERO, as_expr, differentiate, is_zero_probabilistic, mul, power, simplify, sx
from .families import GENERAL, HYP, LRS, PROPER_CKV, TRIG, BianchiFamily, FamilyError


@dataclass(frozen=True)
class CatalogVector:
    label: str
    field: VectorField
    psi: Expr
    tag: str


def _vf(*texts) -> VectorField:
    return VectorField(tuple(sx(s) for s in texts))


def _kv(label, *texts):
    return CatalogVector(label, _vf(*texts), ZERO, KV)


def translations():
    return [_kv("Y1", "0", "1", "0", "0"), _kv("Y2", "0", "0", "1", "0"), _kv("Y3", "0", "0", "0", "1")]


ROTATION = ("Y4", ("0", "0", "z", "-y"))


def rotation():
    return _kv(ROTATION[0], *ROTATION[1])


def y5(family: BianchiFamily) -> CatalogVector:
    """(1/U) d_t + alpha x d_x + beta y d_y + gamma z d_z with psi = -U'/U^2."""
    a, b, c = family.exponents()
    if a == 0 and b == 0 and c == 0:
        raise FamilyError("alpha = beta = gamma = 0 makes Y5 degenerate")
    U = family.U
    field = VectorField((power(U, Const(-1)), mul(as_expr(a), sx("x")), mul(as_expr(b), sx("y")),
                         mul(as_expr(c), sx("z"))))
    psi = simplify(mul(Const(-1), differentiate(U, "t"), power(U, Const(-2))))
    const = is_zero_probabilistic(differentiate(psi, "t"), {"t": family.domain["t"]})
    return CatalogVector("Y5", field, psi, HV if const else CKV)


TRIG_KVS = {
    "Y4bar": ("exp(x+y)", "-cot(t)", "tan(t)"),
    "Y5bar": ("exp(x-y)", "-cot(t)", "-tan(t)"),
    "Y6bar": ("exp(-x+y)", "cot(t)", "tan(t)"),
    "Y7bar": ("exp(-x-y)", "cot(t)", "-tan(t)"),
}


def trig_killing_vectors():
    out = []
    for label, (pref, cx, cy) in TRIG_KVS.items():
        p = sx(pref)
        out.append(CatalogVector(label, VectorField((p, p * sx(cx), p * sx(cy), ZERO)), ZERO, KV))
    return out


def _ckv(label, pref, comps, psi):
    p = sx(pref)
    return CatalogVector(label, VectorField(tuple(p * sx(c) for c in comps)), sx(psi), CKV)


def trig_conformal_vectors():
    """The eight proper CKVs C^{1,2}_{+-x}, C^{1,2}_{+-y} with their conformal factors."""
    out = []
    for s, name in ((1, "p"), (-1, "m")):
        sg = "" if s > 0 else "-"
        ex = f"exp({sg}x)"
        ey = f"exp({sg}y)"
        out.append(_ckv(f"C1{name}x", ex, ("cos(t)*cos(z)", f"{-s}*cos(z)/sin(t)", "0", "-sin(t)*sin(z)"),
                        f"-{ex}*sin(t)*cos(z)"))
        out.append(_ckv(f"C2{name}x", ex, ("cos(t)*sin(z)", f"{-s}*sin(z)/sin(t)", "0", "sin(t)*cos(z)"),
                        f"-{ex}*sin(t)*sin(z)"))
        out.append(_ckv(f"C1{name}y", ey, ("sin(t)*sin(z)", "0", f"{s}*sin(z)/cos(t)", "-cos(t)*cos(z)"),
                        f"{ey}*cos(t)*sin(z)"))
        out.append(_ckv(f"C2{name}y", ey, ("sin(t)*cos(z)", "0", f"{s}*cos(z)/cos(t)", "cos(t)*sin(z)"),
                        f"{ey}*cos(t)*cos(z)"))
    order = ["C1px", "C1mx", "C2px", "C2mx", "C1py", "C1my", "C2py", "C2my"]
    by_label = {v.label: v for v in out}
    return [by_label[k] for k in order]


def catalog_vectors(family: BianchiFamily):
    """All catalog vectors of ``family`` (KVs first)."""
    out = translations()
    if family.variant == LRS:
        out.append(rotation())
    elif family.variant == GENERAL and family.B == family.C and family.A != family.B:
        out.append(rotation())
    elif family.variant == PROPER_CKV:
        _, b, c = family.exponents()
        if b == c:
            out.append(rotation())
        out.append(y5(family))
    elif family.variant == TRIG:
        out.extend(trig_killing_vectors())
        out.extend(trig_conformal_vectors())
    elif family.variant == HYP:
        pass
    return out


def vector_by_label(family: BianchiFamily, label: str) -> CatalogVector:
    for v in catalog_vectors(family):
        if v.label == label:
            return v
    raise KeyError(f"{label} is not a catalog vector of {family.variant}")


__all__ = ["CatalogVector", "catalog_vectors", "vector_by_label", "translations", "rotation", "y5",
           "trig_killing_vectors", "trig_conformal_vectors"]
