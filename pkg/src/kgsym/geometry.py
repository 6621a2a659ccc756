"""Diagonal metrics: connection, Laplacian, Lie derivative, collineation classes."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .symexpr import (
    Const, Expr, ONE, ZERO, add, as_expr, compile_expr, differentiate, is_number,
    mul, number, power, sample_max_abs, simplify, substitute, sx,
)

COORDS = ("t", "x", "y", "z")


def _to_expr(v) -> Expr:
    """Expressions pass through, strings are parsed, numbers become constants."""
    return sx(v) if isinstance(v, str) else simplify(as_expr(v))


@dataclass(frozen=True)
class DiagonalMetric:
    """g = sum_i sign_i * scale_i^2 (dx^i)^2.

    Scale factors are assumed positive on ``domain``, which is the box the
    probabilistic checks sample from (chosen to avoid the singular sets).
    """

    scales: tuple
    signs: tuple = (-1, 1, 1, 1)
    coords: tuple = COORDS
    domain: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "scales", tuple(_to_expr(s) for s in self.scales))
        if not (len(self.scales) == len(self.signs) == len(self.coords)):
            raise ValueError("scales, signs and coords must have the same length")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def components(self) -> tuple:
        return tuple(mul(Const(s), power(h, Const(2))) for s, h in zip(self.signs, self.scales))

    @property
    def inverse(self) -> tuple:
        return tuple(mul(Const(s), power(h, Const(-2))) for s, h in zip(self.signs, self.scales))

    @property
    def sqrt_det(self) -> Expr:
        """sqrt(|det g|) as the product of the scale factors."""
        return mul(*self.scales)

    def sample_domain(self, extra: Mapping[str, tuple] | None = None) -> dict:
        dom = dict(self.domain)
        if extra:
            dom.update(extra)
        return dom


@dataclass(frozen=True)
class VectorField:
    components: tuple

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(_to_expr(c) for c in self.components))

    def __getitem__(self, i):
        return self.components[i]

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(tuple(add(a, b) for a, b in zip(self, other)))

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "VectorField":
        c = as_expr(c)
        return VectorField(tuple(mul(c, a) for a in self))

    __rmul__ = scale

    def apply(self, f: Expr, coords: Sequence[str] = COORDS) -> Expr:
        """Directional derivative X(f) = X^k d_k f."""
        return add(*[mul(c, differentiate(f, x)) for c, x in zip(self, coords)])

    def is_zero(self) -> bool:
        return all(c == ZERO for c in self)


def zero_field(n: int = 4) -> VectorField:
    return VectorField((ZERO,) * n)


def coordinate_field(i: int, n: int = 4) -> VectorField:
    return VectorField(tuple(ONE if k == i else ZERO for k in range(n)))


def christoffel(m: DiagonalMetric):
    """Gamma[i][j][k] = Gamma^i_{jk} for the diagonal metric."""
    g, gi, X = m.components, m.inverse, m.coords
    n = m.dim
    dg = [[differentiate(g[a], X[b]) for b in range(n)] for a in range(n)]
    out = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(j, n):
                # only the diagonal components g_aa are nonzero
                s = []
                if i == k:
                    s.append(dg[i][j])
                if i == j:
                    s.append(dg[i][k])
                if j == k:
                    s.append(mul(Const(-1), dg[j][i]))
                val = mul(Const(Fraction(1, 2)), gi[i], add(*s)) if s else ZERO
                out[i][j][k] = val
                out[i][k][j] = val
    return out


def laplacian(m: DiagonalMetric, f: Expr) -> Expr:
    """Laplace-Beltrami operator (1/sqrt g) d_i (sqrt g g^ii d_i f)."""
    root = m.sqrt_det
    inv_root = power(root, Const(-1))
    terms = []
    for x, gii in zip(m.coords, m.inverse):
        flux = mul(root, gii, differentiate(f, x))
        terms.append(differentiate(flux, x))
    return mul(inv_root, add(*terms))


def laplacian_coefficients(m: DiagonalMetric):
    """(g^ii, (1/sqrt g) d_i(sqrt g g^ii)) so that the Laplacian is
    sum g^ii f_ii + c^i f_i."""
    root = m.sqrt_det
    drift = tuple(
        mul(power(root, Const(-1)), differentiate(mul(root, gii), x)) for x, gii in zip(m.coords, m.inverse)
    )
    return m.inverse, drift


def divergence(m: DiagonalMetric, X: VectorField) -> Expr:
    root = m.sqrt_det
    return mul(power(root, Const(-1)), add(*[differentiate(mul(root, c), x) for c, x in zip(X, m.coords)]))


def lie_derivative_metric(m: DiagonalMetric, X: VectorField):
    """(L_X g)_ij = X^k g_ij,k + g_kj X^k_,i + g_ik X^k_,j as a full matrix."""
    g, C = m.components, m.coords
    n = m.dim
    dX = [[differentiate(X[k], C[i]) for i in range(n)] for k in range(n)]
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            s = [mul(g[j], dX[j][i]), mul(g[i], dX[i][j])]
            if i == j:
                s.append(X.apply(g[i], C))
            out[i][j] = out[j][i] = add(*s)
    return out


def conformal_factor(m: DiagonalMetric, X: VectorField) -> Expr:
    """psi with L_X g = 2 psi g, read off as the trace (1/2n) g^ij (L_X g)_ij."""
    L = lie_derivative_metric(m, X)
    return mul(Const(Fraction(1, 2 * m.dim)), add(*[mul(gi, L[i][i]) for i, gi in enumerate(m.inverse)]))


def covariant_hessian(m: DiagonalMetric, f: Expr):
    G = christoffel(m)
    C = m.coords
    n = m.dim
    grad = [differentiate(f, x) for x in C]
    out = [[ZERO] * n for _ in range(n)]
    for a in range(n):
        for b in range(a, n):
            val = add(differentiate(grad[a], C[b]), *[mul(Const(-1), G[k][a][b], grad[k]) for k in range(n)])
            out[a][b] = out[b][a] = val
    return out


def lie_bracket(X: VectorField, Y: VectorField, coords: Sequence[str] = COORDS) -> VectorField:
    """[X, Y]^i = X^j d_j Y^i - Y^j d_j X^i."""
    return VectorField(tuple(add(X.apply(Y[i], coords), mul(Const(-1), Y.apply(X[i], coords)))
                             for i in range(len(X))))


def metric_compatibility(m: DiagonalMetric):
    """nabla_k g_ij for all index triples; identically zero for the Levi-Civita connection."""
    G = christoffel(m)
    g, C = m.components, m.coords
    n = m.dim
    out = []
    for k in range(n):
        for i in range(n):
            for j in range(n):
                gij = g[i] if i == j else ZERO
                val = add(differentiate(gij, C[k]),
                          mul(Const(-1), G[j][k][i], g[j]),
                          mul(Const(-1), G[i][k][j], g[i]))
                out.append(val)
    return out


KV, HV, SPECIAL_CKV, CKV, NOT_CONFORMAL = "KV", "HV", "SpecialCKV", "CKV", "NotConformal"


@dataclass(frozen=True)
class CollineationClass:
    tag: str
    psi: Expr | None
    residual: float = 0.0


def _rational_constant(v: float) -> Expr:
    q = Fraction(v).limit_denominator(1000)
    return Const(q) if abs(float(q) - v) < 1e-10 else number(v)


def classify_collineation(m: DiagonalMetric, X: VectorField, tol: float = 1e-9, seed: int = 0,
                          n: int = 20) -> CollineationClass:
    """Decide whether X is a Killing, homothetic, special conformal or conformal vector."""
    dom = m.sample_domain()
    psi = simplify(conformal_factor(m, X))
    L = lie_derivative_metric(m, X)
    g = m.components
    worst = 0.0
    for i in range(m.dim):
        for j in range(i, m.dim):
            gij = g[i] if i == j else ZERO
            worst = max(worst, sample_max_abs(add(L[i][j], mul(Const(-2), psi, gij)), dom, n, seed))
    if worst >= tol:
        return CollineationClass(NOT_CONFORMAL, None, worst)
    if psi == ZERO or sample_max_abs(psi, dom, n, seed) < tol:
        return CollineationClass(KV, ZERO, worst)
    if all(sample_max_abs(differentiate(psi, x), dom, n, seed) < tol for x in m.coords):
        if is_number(psi):
            value = psi
        else:
            f = compile_expr(psi, tuple(sorted(dom)))
            centre = [(lo + hi) / 2 for _, (lo, hi) in sorted(dom.items())]
            value = _rational_constant(f(*centre))
        return CollineationClass(HV, value, worst)
    H = covariant_hessian(m, psi)
    special = all(sample_max_abs(H[a][b], dom, n, seed) < tol for a in range(m.dim) for b in range(a, m.dim))
    return CollineationClass(SPECIAL_CKV if special else CKV, psi, worst)


def restrict(m: DiagonalMetric, values: Mapping[str, Expr]) -> DiagonalMetric:
    """Metric with some parameters substituted (used by family instances)."""
    return DiagonalMetric(tuple(substitute(s, values) for s in m.scales), m.signs, m.coords, m.domain)
