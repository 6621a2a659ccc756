"""Floating-point kernels: Lambert W, RK4, dense output, finite differences."""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

_INV_E = math.exp(-1.0)


class IntegrationError(RuntimeError):
    """The integrator produced a non-finite state."""

    def __init__(self, message: str, last_valid: float):
        super().__init__(f"{message} (last valid abscissa {last_valid!r})")
        self.last_valid = last_valid


def lambert_w(x: float) -> float:
    """Principal branch W0 of the Lambert W function, by Halley iteration.

    Defined for x >= -1/e; converges to about 1e-15 relative.
    """
    x = float(x)
    if math.isnan(x):
        return x
    if x < -_INV_E:
        if x > -_INV_E - 1e-15:
            return -1.0
        raise ValueError(f"lambert_w undefined for x={x!r} < -1/e")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return x
    # starting guesses: branch-point series, Winitzki's form, asymptotics
    if x < -0.32:
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3
    elif x < 3.0:
        lx = math.log1p(x)
        w = lx * (1.0 - math.log1p(lx) / (2.0 + lx))
    else:
        l1 = math.log(x)
        l2 = math.log(l1)
        w = l1 - l2 + l2 / l1
    for _ in range(60):
        ew = math.exp(w)
        f = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0.0:
            break
        step = f / denom
        w -= step
        if abs(step) <= 1e-15 * (1.0 + abs(w)):
            break
    return w


def rk4(f: Callable, y0: Sequence[float], t0: float, t1: float, h: float):
    """Fixed-step classical Runge-Kutta from t0 to t1 (either direction).

    Returns (ts, ys) as arrays; the last step is shortened to land on t1.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    span = t1 - t0
    n = max(1, int(math.ceil(abs(span) / h - 1e-12)))
    step = span / n
    y = np.array(y0, dtype=float)
    ts = np.empty(n + 1)
    ys = np.empty((n + 1, y.size))
    ts[0], ys[0] = t0, y
    t = t0
    for k in range(n):
        k1 = np.asarray(f(t, y), dtype=float)
        k2 = np.asarray(f(t + step / 2, y + step / 2 * k1), dtype=float)
        k3 = np.asarray(f(t + step / 2, y + step / 2 * k2), dtype=float)
        k4 = np.asarray(f(t + step, y + step * k3), dtype=float)
        y = y + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (k + 1) * step
        if not np.all(np.isfinite(y)):
            raise IntegrationError("non-finite state", float(ts[k]))
        ts[k + 1], ys[k + 1] = t, y
    return ts, ys


def _quintic_weights(s: float):
    s2 = s * s
    s3 = s2 * s
    s4 = s3 * s
    s5 = s4 * s
    return (
        1 - 10 * s3 + 15 * s4 - 6 * s5,
        s - 6 * s3 + 8 * s4 - 3 * s5,
        0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
        0.5 * s3 - s4 + 0.5 * s5,
        -4 * s3 + 7 * s4 - 3 * s5,
        10 * s3 - 15 * s4 + 6 * s5,
    )


def _quintic_dweights(s: float):
    s2 = s * s
    s3 = s2 * s
    s4 = s3 * s
    return (
        -30 * s2 + 60 * s3 - 30 * s4,
        1 - 18 * s2 + 32 * s3 - 15 * s4,
        s - 4.5 * s2 + 6 * s3 - 2.5 * s4,
        1.5 * s2 - 4 * s3 + 2.5 * s4,
        -12 * s2 + 28 * s3 - 15 * s4,
        30 * s2 - 60 * s3 + 30 * s4,
    )


class SecondOrderSolution:
    """RK4 solution of s'' = accel(x, s, s') with quintic Hermite dense output.

    ``accel`` supplies the second derivative at every knot, so the
    interpolant matches value, slope and curvature there and its own second
    derivative stays accurate between knots.
    """

    def __init__(self, accel: Callable, x0: float, x1: float, s0: float, ds0: float, h: float = 1e-3):
        self.accel = accel
        ts, ys = rk4(lambda x, y: (y[1], accel(x, y[0], y[1])), (s0, ds0), x0, x1, h)
        if ts[0] > ts[-1]:
            ts, ys = ts[::-1], ys[::-1]
        self.xs = ts
        self.values = ys[:, 0].copy()
        self.slopes = ys[:, 1].copy()
        self.curvatures = np.array([accel(x, v, d) for x, v, d in zip(ts, self.values, self.slopes)])
        self._knots = ts.tolist()

    @property
    def interval(self):
        return float(self.xs[0]), float(self.xs[-1])

    def _cell(self, x: float):
        lo, hi = self.interval
        if not (lo - 1e-12 <= x <= hi + 1e-12):
            raise ValueError(f"abscissa {x!r} outside integrated interval [{lo}, {hi}]")
        k = min(max(bisect.bisect_right(self._knots, x) - 1, 0), len(self._knots) - 2)
        return k

    def __call__(self, x: float) -> float:
        k = self._cell(x)
        x0, x1 = self._knots[k], self._knots[k + 1]
        h = x1 - x0
        w = _quintic_weights((x - x0) / h)
        return (w[0] * self.values[k] + w[1] * h * self.slopes[k] + w[2] * h * h * self.curvatures[k]
                + w[3] * h * h * self.curvatures[k + 1] + w[4] * h * self.slopes[k + 1]
                + w[5] * self.values[k + 1])

    def derivative(self, x: float) -> float:
        k = self._cell(x)
        x0, x1 = self._knots[k], self._knots[k + 1]
        h = x1 - x0
        w = _quintic_dweights((x - x0) / h)
        return (w[0] * self.values[k] / h + w[1] * self.slopes[k] + w[2] * h * self.curvatures[k]
                + w[3] * h * self.curvatures[k + 1] + w[4] * self.slopes[k + 1]
                + w[5] * self.values[k + 1] / h)


@dataclass(frozen=True)
class Grid:
    """Tensor-product sample grid; ``axes`` is a sequence of (name, lo, hi, count)."""

    axes: tuple

    @property
    def names(self):
        return tuple(a[0] for a in self.axes)

    def points(self):
        lines = [np.linspace(lo, hi, n) if n > 1 else np.array([(lo + hi) / 2]) for _, lo, hi, n in self.axes]
        for combo in itertools.product(*lines):
            yield tuple(float(v) for v in combo)

    def __len__(self):
        return int(np.prod([a[3] for a in self.axes]))


def fd_kg_residual(u: Callable, point: Sequence[float], inv_diag: Sequence[float],
                   drift: Sequence[float], potential: float, h: float) -> float:
    """Central-difference value of sum g^ii u_ii + c^i u_i + V u at ``point``.

    The result is divided by max(|u|, 1).  ``inv_diag`` and ``drift`` hold the
    inverse metric diagonal and first-order coefficients already evaluated at
    the point.
    """
    p = list(point)
    u0 = u(*p)
    total = potential * u0
    for i in range(len(p)):
        if inv_diag[i] == 0 and drift[i] == 0:
            continue
        p[i] = point[i] + h
        up = u(*p)
        p[i] = point[i] - h
        um = u(*p)
        p[i] = point[i]
        total += inv_diag[i] * (up - 2.0 * u0 + um) / (h * h) + drift[i] * (up - um) / (2.0 * h)
    return total / max(abs(u0), 1.0)


def central_gradient(fn: Callable, point: Sequence[float], h: float) -> list:
    p = list(point)
    out = []
    for i in range(len(p)):
        p[i] = point[i] + h
        fp = fn(*p)
        p[i] = point[i] - h
        fm = fn(*p)
        p[i] = point[i]
        out.append((fp - fm) / (2.0 * h))
    return out


# noise floor below which a residual pair is treated as converged rather
# than checked for the h^2 ratio
RICHARDSON_FLOOR = 1e-8
RICHARDSON_BAND = (2.5, 6.0)


def richardson_ok(r_h: float, r_half: float, floor: float = RICHARDSON_FLOOR) -> bool:
    """True when halving h shrinks the residual like h^2, or both are at the noise floor."""
    if r_h < floor and r_half < floor:
        return True
    if r_half == 0.0:
        return r_h < floor
    ratio = r_h / r_half
    return RICHARDSON_BAND[0] <= ratio <= RICHARDSON_BAND[1]


def uniform_points(domain: Mapping[str, tuple], n: int, seed: int):
    """``n`` seeded uniform samples from a box domain, as dicts."""
    rng = np.random.default_rng(seed)
    names = sorted(domain)
    out = []
    for _ in range(n):
        out.append({k: float(rng.uniform(*domain[k])) for k in names})
    return out
