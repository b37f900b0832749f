"""Exact truncated Taylor (jet) arithmetic in the four chart coordinates.

A Jet of order K stores the Taylor coefficients f_alpha = (d^alpha f)(p) /
alpha! for every multi-index alpha with |alpha| <= K, at some fixed base
point p.  Arithmetic on jets is exact polynomial arithmetic modulo degree
K+1, so every derivative read off a jet is a machine-precision derivative
of the input expression, not a finite-difference estimate.

Coefficients are laid out densely in graded lexicographic order over the
variables (u, v, x, y); the order-K' layout is a prefix of the order-K
layout for K' < K, so truncation is a slice.  Multiplication tables and
derivative shift tables are cached per order.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .exprlang import Expr, evaluate

NVARS = 4
VAR_NAMES = ("u", "v", "x", "y")
MAX_ORDER = 6


class InsufficientOrderError(ValueError):
    """A derivative or coefficient was requested beyond the stored order."""


@lru_cache(maxsize=None)
def basis(order: int) -> tuple[tuple[int, int, int, int], ...]:
    """All exponent 4-tuples with total degree <= order, graded lex."""
    out = []
    for deg in range(order + 1):
        for i in range(deg, -1, -1):
            for j in range(deg - i, -1, -1):
                for k in range(deg - i - j, -1, -1):
                    out.append((i, j, k, deg - i - j - k))
    return tuple(out)


@lru_cache(maxsize=None)
def _index_map(order: int) -> dict[tuple[int, int, int, int], int]:
    return {e: n for n, e in enumerate(basis(order))}


@lru_cache(maxsize=None)
def _mul_table(order: int):
    """Parallel index arrays (ia, ib, iout) with deg(a)+deg(b) <= order."""
    mono = basis(order)
    idx = _index_map(order)
    ia, ib, io = [], [], []
    for na, ea in enumerate(mono):
        da = sum(ea)
        for nb, eb in enumerate(mono):
            if da + sum(eb) > order:
                continue
            ia.append(na)
            ib.append(nb)
            io.append(idx[tuple(x + y for x, y in zip(ea, eb))])
    return np.array(ia), np.array(ib), np.array(io)


@lru_cache(maxsize=None)
def _diff_table(order: int, var: int):
    """For each slot of basis(order-1): source slot in basis(order), factor."""
    idx = _index_map(order)
    src, fac = [], []
    for e in basis(order - 1):
        shifted = list(e)
        shifted[var] += 1
        src.append(idx[tuple(shifted)])
        fac.append(float(e[var] + 1))
    return np.array(src), np.array(fac)


class Jet:
    """Dense truncated Taylor expansion; immutable by convention."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: np.ndarray):
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"jet order {order} outside [0, {MAX_ORDER}]")
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (len(basis(order)),):
            raise ValueError("coefficient array does not match order")
        self.order = order
        self.coeffs = coeffs

    # construction -----------------------------------------------------

    @staticmethod
    def const(value: float, order: int) -> "Jet":
        c = np.zeros(len(basis(order)))
        c[0] = value
        return Jet(order, c)

    @staticmethod
    def variable(name: str, base_value: float, order: int) -> "Jet":
        if name not in VAR_NAMES:
            raise ValueError(f"unknown variable {name!r}")
        c = np.zeros(len(basis(order)))
        c[0] = base_value
        if order >= 1:
            unit = tuple(1 if v == name else 0 for v in VAR_NAMES)
            c[_index_map(order)[unit]] = 1.0
        return Jet(order, c)

    # ring structure ---------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise InsufficientOrderError(
                f"cannot raise jet order {self.order} to {order}"
            )
        return Jet(order, self.coeffs[: len(basis(order))].copy())

    def _align(self, other) -> tuple["Jet", "Jet"]:
        if not isinstance(other, Jet):
            other = Jet.const(float(other), self.order)
        k = min(self.order, other.order)
        return self.truncate(k), other.truncate(k)

    def __add__(self, other):
        a, b = self._align(other)
        return Jet(a.order, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._align(other)
        return Jet(a.order, a.coeffs - b.coeffs)

    def __rsub__(self, other):
        a, b = self._align(other)
        return Jet(a.order, b.coeffs - a.coeffs)

    def __neg__(self):
        return Jet(self.order, -self.coeffs)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.order, self.coeffs * float(other))
        a, b = self._align(other)
        ia, ib, io = _mul_table(a.order)
        out = np.zeros_like(a.coeffs)
        np.add.at(out, io, a.coeffs[ia] * b.coeffs[ib])
        return Jet(a.order, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.order, self.coeffs / float(other))
        return self * other.inv()

    def __rtruediv__(self, other):
        return Jet.const(float(other), self.order) * self.inv()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("jet exponent must be an integer")
        if n < 0:
            return self.inv() ** (-n)
        result = Jet.const(1.0, self.order)
        square = self
        while n:
            if n & 1:
                result = result * square
            n >>= 1
            if n:
                square = square * square
        return result

    def inv(self) -> "Jet":
        c0 = self.value
        if c0 == 0.0:
            raise ZeroDivisionError("jet has zero value part")
        # 1/(c0 + h) = (1/c0) sum (-h/c0)^m, h nilpotent of index order+1
        y = Jet(self.order, self.coeffs / c0)
        y.coeffs[0] = 0.0
        acc = Jet.const(1.0, self.order)
        term = Jet.const(1.0, self.order)
        for _ in range(self.order):
            term = term * y
            acc = acc - term if _ % 2 == 0 else acc + term
        return Jet(self.order, acc.coeffs / c0)

    # analytic functions -----------------------------------------------

    def _nilpotent(self) -> "Jet":
        h = Jet(self.order, self.coeffs.copy())
        h.coeffs[0] = 0.0
        return h

    def _series(self, coeffs_by_power: list[float]) -> "Jet":
        """sum coeffs_by_power[m] * h^m for the nilpotent part h."""
        h = self._nilpotent()
        acc = Jet.const(coeffs_by_power[0], self.order)
        term = Jet.const(1.0, self.order)
        for m in range(1, len(coeffs_by_power)):
            term = term * h
            acc = acc + coeffs_by_power[m] * term
        return acc

    def exp(self) -> "Jet":
        scale = math.exp(self.value)
        series = [1.0 / math.factorial(m) for m in range(self.order + 1)]
        return scale * self._series(series)

    def ln(self) -> "Jet":
        c0 = self.value
        if c0 <= 0.0:
            raise ValueError("ln of jet with non-positive value part")
        series = [math.log(c0)]
        for m in range(1, self.order + 1):
            series.append((-1.0) ** (m + 1) / (m * c0**m))
        return self._series(series)

    def sin(self) -> "Jet":
        s0, c0 = math.sin(self.value), math.cos(self.value)
        cycle = [s0, c0, -s0, -c0]
        series = [cycle[m % 4] / math.factorial(m) for m in range(self.order + 1)]
        return self._series(series)

    def cos(self) -> "Jet":
        s0, c0 = math.sin(self.value), math.cos(self.value)
        cycle = [c0, -s0, -c0, s0]
        series = [cycle[m % 4] / math.factorial(m) for m in range(self.order + 1)]
        return self._series(series)

    def sqrt(self) -> "Jet":
        c0 = self.value
        if c0 <= 0.0:
            raise ValueError("sqrt of jet with non-positive value part")
        # (c0 + h)^(1/2) = sqrt(c0) * sum binom(1/2, m) (h/c0)^m
        series, binom = [], 1.0
        for m in range(self.order + 1):
            series.append(binom / c0**m)
            binom *= (0.5 - m) / (m + 1)
        return math.sqrt(c0) * self._series(series)

    # derivatives --------------------------------------------------------

    def diff(self, var) -> "Jet":
        """Partial derivative; result has one order less."""
        if isinstance(var, str):
            var = VAR_NAMES.index(var)
        if self.order == 0:
            raise InsufficientOrderError("cannot differentiate an order-0 jet")
        src, fac = _diff_table(self.order, var)
        return Jet(self.order - 1, self.coeffs[src] * fac)

    def coeff(self, exponents: tuple[int, int, int, int]) -> float:
        if sum(exponents) > self.order:
            raise InsufficientOrderError(
                f"coefficient {exponents} beyond jet order {self.order}"
            )
        return float(self.coeffs[_index_map(self.order)[tuple(exponents)]])

    def derivative(self, exponents: tuple[int, int, int, int]) -> float:
        """Value of the mixed partial d^alpha f at the base point."""
        scale = 1.0
        for e in exponents:
            scale *= math.factorial(e)
        return self.coeff(exponents) * scale

    def __repr__(self):
        return f"Jet(order={self.order}, value={self.value:.6g})"


def lift(expr: Expr, point, order: int) -> Jet:
    """Evaluate an expression AST into a jet at the given base point.

    `point` is a 4-sequence of floats in coordinate order (u, v, x, y).
    """
    env = {
        name: Jet.variable(name, float(p), order)
        for name, p in zip(VAR_NAMES, point)
    }
    result = evaluate(expr, env)
    if not isinstance(result, Jet):
        result = Jet.const(float(result), order)
    return result


def jet_matrix_inverse(mat: list[list[Jet]]) -> list[list[Jet]]:
    """Invert a square matrix over the jet ring by Gauss-Jordan.

    Pivots are chosen by the magnitude of the value part; a matrix whose
    value part is singular raises ZeroDivisionError.
    """
    n = len(mat)
    order = mat[0][0].order
    aug = [
        [m.truncate(order) for m in row]
        + [Jet.const(1.0 if i == j else 0.0, order) for j in range(n)]
        for i, row in enumerate(mat)
    ]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(aug[r][col].value))
        if abs(aug[pivot][col].value) == 0.0:
            raise ZeroDivisionError("jet matrix is singular at the base point")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = aug[col][col].inv()
        aug[col] = [entry * inv_p for entry in aug[col]]
        for row in range(n):
            if row == col:
                continue
            factor = aug[row][col]
            if np.all(factor.coeffs == 0.0):
                continue
            aug[row] = [a - factor * b for a, b in zip(aug[row], aug[col])]
    return [row[n:] for row in aug]
