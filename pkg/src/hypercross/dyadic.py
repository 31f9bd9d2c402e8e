"""Dyadic-level quasi-interpolants and their multilevel surpluses.

At level ``k`` (a vector of per-axis dyadic refinements) the unit cube splits
into ``prod 2**k_j`` cells.  The level operator interpolates the target
function on every cell by a tensor polynomial and blends the local pieces
with a B-spline partition of unity:

    R_k f = sum_shift  P[level k, cell max(shift, 0)]  *  g[k, shift]

where the sum runs over the shifts whose translate meets the cube.  The
surplus operator is the mixed first difference of the level family over the
axes where the level is positive,

    S_k = sum over masks e in {0,1}^d with e <= sign(k) of (-1)^|e| R_{k-e},

so surpluses over any downward-closed level set telescope back to level
operators.  Derivatives of either operator follow from the product rule
applied to each polynomial-times-spline term.

`DyadicEvaluator` memoizes the local interpolants per (level, cell), which is
what makes repeated evaluations (and the recovery sweep built on top) reuse
every function value instead of resampling it.
"""

from __future__ import annotations

import math
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .bspline import bspline_derivative, refinement_coeffs
from .interp import TensorPoly, nodes

Vector = tuple[int, ...]


def support_axes(level: Sequence[int]) -> tuple[int, ...]:
    """Axes along which the level vector is positive."""
    return tuple(j for j, k in enumerate(level) if k > 0)


def decrement_masks(level: Sequence[int]) -> list[Vector]:
    """All 0/1 masks supported on the positive axes of ``level``."""
    axes = support_axes(level)
    masks = []
    for bits in product((0, 1), repeat=len(axes)):
        m = [0] * len(level)
        for a, b in zip(axes, bits):
            m[a] = b
        masks.append(tuple(m))
    return masks


def _cell_of(level: Vector, x: Sequence[float]) -> Vector:
    # Right edge of the cube folds into the last cell.
    return tuple(
        min(math.floor(math.ldexp(xj, k)), 2**k - 1) for k, xj in zip(level, x)
    )


class DyadicEvaluator:
    """Evaluates level/surplus operators for one function, memoizing cell polynomials.

    ``degrees`` bounds the per-axis polynomial degree of the local
    interpolants and ``order`` is the per-axis B-spline order of the blending
    partition.  Function values enter either through ``f`` (called with a
    float point) or through ``node_value(level, cell, idx)``, which lets a
    caller key values by exact sample identity.
    """

    def __init__(
        self,
        degrees: Sequence[int],
        order: Sequence[int],
        f: Callable[[tuple[float, ...]], float] | None = None,
        node_value: Callable[[Vector, Vector, Vector], float] | None = None,
    ):
        if (f is None) == (node_value is None):
            raise ValueError("provide exactly one of f or node_value")
        self.degrees = tuple(int(d) for d in degrees)
        self.order = tuple(int(m) for m in order)
        if len(self.degrees) != len(self.order):
            raise ValueError("degrees and order must share one dimension")
        self.dim = len(self.degrees)
        self._axis_nodes = [nodes(d) for d in self.degrees]
        if node_value is None:

            def node_value(level: Vector, cell: Vector, idx: Vector) -> float:
                pt = tuple(
                    math.ldexp(c + self._axis_nodes[j][idx[j]], -k)
                    for j, (k, c) in enumerate(zip(level, cell))
                )
                return f(pt)

        self._node_value = node_value
        self._polys: dict[tuple[Vector, Vector], TensorPoly] = {}

    # -- local interpolation -------------------------------------------------

    def local_interp(self, level: Sequence[int], cell: Sequence[int]) -> TensorPoly:
        """Tensor interpolant of the function on one dyadic cell (memoized)."""
        level = tuple(int(k) for k in level)
        cell = tuple(int(c) for c in cell)
        for k, c in zip(level, cell):
            if k < 0 or not 0 <= c <= 2**k - 1:
                raise ValueError(f"cell {cell} invalid at level {level}")
        key = (level, cell)
        poly = self._polys.get(key)
        if poly is None:
            shape = tuple(d + 1 for d in self.degrees)
            vals = np.empty(shape)
            for idx in product(*[range(s) for s in shape]):
                vals[idx] = self._node_value(level, cell, idx)
            x0 = tuple(math.ldexp(c, -k) for k, c in zip(level, cell))
            delta = tuple(math.ldexp(1.0, -k) for k in level)
            poly = TensorPoly(self.degrees, x0, delta, vals)
            self._polys[key] = poly
        return poly

    # -- level operator -------------------------------------------------------

    def quasi_interp_deriv(
        self, level: Sequence[int], deriv: Sequence[int], x: Sequence[float]
    ) -> float:
        """Mixed derivative of the level operator at a point.

        Only the translates covering ``x`` contribute, at most
        ``prod (order_j + 1)`` of them; each contributes by the product rule
        over the splits of ``deriv`` between polynomial and spline factor.
        """
        level = tuple(int(k) for k in level)
        deriv = tuple(int(r) for r in deriv)
        for r, m in zip(deriv, self.order):
            if not 0 <= r <= m:
                raise ValueError(f"derivative order {deriv} not within spline order {self.order}")
        cell = _cell_of(level, x)
        total = 0.0
        for offset in product(*[range(-m, 1) for m in self.order]):
            shift = tuple(c + o for c, o in zip(cell, offset))
            anchor = tuple(max(s, 0) for s in shift)
            poly = self.local_interp(level, anchor)
            # u_j = 2**k_j x_j - shift_j lies in the translate's support.
            u = [math.ldexp(xj, k) - s for k, s, xj in zip(level, shift, x)]
            for split in product(*[range(r + 1) for r in deriv]):
                spline = 1.0
                for j in range(self.dim):
                    spline *= 2.0 ** (level[j] * split[j]) * bspline_derivative(
                        self.order[j], split[j], u[j]
                    )
                    if spline == 0.0:
                        break
                if spline == 0.0:
                    continue
                rest = tuple(r - s for r, s in zip(deriv, split))
                binom = math.prod(math.comb(r, s) for r, s in zip(deriv, split))
                total += binom * spline * poly.deriv_eval(rest, x)
        return total

    # -- surplus operator -----------------------------------------------------

    def surplus_deriv(
        self, level: Sequence[int], deriv: Sequence[int], x: Sequence[float]
    ) -> float:
        """Mixed derivative of the surplus (signed level difference) at a point."""
        level = tuple(int(k) for k in level)
        total = 0.0
        for mask in decrement_masks(level):
            sign = -1.0 if sum(mask) % 2 else 1.0
            lower = tuple(k - e for k, e in zip(level, mask))
            total += sign * self.quasi_interp_deriv(lower, deriv, x)
        return total

    def surplus_local_poly(
        self, level: Sequence[int], shift: Sequence[int]
    ) -> TensorPoly:
        """Polynomial factor multiplying one translate in the surplus expansion.

        The surplus equals ``sum_shift g[level, shift] * U[level, shift]``;
        ``U`` combines coarse-level interpolants through the two-scale
        refinement coefficients of the blending spline.  The admissible
        coarse cells per decremented axis are those whose doubled index
        lands within refinement range of ``shift``.
        """
        level = tuple(int(k) for k in level)
        shift = tuple(int(s) for s in shift)
        for m, k, s in zip(self.order, level, shift):
            if not -m <= s <= 2**k - 1:
                raise ValueError(f"shift {shift} not active at level {level}")
        coeff_tables = [
            [float(a) for a in refinement_coeffs(m)] for m in self.order
        ]
        terms: list[tuple[float, TensorPoly]] = []
        for mask in decrement_masks(level):
            sign = -1.0 if sum(mask) % 2 else 1.0
            lower = tuple(k - e for k, e in zip(level, mask))
            axis_choices: list[list[tuple[int, float]]] = []
            for j in range(self.dim):
                m, s = self.order[j], shift[j]
                if not mask[j]:
                    axis_choices.append([(s, 1.0)])
                    continue
                lo = max(-m, -(-(s - m - 1) // 2))  # ceil((s - m - 1)/2)
                hi = min(2 ** lower[j] - 1, s // 2)
                choices = [(c, coeff_tables[j][s - 2 * c]) for c in range(lo, hi + 1)]
                axis_choices.append(choices)
            for combo in product(*axis_choices):
                coarse = tuple(c for c, _ in combo)
                weight = sign * math.prod(w for _, w in combo)
                anchor = tuple(max(c, 0) for c in coarse)
                terms.append((weight, self.local_interp(lower, anchor)))
        # The signed combination is again a polynomial of the same coordinate
        # degree; re-read it at the nodes of the anchor cell of ``shift``.
        anchor = tuple(max(s, 0) for s in shift)
        x0 = tuple(math.ldexp(c, -k) for k, c in zip(level, anchor))
        delta = tuple(math.ldexp(1.0, -k) for k in level)
        shape = tuple(d + 1 for d in self.degrees)
        vals = np.zeros(shape)
        for idx in product(*[range(s) for s in shape]):
            pt = tuple(
                x0[j] + delta[j] * self._axis_nodes[j][idx[j]] for j in range(self.dim)
            )
            vals[idx] = sum(w * p.eval(pt) for w, p in terms)
        return TensorPoly(self.degrees, x0, delta, vals)

    def surplus_via_translates(
        self, level: Sequence[int], deriv: Sequence[int], x: Sequence[float]
    ) -> float:
        """Surplus derivative assembled from the per-translate polynomials.

        Independent route to `surplus_deriv`; the two must agree.
        """
        level = tuple(int(k) for k in level)
        deriv = tuple(int(r) for r in deriv)
        cell = _cell_of(level, x)
        total = 0.0
        for offset in product(*[range(-m, 1) for m in self.order]):
            shift = tuple(c + o for c, o in zip(cell, offset))
            upoly = self.surplus_local_poly(level, shift)
            u = [math.ldexp(xj, k) - s for k, s, xj in zip(level, shift, x)]
            for split in product(*[range(r + 1) for r in deriv]):
                spline = 1.0
                for j in range(self.dim):
                    spline *= 2.0 ** (level[j] * split[j]) * bspline_derivative(
                        self.order[j], split[j], u[j]
                    )
                if spline == 0.0:
                    continue
                rest = tuple(r - s for r, s in zip(deriv, split))
                binom = math.prod(math.comb(r, s) for r, s in zip(deriv, split))
                total += binom * spline * upoly.deriv_eval(rest, x)
        return total


# -- one-shot wrappers ---------------------------------------------------------


def local_interp(f, level, cell, degrees) -> TensorPoly:
    """Interpolate ``f`` on one dyadic cell by a tensor polynomial."""
    ev = DyadicEvaluator(degrees, (0,) * len(tuple(degrees)), f=f)
    return ev.local_interp(level, cell)


def quasi_interp_eval(f, level, degrees, order, deriv, x) -> float:
    """Mixed derivative of the level operator of ``f`` at ``x``."""
    ev = DyadicEvaluator(degrees, order, f=f)
    return ev.quasi_interp_deriv(level, deriv, x)


def surplus_eval(f, level, degrees, order, deriv, x) -> float:
    """Mixed derivative of the surplus operator of ``f`` at ``x``."""
    ev = DyadicEvaluator(degrees, order, f=f)
    return ev.surplus_deriv(level, deriv, x)


def surplus_local_poly(f, level, shift, degrees, order) -> TensorPoly:
    """Per-translate polynomial factor of the surplus expansion."""
    ev = DyadicEvaluator(degrees, order, f=f)
    return ev.surplus_local_poly(level, shift)
