"""Tensor-product Lagrange interpolation on axis-aligned boxes.

Per axis the nodes are Chebyshev-Gauss points mapped to (0, 1) and then
snapped once to dyadic rationals with denominator ``2**NODE_BITS``.  The snap
is what makes sample-point identity across dyadic cells decidable in exact
arithmetic (see `hypercross.grid`); at 2**-40 it is far below every tolerance
used anywhere else.

Interpolants are stored by their node values.  Plain evaluation uses the
second barycentric form (exact at the nodes by construction); derivative
evaluation converts to local monomial coefficients through an exactly
inverted Vandermonde matrix, cached per degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterator, Mapping, Sequence

import numpy as np

MAX_DEGREE = 12
NODE_BITS = 40


def _check_degree(deg: int) -> None:
    if not isinstance(deg, (int, np.integer)) or deg < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {deg!r}")
    if deg > MAX_DEGREE:
        raise ValueError(f"degree {deg} exceeds supported maximum {MAX_DEGREE}")


@lru_cache(maxsize=None)
def nodes_exact(deg: int) -> tuple[Fraction, ...]:
    """deg+1 strictly increasing dyadic rationals in the open unit interval."""
    _check_degree(deg)
    out = []
    scale = 1 << NODE_BITS
    for i in range(deg + 1):
        v = (1.0 - math.cos((2 * i + 1) * math.pi / (2 * deg + 2))) / 2.0
        out.append(Fraction(round(v * scale), scale))
    assert all(0 < v < 1 for v in out)
    assert all(a < b for a, b in zip(out, out[1:]))
    return tuple(out)


def nodes(deg: int) -> tuple[float, ...]:
    """Interpolation nodes for one axis as floats (exact images of `nodes_exact`)."""
    return tuple(float(v) for v in nodes_exact(deg))


@lru_cache(maxsize=None)
def _node_array(deg: int) -> np.ndarray:
    return np.array(nodes(deg))


@lru_cache(maxsize=None)
def _bary_weights(deg: int) -> np.ndarray:
    """Barycentric weights 1/prod(x_i - x_j), computed exactly then floated."""
    xs = nodes_exact(deg)
    ws = []
    for i, xi in enumerate(xs):
        p = Fraction(1)
        for j, xj in enumerate(xs):
            if j != i:
                p *= xi - xj
        ws.append(1 / p)
    return np.array([float(w) for w in ws])


@lru_cache(maxsize=None)
def _monomial_matrix(deg: int) -> np.ndarray:
    """Matrix M with M @ values = ascending monomial coefficients.

    M is the exact rational inverse of the Vandermonde matrix of the nodes,
    so polynomial reproduction is limited only by the final float rounding.
    """
    xs = nodes_exact(deg)
    n = deg + 1
    # Gauss-Jordan over Fractions on [V | I].
    aug = [[xs[i] ** j for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    inv_rows = [row[n:] for row in aug]
    return np.array([[float(v) for v in row] for row in inv_rows])


def lagrange_basis_eval(deg: int, index: int, x: float) -> float:
    """Value at x of the Lagrange basis polynomial that is 1 at node ``index``.

    Kronecker values at the nodes are exact (node hits are detected before
    dividing); elsewhere the second barycentric form is used.
    """
    _check_degree(deg)
    if not 0 <= index <= deg:
        raise ValueError(f"basis index {index} not in [0, {deg}]")
    xs = _node_array(deg)
    diff = x - xs
    hit = np.nonzero(diff == 0.0)[0]
    if hit.size:
        return 1.0 if hit[0] == index else 0.0
    w = _bary_weights(deg)
    terms = w / diff
    return float(terms[index] / terms.sum())


def _basis_values(deg: int, u: float) -> np.ndarray:
    """All deg+1 Lagrange basis values at u (barycentric, node-hit safe)."""
    xs = _node_array(deg)
    diff = u - xs
    hit = np.nonzero(diff == 0.0)[0]
    if hit.size:
        out = np.zeros(deg + 1)
        out[hit[0]] = 1.0
        return out
    terms = _bary_weights(deg) / diff
    return terms / terms.sum()


def _basis_deriv_values(deg: int, r: int, u: float) -> np.ndarray:
    """r-th derivatives of all basis polynomials at u, via monomial form."""
    if r == 0:
        return _basis_values(deg, u)
    if r > deg:
        return np.zeros(deg + 1)
    M = _monomial_matrix(deg)  # rows: powers, cols: basis index
    acc = np.zeros(deg + 1)
    # Horner in u over rows r..deg with falling-factorial weights.
    for j in range(deg, r - 1, -1):
        acc = acc * u + M[j] * math.perm(j, r)
    return acc


@dataclass(frozen=True)
class TensorPoly:
    """Tensor-product polynomial stored by its values at the box nodes.

    ``values[i1, ..., id]`` is the value at the node with per-axis indices
    ``i``; the node grid lives on the box ``x0 + delta * [0,1]^d``.  The
    object is immutable; the monomial coefficient tensor (local coordinates
    ``u = (x - x0)/delta``) is derived lazily and cached.
    """

    degrees: tuple[int, ...]
    x0: tuple[float, ...]
    delta: tuple[float, ...]
    values: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.values.shape != tuple(d + 1 for d in self.degrees):
            raise ValueError("values shape does not match degrees")
        if any(d <= 0 for d in self.delta):
            raise ValueError("box widths must be positive")
        self.values.setflags(write=False)

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def coeffs(self) -> np.ndarray:
        """Monomial coefficient tensor in local coordinates, ascending powers."""
        c = self._cache.get("coeffs")
        if c is None:
            c = self.values
            for axis, deg in enumerate(self.degrees):
                c = np.moveaxis(
                    np.tensordot(_monomial_matrix(deg), c, axes=([1], [axis])), 0, axis
                )
            self._cache["coeffs"] = c
        return c

    def eval(self, x: Sequence[float]) -> float:
        return self.deriv_eval((0,) * self.dim, x)

    def deriv_eval(self, deriv: Sequence[int], x: Sequence[float]) -> float:
        """Mixed derivative of the polynomial at a point (zero past the degree)."""
        if len(deriv) != self.dim or len(x) != self.dim:
            raise ValueError("dimension mismatch")
        if any(r < 0 for r in deriv):
            raise ValueError("derivative orders must be nonnegative")
        if any(r > d for r, d in zip(deriv, self.degrees)):
            return 0.0
        axis_vecs = []
        for deg, x0, dl, r, xj in zip(self.degrees, self.x0, self.delta, deriv, x):
            u = (xj - x0) / dl
            vec = _basis_deriv_values(deg, r, u)
            if r:
                vec = vec / dl**r
            axis_vecs.append(vec)
        acc = self.values
        for vec in axis_vecs:
            acc = np.tensordot(vec, acc, axes=([0], [0]))
        return float(acc)


def tensor_nodes(
    degrees: Sequence[int], x0: Sequence[float], delta: Sequence[float]
) -> Iterator[tuple[tuple[int, ...], tuple[float, ...]]]:
    """Yield (index, point) for the full tensor node grid of a box."""
    axis_nodes = [nodes(d) for d in degrees]
    for idx in product(*[range(d + 1) for d in degrees]):
        pt = tuple(
            x0j + dj * axis_nodes[j][idx[j]]
            for j, (x0j, dj) in enumerate(zip(x0, delta))
        )
        yield idx, pt


def tensor_interpolate(
    values: Mapping[tuple[int, ...], float],
    box: tuple[Sequence[float], Sequence[float]],
) -> TensorPoly:
    """Interpolate prescribed node values on a box.

    ``values`` must contain exactly one entry per index of the tensor grid;
    the per-axis degree is inferred from the largest index seen.
    """
    if not values:
        raise ValueError("empty value map")
    dim = len(next(iter(values)))
    degrees = tuple(max(idx[j] for idx in values) for j in range(dim))
    expected = math.prod(d + 1 for d in degrees)
    if len(values) != expected:
        raise ValueError(f"expected {expected} node values, got {len(values)}")
    arr = np.empty(tuple(d + 1 for d in degrees))
    for idx in product(*[range(d + 1) for d in degrees]):
        if idx not in values:
            raise ValueError(f"missing value for node index {idx}")
        arr[idx] = values[idx]
    x0, delta = box
    return TensorPoly(degrees, tuple(float(v) for v in x0), tuple(float(v) for v in delta), arr)


def poly_deriv_eval(poly: TensorPoly, deriv: Sequence[int], x: Sequence[float]) -> float:
    """Module-level alias for `TensorPoly.deriv_eval`."""
    return poly.deriv_eval(deriv, x)
