"""Assembling and measuring the recovery operator.

`sample` evaluates the target function once per deduplicated plan point.
`reconstruct` builds the linear approximant

    x  ->  sum over plan levels of  D^deriv (surplus at level k) (x),

which, regrouped over the downward-closed level set, is a short weighted sum
of level operators (the classic combination trick): the weight of level k is
``sum over masks e of (-1)**|e| [k + e in set]`` and vanishes for all levels
away from the upper boundary of the set.  Evaluation is vectorized over
points; per level each point sees only the spline translates covering its
cell, and every local polynomial is built once from the sample values, keyed
by exact point identity.

`lq_error` measures distances with composite tensor Gauss-Legendre quadrature
on a dyadic cell partition (finite q) or on a dense interior lattice united
with the quadrature nodes (q = infinity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .bspline import bspline_deriv_many
from .grid import RecoveryPlan, _node_numerators, _packed_key
from .interp import _monomial_matrix

Array = np.ndarray
PointFn = Callable[[Array], Array]


# -- sampling ----------------------------------------------------------------------


@dataclass(frozen=True)
class SampleSet:
    """Function values keyed by the exact identity of the plan points."""

    values: dict[tuple[int, ...], float]

    def __len__(self) -> int:
        return len(self.values)

    @staticmethod
    def from_array(plan: RecoveryPlan, values: Sequence[float]) -> "SampleSet":
        if len(values) != plan.n_actual:
            raise ValueError("value vector length does not match the plan")
        return SampleSet(dict(zip(plan.keys, (float(v) for v in values))))


def sample(f: PointFn, plan: RecoveryPlan) -> SampleSet:
    """Evaluate ``f`` once per deduplicated plan point.

    ``f`` receives a single (n, d) array, so an instrumented callable sees
    exactly ``plan.n_actual`` rows.  Non-finite values abort with the
    offending point.
    """
    pts = np.array([p.floats() for p in plan.points])
    vals = np.asarray(f(pts), dtype=float).reshape(-1)
    if vals.shape[0] != plan.n_actual:
        raise ValueError("sampled value count does not match the plan")
    bad = np.nonzero(~np.isfinite(vals))[0]
    if bad.size:
        raise ValueError(f"function evaluation failed at {plan.points[bad[0]].floats()}")
    return SampleSet(dict(zip(plan.keys, vals.tolist())))


# -- combination weights -------------------------------------------------------------


def combination_weights(levels: Sequence[tuple[int, ...]]) -> dict[tuple[int, ...], int]:
    """Per-level weights that turn a sum of surpluses into a sum of level operators.

    Only levels near the upper boundary of the (downward-closed) set survive.
    """
    lset = set(levels)
    d = len(next(iter(lset)))
    out: dict[tuple[int, ...], int] = {}
    for lvl in lset:
        w = 0
        for mask in product((0, 1), repeat=d):
            if tuple(k + e for k, e in zip(lvl, mask)) in lset:
                w += (-1) ** sum(mask)
        if w:
            out[lvl] = w
    return out


# -- the approximant -----------------------------------------------------------------


def _polyval_nd(coeffs: Array, pts: Array) -> Array:
    """Evaluate a small monomial coefficient tensor at (n, d) local points."""
    d = pts.shape[1]
    letters = "abcdefgh"[:d]
    pows = [
        pts[:, j][:, None] ** np.arange(coeffs.shape[j])[None, :] for j in range(d)
    ]
    spec = letters + "," + ",".join("z" + c for c in letters) + "->z"
    return np.einsum(spec, coeffs, *pows)


def _diff_coeffs(coeffs: Array, deriv: Sequence[int]) -> Array | None:
    """Coefficient tensor of a mixed derivative; None when it vanishes."""
    c = coeffs
    for axis, r in enumerate(deriv):
        if r == 0:
            continue
        n = c.shape[axis]
        if r >= n:
            return None
        sl = [slice(None)] * c.ndim
        sl[axis] = slice(r, None)
        fac = np.array([math.perm(j, r) for j in range(r, n)], dtype=float)
        shape = [1] * c.ndim
        shape[axis] = n - r
        c = c[tuple(sl)] * fac.reshape(shape)
    return c


class Approximant:
    """The reconstructed derivative, evaluable anywhere in the cube.

    Linear in the samples by construction.  Per-point evaluation cost is
    proportional to the number of surviving combination levels times the
    covering-translate count, independent of the total sample count.

    Evaluation is deterministic and effectively read-only: per-cell
    polynomial coefficients are derived lazily from the immutable sample
    values, so concurrent evaluation can at worst duplicate a derivation,
    never change a result.
    """

    def __init__(self, samples: SampleSet, plan: RecoveryPlan, deriv: Sequence[int]):
        params = plan.params
        deriv = tuple(int(r) for r in deriv)
        if len(deriv) != params.d or any(r < 0 for r in deriv):
            raise ValueError(f"bad derivative index {deriv}")
        if any(r > dg for r, dg in zip(deriv, params.degrees)):
            raise ValueError(
                f"derivative {deriv} exceeds interpolation degrees {params.degrees}"
            )
        if set(samples.values.keys()) != set(plan.keys):
            raise ValueError("sample set does not match the plan's points")
        self.plan = plan
        self.deriv = deriv
        self.order = deriv  # smallest admissible blending order per axis
        self.degrees = params.degrees
        self._samples = samples.values
        self._node_nums = [_node_numerators(dg) for dg in self.degrees]
        self._mono = [_monomial_matrix(dg) for dg in self.degrees]
        self._weights = combination_weights(plan.levels)
        self._coeffs: dict[tuple[tuple[int, ...], tuple[int, ...]], Array] = {}
        self._splits = list(product(*[range(r + 1) for r in deriv]))
        self._offsets = list(product(*[range(-m, 1) for m in self.order]))

    # ---- local polynomial coefficients, from exact-keyed samples

    def _cell_coeffs(self, level: tuple[int, ...], cell: tuple[int, ...]) -> Array:
        key = (level, cell)
        c = self._coeffs.get(key)
        if c is None:
            shape = tuple(dg + 1 for dg in self.degrees)
            vals = np.empty(shape)
            for idx in product(*[range(s) for s in shape]):
                k = _packed_key(level, cell, idx, self._node_nums)
                vals[idx] = self._samples[k]
            c = vals
            for axis, M in enumerate(self._mono):
                c = np.moveaxis(np.tensordot(M, c, axes=([1], [axis])), 0, axis)
            self._coeffs[key] = c
        return c

    # ---- evaluation

    def __call__(self, x) -> Array:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        if pts.shape[1] != self.plan.params.d:
            raise ValueError("point dimension mismatch")
        out = np.zeros(len(pts))
        for level in sorted(self._weights):
            out += self._weights[level] * self._level_deriv(level, pts)
        return out

    def eval_at(self, x: Sequence[float]) -> float:
        return float(self(np.asarray(x, dtype=float)[None, :])[0])

    def _level_deriv(self, level: tuple[int, ...], pts: Array) -> Array:
        d = len(level)
        two = np.array([float(1 << k) for k in level])
        top = np.array([(1 << k) - 1 for k in level], dtype=np.int64)
        scaled = pts * two
        cells = np.minimum(np.floor(scaled).astype(np.int64), top)
        cells = np.maximum(cells, 0)
        local = scaled - cells  # in [0, 1) except at the right edge
        lead = 2.0 ** sum(k * r for k, r in zip(level, self.deriv))
        out = np.zeros(len(pts))
        dims = tuple(t + 1 for t in top)
        for offset in self._offsets:
            anchors = np.maximum(cells + np.array(offset, dtype=np.int64), 0)
            flat = np.ravel_multi_index(tuple(anchors[:, j] for j in range(d)), dims)
            order_ix = np.argsort(flat, kind="stable")
            sflat = flat[order_ix]
            bounds = np.flatnonzero(np.r_[True, sflat[1:] != sflat[:-1], True])
            # Spline factors depend only on local - offset, not on the group.
            spline_per_split = []
            for split in self._splits:
                fac = np.ones(len(pts))
                for j in range(d):
                    fac *= bspline_deriv_many(
                        self.order[j], split[j], local[:, j] - offset[j]
                    )
                spline_per_split.append(fac)
            for b0, b1 in zip(bounds[:-1], bounds[1:]):
                rows = order_ix[b0:b1]
                anchor = tuple(int(a) for a in anchors[rows[0]])
                coeffs = self._cell_coeffs(level, anchor)
                t = scaled[rows] - np.array(anchor, dtype=float)
                acc = np.zeros(len(rows))
                for split, spline in zip(self._splits, spline_per_split):
                    rest = tuple(r - s for r, s in zip(self.deriv, split))
                    dc = _diff_coeffs(coeffs, rest)
                    if dc is None:
                        continue
                    binom = math.prod(
                        math.comb(r, s) for r, s in zip(self.deriv, split)
                    )
                    acc += binom * _polyval_nd(dc, t) * spline[rows]
                out[rows] += lead * acc
        return out


def reconstruct(samples: SampleSet, plan: RecoveryPlan, deriv: Sequence[int]) -> Approximant:
    """Build the linear approximant of ``D^deriv f`` from plan samples."""
    return Approximant(samples, plan, deriv)


# -- error measurement ----------------------------------------------------------------


@dataclass(frozen=True)
class Quadrature:
    """Composite tensor Gauss-Legendre rule on a dyadic cell partition.

    ``cells_log2`` dyadic splits per axis (default scales down with the
    dimension), ``points_per_cell`` Gauss points per axis per cell, and
    ``sup_points`` lattice points per axis for sup-norm estimation.
    """

    d: int
    cells_log2: int | None = None
    points_per_cell: int = 4
    sup_points: int | None = None

    def resolved_cells_log2(self) -> int:
        if self.cells_log2 is not None:
            return self.cells_log2
        return math.ceil(12 / self.d)

    def resolved_sup_points(self) -> int:
        if self.sup_points is not None:
            return self.sup_points
        return 2**10 + 1 if self.d <= 2 else 2**6 + 1


@lru_cache(maxsize=8)
def _axis_rule(cells_log2: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    gx, gw = np.polynomial.legendre.leggauss(k)
    width = 0.5**cells_log2
    starts = np.arange(2**cells_log2) * width
    nodes = (starts[:, None] + (gx[None, :] + 1.0) * (width / 2.0)).ravel()
    weights = np.tile(gw * (width / 2.0), 2**cells_log2)
    return nodes, weights


def _tensor_rule(quad: Quadrature) -> tuple[Array, Array]:
    nodes, weights = _axis_rule(quad.resolved_cells_log2(), quad.points_per_cell)
    grids = np.meshgrid(*([nodes] * quad.d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*([weights] * quad.d), indexing="ij")
    w = np.ones(len(pts))
    for g in wgrids:
        w *= g.ravel()
    return pts, w


def lq_error(g: PointFn, h: PointFn, q: float, quad: Quadrature) -> float:
    """L_q distance of two point-evaluable functions over the unit cube.

    Finite q: composite Gauss-Legendre.  q = infinity: maximum of |g - h|
    over an interior midpoint lattice united with the quadrature nodes.
    """
    if q < 1:
        raise ValueError("q must lie in [1, inf]")
    pts, w = _tensor_rule(quad)
    diff = np.abs(np.asarray(g(pts), dtype=float) - np.asarray(h(pts), dtype=float))
    if math.isinf(q):
        n = quad.resolved_sup_points()
        axis = (np.arange(n) + 0.5) / n
        grids = np.meshgrid(*([axis] * quad.d), indexing="ij")
        lattice = np.stack([gr.ravel() for gr in grids], axis=-1)
        dense = np.abs(
            np.asarray(g(lattice), dtype=float) - np.asarray(h(lattice), dtype=float)
        )
        return float(max(diff.max(initial=0.0), dense.max(initial=0.0)))
    return float(np.sum(w * diff**q) ** (1.0 / q))
