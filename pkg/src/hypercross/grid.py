"""Anisotropic dyadic level sets, sample-point enumeration, and budgeting.

The recovery construction samples at the tensor interpolation nodes of every
cell of every level ``k`` with ``(k, weights) <= radius``.  Coordinates are
dyadic rationals by construction (node times ``2**-level`` plus a dyadic
shift), so point identity across levels is decided in exact integer
arithmetic and deduplication needs no epsilons.

Smoothness bookkeeping turns the class parameters into the quantities the
construction needs: the per-axis effective exponents, their minimum (the
expected convergence rate), its multiplicity, and the level weights that
shape the anisotropic cross.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence, TextIO

import numpy as np

from .interp import NODE_BITS, nodes_exact

_TIE_REL = 1e-9
# Levels beyond this make per-axis cell counts (and exact numerators) too
# large for the vectorized int64 counting path; plans of that size would be
# far outside enumerable range anyway.
MAX_RADIUS = 22


# -- exact dyadic coordinates ----------------------------------------------------


@dataclass(frozen=True, slots=True)
class DyadicRational:
    """Exact value ``num / 2**bits`` with ``num`` odd unless ``bits == 0``."""

    num: int
    bits: int

    @staticmethod
    def make(num: int, bits: int) -> "DyadicRational":
        if bits < 0:
            num <<= -bits
            bits = 0
        while bits > 0 and num % 2 == 0:
            num //= 2
            bits -= 1
        return DyadicRational(num, bits)

    def as_float(self) -> float:
        return math.ldexp(self.num, -self.bits)

    def as_fraction(self) -> Fraction:
        return Fraction(self.num, 1 << self.bits)

    def __str__(self) -> str:
        return f"{self.num}/{1 << self.bits}"


@lru_cache(maxsize=None)
def _node_numerators(deg: int) -> tuple[int, ...]:
    # Node values have denominators dividing 2**NODE_BITS, so this is exact.
    return tuple((v.numerator << NODE_BITS) // v.denominator for v in nodes_exact(deg))


def exact_node_point(
    level: Sequence[int], cell: Sequence[int], idx: Sequence[int], degrees: Sequence[int]
) -> tuple[DyadicRational, ...]:
    """Exact coordinates of interpolation node ``idx`` of cell ``cell`` at ``level``."""
    out = []
    for k, c, i, d in zip(level, cell, idx, degrees):
        num = (c << NODE_BITS) + _node_numerators(d)[i]
        out.append(DyadicRational.make(num, k + NODE_BITS))
    return tuple(out)


def _packed_key(level: Sequence[int], cell: Sequence[int], idx: Sequence[int],
                node_nums: Sequence[Sequence[int]]) -> tuple[int, ...]:
    # One int per axis: the normalized (numerator, bits) pair packed together.
    key = []
    for k, c, i, nums in zip(level, cell, idx, node_nums):
        num = (c << NODE_BITS) + nums[i]
        bits = k + NODE_BITS
        shift = (num & -num).bit_length() - 1 if num else bits
        shift = min(shift, bits)
        key.append(((num >> shift) << 7) | (bits - shift))
    return tuple(key)


# -- smoothness bookkeeping ------------------------------------------------------


@dataclass(frozen=True)
class SmoothnessParams:
    """Class parameters plus everything derived from them.

    ``orders`` is the componentwise smallest integer strictly above ``alpha``
    (the mixed-difference order of the class); local interpolation uses
    degree ``orders - 1`` per axis.  ``eff`` are the effective per-axis
    exponents ``alpha - deriv - (1/p - 1/q)_+``; their minimum ``rate`` is
    the expected main decay exponent, attained on ``min_axes`` with
    multiplicity ``rate_mult``.  ``weights`` shape the level set: 1 on the
    binding axes, the geometric midpoint of the admissible interval
    ``(1, eff_j / rate)`` elsewhere.
    """

    d: int
    alpha: tuple[float, ...]
    p: float
    q: float
    theta: float
    deriv: tuple[int, ...]
    orders: tuple[int, ...]
    degrees: tuple[int, ...]
    eff: tuple[float, ...]
    rate: float
    rate_mult: int
    min_axes: tuple[int, ...]
    weights: tuple[float, ...]


def derive_params(
    d: int,
    alpha: Sequence[float],
    p: float,
    q: float,
    theta: float,
    deriv: Sequence[int],
) -> SmoothnessParams:
    """Validate class parameters and derive the recovery bookkeeping.

    Raises ValueError naming the failing axis when the integrability
    condition ``alpha_j > 1/p`` or the positivity condition
    ``alpha_j - deriv_j - (1/p - 1/q)_+ > 0`` is violated.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    alpha = tuple(float(a) for a in alpha)
    deriv = tuple(int(r) for r in deriv)
    if len(alpha) != d or len(deriv) != d:
        raise ValueError("alpha and deriv must have length d")
    if any(a <= 0 for a in alpha):
        raise ValueError("alpha must be positive")
    if any(r < 0 for r in deriv):
        raise ValueError("derivative orders must be nonnegative")
    if not 1 <= p < math.inf:
        raise ValueError("p must lie in [1, inf)")
    if not 1 <= q:
        raise ValueError("q must lie in [1, inf]")
    if not 1 <= theta:
        raise ValueError("theta must lie in [1, inf]")
    for j, a in enumerate(alpha):
        if a - 1.0 / p <= 0:
            raise ValueError(f"axis {j}: alpha={a} fails alpha - 1/p > 0 (p={p})")
    gap = max(1.0 / p - (0.0 if math.isinf(q) else 1.0 / q), 0.0)
    eff = tuple(a - r - gap for a, r in zip(alpha, deriv))
    for j, g in enumerate(eff):
        if g <= 0:
            raise ValueError(
                f"axis {j}: effective exponent {g} <= 0 "
                f"(alpha={alpha[j]}, deriv={deriv[j]}, shift={gap})"
            )
    rate = min(eff)
    min_axes = tuple(j for j, g in enumerate(eff) if g - rate <= _TIE_REL * max(rate, 1.0))
    weights = tuple(
        1.0 if j in min_axes else math.sqrt(eff[j] / rate) for j in range(d)
    )
    orders = tuple(math.floor(a) + 1 for a in alpha)
    return SmoothnessParams(
        d=d,
        alpha=alpha,
        p=float(p),
        q=float(q),
        theta=float(theta),
        deriv=deriv,
        orders=orders,
        degrees=tuple(o - 1 for o in orders),
        eff=eff,
        rate=rate,
        rate_mult=len(min_axes),
        min_axes=min_axes,
        weights=weights,
    )


# -- level sets and weighted sums --------------------------------------------------


def index_set(weights: Sequence[float], radius: float) -> list[tuple[int, ...]]:
    """All nonnegative integer vectors with ``sum(weights * k) <= radius``, sorted.

    Enumerated depth-first with budget pruning; weights must be >= 1 so the
    set is finite with per-axis range bounded by the radius.
    """
    weights = tuple(float(w) for w in weights)
    if any(w < 1.0 for w in weights):
        raise ValueError("level weights must be >= 1")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    d = len(weights)
    out: list[tuple[int, ...]] = []

    def rec(axis: int, prefix: tuple[int, ...], budget: float) -> None:
        if axis == d - 1:
            top = math.floor(budget / weights[axis] + 1e-12)
            out.extend(prefix + (k,) for k in range(top + 1))
            return
        top = math.floor(budget / weights[axis] + 1e-12)
        for k in range(top + 1):
            rec(axis + 1, prefix + (k,), budget - k * weights[axis])

    rec(0, (), float(radius))
    out.sort()
    return out


def weighted_sum(exponents: Sequence[float], weights: Sequence[float], radius: float) -> float:
    """``sum over the level set of 2**(k, exponents)`` (growth-law diagnostic)."""
    return math.fsum(
        2.0 ** sum(k * a for k, a in zip(lvl, exponents))
        for lvl in index_set(weights, radius)
    )


def tail_sum(exponents: Sequence[float], weights: Sequence[float], radius: float) -> float:
    """``sum over levels outside the set of 2**-(k, exponents)``.

    Computed as the closed-form total over all levels (a product of geometric
    series) minus the finite head, so there is no truncation error.
    """
    exponents = tuple(float(a) for a in exponents)
    if any(a <= 0 for a in exponents):
        raise ValueError("tail exponents must be positive")
    total = math.prod(1.0 / (1.0 - 2.0**-a) for a in exponents)
    head = math.fsum(
        2.0 ** -sum(k * a for k, a in zip(lvl, exponents))
        for lvl in index_set(weights, radius)
    )
    return total - head


# -- plans -------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanPoint:
    """One deduplicated sample point with the (level, cell, node) that first hit it."""

    point: tuple[DyadicRational, ...]
    level: tuple[int, ...]
    cell: tuple[int, ...]
    node_idx: tuple[int, ...]

    def floats(self) -> tuple[float, ...]:
        return tuple(c.as_float() for c in self.point)


@dataclass(frozen=True)
class RecoveryPlan:
    """Deduplicated sample layout for one radius.

    ``levels`` is the sorted level set, ``points`` the deduplicated sample
    points in deterministic enumeration order, and ``keys`` their packed
    exact identities (aligned with ``points``): the key of a node is shared
    by every (level, cell, node index) that produces the same coordinates.
    """

    params: SmoothnessParams
    radius: int
    levels: tuple[tuple[int, ...], ...]
    points: tuple[PlanPoint, ...]
    keys: tuple[tuple[int, ...], ...]

    @property
    def n_actual(self) -> int:
        return len(self.points)

    def key_of(self, level, cell, idx) -> tuple[int, ...]:
        node_nums = [_node_numerators(d) for d in self.params.degrees]
        return _packed_key(level, cell, idx, node_nums)


def _check_radius(radius: int) -> int:
    radius = int(radius)
    if radius < 1:
        raise ValueError("radius must be a positive integer")
    if radius > MAX_RADIUS:
        raise ValueError(f"radius {radius} exceeds supported maximum {MAX_RADIUS}")
    return radius


def build_plan(params: SmoothnessParams, radius: int) -> RecoveryPlan:
    """Enumerate and deduplicate all sample points for the given radius."""
    radius = _check_radius(radius)
    levels = index_set(params.weights, radius)
    _guard_raw_size(params, levels)
    node_nums = [_node_numerators(d) for d in params.degrees]
    seen: dict[tuple[int, ...], PlanPoint] = {}
    idx_ranges = [range(d + 1) for d in params.degrees]
    for lvl in levels:
        for cell in product(*[range(1 << k) for k in lvl]):
            for idx in product(*idx_ranges):
                key = _packed_key(lvl, cell, idx, node_nums)
                if key not in seen:
                    seen[key] = PlanPoint(
                        point=exact_node_point(lvl, cell, idx, params.degrees),
                        level=lvl,
                        cell=cell,
                        node_idx=idx,
                    )
    return RecoveryPlan(
        params=params,
        radius=radius,
        levels=tuple(levels),
        points=tuple(seen.values()),
        keys=tuple(seen.keys()),
    )


def _first_radius(level: tuple[int, ...], weights: Sequence[float]) -> int:
    """Smallest integer radius whose level set contains ``level``."""
    w = sum(k * b for k, b in zip(level, weights))
    return max(1, math.ceil(w - 1e-12))


_MAX_RAW_POINTS = 50_000_000


def _guard_raw_size(params: SmoothnessParams, levels: Sequence[tuple[int, ...]]) -> None:
    raw = sum(
        math.prod((dg + 1) << k for k, dg in zip(lvl, params.degrees))
        for lvl in levels
    )
    if raw > _MAX_RAW_POINTS:
        raise ValueError(
            f"level set produces {raw} raw points, beyond the enumerable limit"
        )


@lru_cache(maxsize=64)
def _axis_key_columns(level_j: int, deg: int) -> tuple[np.ndarray, np.ndarray]:
    """Normalized (numerator, bits) columns for every (cell, node) pair of one axis."""
    nums = np.array(_node_numerators(deg), dtype=np.int64)
    cells = np.arange(1 << level_j, dtype=np.int64)
    num = ((cells[:, None] << NODE_BITS) + nums[None, :]).ravel()
    low = num & -num
    # exact for powers of two below 2**53; levels are capped well under that
    tz = np.log2(low.astype(np.float64)).astype(np.int64)
    return num >> tz, (level_j + NODE_BITS) - tz


def _level_key_array(params: SmoothnessParams, level: tuple[int, ...]) -> np.ndarray:
    """Exact point identities of one level as an (n, 2d) int64 array."""
    axcols = [_axis_key_columns(k, dg) for k, dg in zip(level, params.degrees)]
    nums = np.meshgrid(*[c[0] for c in axcols], indexing="ij")
    bits = np.meshgrid(*[c[1] for c in axcols], indexing="ij")
    return np.stack(
        [g.ravel() for pair in zip(nums, bits) for g in pair], axis=-1
    )


def count_profile(params: SmoothnessParams, r_max: int) -> list[int]:
    """Deduplicated point counts for radii 1..r_max from one global sort.

    Every raw (level, cell, node) triple is tagged with the first radius
    whose level set produces it; after one lexicographic sort by exact point
    identity (radius as tie-breaker), the first row of each identity group
    carries the radius at which that point enters the plan.
    """
    r_max = _check_radius(r_max)
    levels = index_set(params.weights, r_max)
    _guard_raw_size(params, levels)
    blocks = []
    radii = []
    for lvl in levels:
        arr = _level_key_array(params, lvl)
        blocks.append(arr)
        radii.append(
            np.full(len(arr), _first_radius(lvl, params.weights), dtype=np.int64)
        )
    keys = np.concatenate(blocks)
    rad = np.concatenate(radii)
    order = np.lexsort((rad, *(keys[:, c] for c in range(keys.shape[1]))))
    keys = keys[order]
    rad = rad[order]
    starts = np.r_[True, np.any(keys[1:] != keys[:-1], axis=1)]
    per_radius = np.bincount(rad[starts], minlength=r_max + 1)
    return np.cumsum(per_radius)[1:].tolist()


def choose_radius(params: SmoothnessParams, budget: int) -> int:
    """Largest radius whose deduplicated point count fits within ``budget``."""
    budget = int(budget)
    seen = np.empty((0, 2 * params.d), dtype=np.int64)
    best = 0
    for r in range(1, MAX_RADIUS + 1):
        new_levels = [
            lvl
            for lvl in index_set(params.weights, r)
            if _first_radius(lvl, params.weights) == r
        ]
        _guard_raw_size(params, new_levels)
        fresh = [_level_key_array(params, lvl) for lvl in new_levels]
        if fresh:
            seen = np.unique(np.concatenate([seen] + fresh), axis=0)
        if len(seen) > budget:
            if best == 0:
                raise ValueError(
                    f"budget {budget} is below the minimum plan size {len(seen)}"
                )
            return best
        best = r
    return best


def write_plan(plan: RecoveryPlan, stream: TextIO) -> None:
    """Serialize a plan, one point per line.

    Columns (tab-separated): level vector, cell vector, node-index vector,
    exact coordinates as ``numerator/2**bits`` fractions; vectors and
    coordinate lists are comma-joined.
    """
    for pt in plan.points:
        stream.write(
            "\t".join(
                (
                    ",".join(map(str, pt.level)),
                    ",".join(map(str, pt.cell)),
                    ",".join(map(str, pt.node_idx)),
                    ",".join(str(c) for c in pt.point),
                )
            )
            + "\n"
        )
