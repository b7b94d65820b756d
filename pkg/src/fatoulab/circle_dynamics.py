"""Iteration and ergodic statistics of boundary maps on the unit circle.

Covers rotations, power maps theta -> d*theta, Mobius boundary maps,
boundary restrictions of Blaschke products (finite ones and the infinite
product of :mod:`fatoulab.blaschke`), and non-autonomous compositions.

Measure-theoretic notions (exactness, ergodicity) are not computable from
finite data; this module provides the standard observable proxies instead:
star discrepancy of orbits, arc-spreading under forward iteration, invariance
of Lebesgue measure through a Kolmogorov-Smirnov statistic, and the
divergence of sum_n (1 - |g_n'(0)|) for composition sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import blaschke as _bl
from . import map_zoo
from .errors import (
    EmptyInput,
    OriginNotFixed,
    OutOfRange,
    SingularityApproach,
    UnsupportedMap,
)
from .rng import uniform01

TWO_PI = 2.0 * math.pi

ROTATION = "rotation"
POWER = "power"
MOBIUS_BOUNDARY = "mobius_boundary"
BLASCHKE_BOUNDARY = "blaschke_boundary"
FINITE_BLASCHKE_BOUNDARY = "finite_blaschke_boundary"

DEFAULT_GRID = 2 ** 14 + 1
DEFAULT_CELLS = 2 ** 14  # reference-grid resolution for cover measurement


@dataclass(frozen=True)
class CircleMap:
    """One boundary map of the unit circle.

    ``payload`` is kind-specific: the rotation angle, the power degree, the
    Mobius coefficient tuple, a BlaschkeProduct (plus evaluation settings),
    or a finite Blaschke MapSpec.
    """

    kind: str
    payload: tuple

    def __repr__(self):  # payloads can be bulky (zero arrays)
        return f"CircleMap({self.kind})"


def rotation_map(theta: float) -> CircleMap:
    return CircleMap(ROTATION, (float(theta) % TWO_PI,))


def power_circle_map(d: int) -> CircleMap:
    d = int(d)
    if d < 1:
        raise OutOfRange(f"power map needs d >= 1, got {d}")
    return CircleMap(POWER, (d,))


def mobius_boundary_map(a, b, c, d) -> CircleMap:
    """Boundary restriction of a Mobius disk automorphism."""
    spec = map_zoo.mobius(a, b, c, d)
    for probe in (1.0, 1j, -1.0, np.exp(0.7j)):
        val = map_zoo.evaluate(spec, probe).to_complex()
        if abs(abs(val) - 1.0) > 1e-9:
            raise OutOfRange("Mobius coefficients do not preserve the unit circle")
    return CircleMap(MOBIUS_BOUNDARY, spec.params)


def blaschke_boundary_map(product: _bl.BlaschkeProduct,
                          target_err: float = _bl.DEFAULT_TARGET_ERR,
                          exclusion: float = _bl.DEFAULT_EXCLUSION) -> CircleMap:
    return CircleMap(BLASCHKE_BOUNDARY, (product, float(target_err), float(exclusion)))


def finite_blaschke_boundary_map(zeros, rotation_factor=1.0) -> CircleMap:
    spec = map_zoo.finite_blaschke(zeros, rotation_factor)
    return CircleMap(FINITE_BLASCHKE_BOUNDARY, spec.params)


def fixes_origin(cmap: CircleMap) -> bool:
    """Whether the disk extension of the boundary map fixes 0."""
    k = cmap.kind
    if k in (ROTATION, POWER, BLASCHKE_BOUNDARY):
        return True
    if k == MOBIUS_BOUNDARY:
        return cmap.payload[1] == 0
    if k == FINITE_BLASCHKE_BOUNDARY:
        zeros, _rot = cmap.payload
        return any(z == 0 for z in zeros)
    raise UnsupportedMap(f"unknown circle map kind {k!r}")


def derivative_at_zero_modulus(cmap: CircleMap) -> float:
    """|g'(0)| of the disk extension, for maps fixing the origin."""
    if not fixes_origin(cmap):
        raise OriginNotFixed(f"{cmap.kind} map does not fix the disk origin")
    k = cmap.kind
    if k == ROTATION:
        return 1.0
    if k == POWER:
        return 1.0 if cmap.payload[0] == 1 else 0.0
    if k == MOBIUS_BOUNDARY:
        a, _b, _c, d = cmap.payload
        return abs(a / d)
    if k == BLASCHKE_BOUNDARY:
        return _bl.derivative_at_zero(cmap.payload[0])
    if k == FINITE_BLASCHKE_BOUNDARY:
        zeros, _rot = cmap.payload
        rest = list(zeros)
        rest.remove(0)  # one zero at the origin is the fixed point itself
        out = 1.0
        for z in rest:
            out *= abs(z)
        return out
    raise UnsupportedMap(f"unknown circle map kind {k!r}")


def _blaschke_gap(thetas, exclusion):
    th = np.asarray(thetas, dtype=np.float64)
    gap = np.minimum(2.0 * np.abs(np.sin(th / 2.0)),
                     2.0 * np.abs(np.cos(th / 2.0)))
    return gap <= exclusion


def apply_map(cmap: CircleMap, thetas):
    """One application of the boundary map; angles reduced mod 2*pi.

    Scalar in, scalar out; array in, array out.
    """
    th = np.asarray(thetas, dtype=np.float64)
    scalar = th.ndim == 0
    th = np.atleast_1d(th) % TWO_PI
    k = cmap.kind
    if k == ROTATION:
        out = np.fmod(th + cmap.payload[0], TWO_PI)
    elif k == POWER:
        # d*theta is exact for d = 2 and fmod is exact, so doubling orbits
        # agree bit-for-bit with fmod(2^n theta, 2 pi)
        out = np.fmod(cmap.payload[0] * th, TWO_PI)
    elif k == MOBIUS_BOUNDARY:
        a, b, c, d = cmap.payload
        z = np.exp(1j * th)
        out = np.angle((a * z + b) / (c * z + d)) % TWO_PI
    elif k == BLASCHKE_BOUNDARY:
        product, target_err, exclusion = cmap.payload
        if np.any(_blaschke_gap(th, exclusion)):
            raise SingularityApproach(
                f"orbit entered the exclusion zone (radius {exclusion:.3g}) "
                "around the boundary singularities at +-1"
            )
        out = _bl.circle_eval_many(product, th, target_err, exclusion)
    elif k == FINITE_BLASCHKE_BOUNDARY:
        zeros, rot = cmap.payload
        z = np.exp(1j * th)
        val = np.full(z.shape, rot, dtype=np.complex128)
        for a in zeros:
            val *= (z - a) / (1.0 - np.conj(a) * z)
        out = np.angle(val) % TWO_PI
    else:
        raise UnsupportedMap(f"unknown circle map kind {k!r}")
    return float(out[0]) if scalar else out


def iterate(cmap: CircleMap, theta0: float, n: int) -> np.ndarray:
    """Orbit [g(theta0), g^2(theta0), ..., g^n(theta0)]."""
    if n < 1:
        raise OutOfRange(f"iterate requires n >= 1, got {n}")
    out = np.empty(n, dtype=np.float64)
    th = float(theta0)
    for i in range(n):
        th = apply_map(cmap, th)
        out[i] = th
    return out


def compose_sequence(maps: Sequence[CircleMap], theta0: float) -> np.ndarray:
    """Non-autonomous orbit G_n(theta0) = g_n(...g_1(g_0(theta0)))."""
    if not maps:
        raise EmptyInput("compose_sequence needs at least one map")
    out = np.empty(len(maps), dtype=np.float64)
    th = float(theta0)
    for i, g in enumerate(maps):
        th = apply_map(g, th)
        out[i] = th
    return out


def pommerenke_sum(maps: Sequence[CircleMap]) -> float:
    """sum over the list of (1 - |g'(0)|); all maps must fix the origin."""
    if not maps:
        raise EmptyInput("pommerenke_sum needs at least one map")
    return float(sum(1.0 - derivative_at_zero_modulus(g) for g in maps))


# ---------------------------------------------------------------------------
# Equidistribution statistics


def discrepancy(samples) -> float:
    """Star discrepancy of circle samples against normalized arc length.

    Exact sorted-sample formula on x_i = theta_i / (2 pi):
    D* = max_i max(i/N - x_(i), x_(i) - (i-1)/N).
    """
    th = np.asarray(samples, dtype=np.float64)
    if th.size == 0:
        raise EmptyInput("discrepancy of an empty sample is undefined")
    x = np.sort(th % TWO_PI) / TWO_PI
    n = x.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - x), np.max(x - (i - 1) / n)))


def ks_statistic(samples) -> float:
    """Kolmogorov-Smirnov distance of circle samples from the uniform law."""
    return discrepancy(samples)


def ks_critical(n: int, level: float = 0.01) -> float:
    """Asymptotic KS critical value; hard-coded coefficients, no SciPy."""
    coeff = {0.01: 1.63, 0.05: 1.36}.get(level)
    if coeff is None:
        raise OutOfRange(f"only levels 0.01 and 0.05 are tabulated, got {level}")
    return coeff / math.sqrt(n)


def invariance_test(cmap: CircleMap, n_samples: int, seed: int) -> float:
    """KS distance between uniform and the one-step image of uniform samples.

    For maps whose disk extension fixes 0 and preserves Lebesgue measure the
    statistic sits at the 1/sqrt(n) noise floor.  Samples are drawn from
    per-index counter streams; Blaschke boundary maps redraw the few samples
    falling inside the exclusion zones (total mass ~ exclusion/pi, far below
    the statistic's resolution).
    """
    if not fixes_origin(cmap):
        raise OriginNotFixed(f"{cmap.kind} map does not fix the disk origin")
    if n_samples < 1:
        raise OutOfRange(f"n_samples must be >= 1, got {n_samples}")
    streams = np.arange(n_samples, dtype=np.uint64)
    th = TWO_PI * uniform01(seed, streams, 0)
    if cmap.kind == BLASCHKE_BOUNDARY:
        exclusion = cmap.payload[2]
        for attempt in range(1, 64):
            bad = _blaschke_gap(th, exclusion * (1.0 + 1e-9))
            if not bad.any():
                break
            th[bad] = TWO_PI * uniform01(seed, streams[bad], attempt)
        else:
            raise SingularityApproach("rejection sampling failed to clear the zones")
    return ks_statistic(apply_map(cmap, th))


def birkhoff_average(cmap: CircleMap, theta0: float, n: int,
                     observable=np.cos) -> float:
    """Time average (1/n) sum_{k<n} observable(g^k(theta0))."""
    if n < 1:
        raise OutOfRange(f"birkhoff_average requires n >= 1, got {n}")
    th = float(theta0)
    acc = float(observable(th))
    for _ in range(n - 1):
        th = apply_map(cmap, th)
        acc += float(observable(th))
    return acc / n


# ---------------------------------------------------------------------------
# Arc spreading


@dataclass(frozen=True)
class SpreadReport:
    """Forward-image coverage of an initial arc, one entry per iterate.

    ``covered_fraction[k]`` is the fraction of the reference grid covered by
    the k-th forward image (index 0 is the initial arc).  ``first_full_cover``
    is the first iterate whose image covers every reference cell, if any.
    """

    initial_arc: tuple
    iterations: int
    covered_fraction: tuple
    first_full_cover: Optional[int]


def _covered_cell_count(thetas: np.ndarray, n_cells: int) -> int:
    """Cells of the uniform reference grid met by the polyline through thetas.

    Consecutive sample images are joined along the shorter circle arc, which
    is the correct continuation as long as adjacent images stay within half a
    turn of each other; the sample grid is chosen dense enough for that.
    """
    t = thetas % TWO_PI
    lo = np.minimum(t[:-1], t[1:])
    hi = np.maximum(t[:-1], t[1:])
    wrap = (hi - lo) > math.pi
    lo2 = np.where(wrap, hi, lo)
    hi2 = np.where(wrap, lo + TWO_PI, hi)
    cl = np.floor(lo2 / TWO_PI * n_cells).astype(np.int64)
    ch = np.floor(hi2 / TWO_PI * n_cells).astype(np.int64)
    cl = np.minimum(cl, n_cells - 1)
    diff = np.zeros(n_cells + 1, dtype=np.int64)
    np.add.at(diff, cl, 1)
    np.add.at(diff, np.minimum(ch + 1, n_cells), -1)
    over = ch + 1 > n_cells  # ranges wrapping past the cell array
    if over.any():
        diff[0] += int(over.sum())
        np.add.at(diff, np.minimum(ch[over] + 1 - n_cells, n_cells), -1)
    return int((np.cumsum(diff[:-1]) > 0).sum())


def arc_spread(maps: Union[CircleMap, Sequence[CircleMap]], arc: tuple,
               n_max: int, grid: int = DEFAULT_GRID,
               n_cells: int = DEFAULT_CELLS) -> SpreadReport:
    """Push a dense arc sample forward and measure reference-grid coverage.

    ``maps`` is a single map (autonomous iteration) or a sequence applied in
    order.  Stops early at the first full cover.
    """
    start, length = float(arc[0]), float(arc[1])
    if length <= 0:
        raise OutOfRange(f"arc length must be > 0, got {length}")
    if grid < 2 ** 10:
        raise OutOfRange(f"grid must be >= 2^10, got {grid}")
    if n_max < 1:
        raise OutOfRange(f"n_max must be >= 1, got {n_max}")
    single = isinstance(maps, CircleMap)
    seq = None if single else list(maps)
    limit = n_max if single else min(n_max, len(seq))

    th = start + np.arange(grid) * (length / (grid - 1))
    fractions = [_covered_cell_count(th, n_cells) / n_cells]
    first_full = None
    iterations = 0
    for k in range(1, limit + 1):
        g = maps if single else seq[k - 1]
        th = apply_map(g, th)
        frac = _covered_cell_count(th, n_cells) / n_cells
        fractions.append(frac)
        iterations = k
        if frac >= 1.0:
            first_full = k
            break
    return SpreadReport(
        initial_arc=(start, length),
        iterations=iterations,
        covered_fraction=tuple(fractions),
        first_full_cover=first_full,
    )
