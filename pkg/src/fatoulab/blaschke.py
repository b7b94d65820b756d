"""Infinite Blaschke product with zeros accumulating at +-1.

The product is

    B(z) = z * prod_{n>=1} (a_n^2 - z^2) / (1 - a_n^2 z^2),
    a_n = (tau^n - 1) / (tau^n + 1) = tanh(n s / 2),   s = log tau > 1,

an inner function fixing 0 whose only boundary singularities are +-1.
The scale parameter tau is pinned to the attracting multiplier 2*alpha of the
companion maps exp(alpha*(z - 1/z)) and 2*alpha*sin(z) through the defining
equation

    B'(0) = prod_{n>=1} a_n^2 = 2*alpha,

which is forced by conjugacy invariance of fixed-point multipliers.  The left
side is strictly increasing in s with limits 0 and 1, so the solution is
unique for every alpha in (0, 1/2).

Truncation is certified: factor_n(z) - 1 = (a_n^2 - 1)(1 + z^2)/(1 - a_n^2 z^2)
and 1 - a_n^2 <= 4 tau^-n, so on the closed disk minus neighbourhoods of +-1
the factor deviations are geometrically summable and the partial product can
be driven below any target error with an explicit term count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import map_zoo
from .errors import FatouLabError, NoSignChange, OutOfRange, TooCloseToSingularity

TWO_PI = 2.0 * math.pi

# Hard ceiling on product terms; far beyond anything the default exclusion
# radius can demand.
N_CAP = 10_000

DEFAULT_EXCLUSION = 1e-3
DEFAULT_TARGET_ERR = 1e-9

# Absolute tail target used when solving for tau; keeps the truncated product
# indistinguishable from the full one at double precision.
_TAIL_TARGET = 1e-16


@dataclass(frozen=True)
class TauSolution:
    """Root of prod tanh^2(n s / 2) = 2 alpha."""

    alpha: float
    tau: float
    s: float
    residual: float
    product_terms_used: int


def _product_terms(s: float) -> int:
    # |2 log tanh(n s / 2)| ~ 4 exp(-n s); 42/s terms push the log-tail
    # below ~1e-17.  Capped for brackets probing very small s, where only the
    # sign of log P matters.
    return min(int(math.ceil(42.0 / s)) + 8, 60_000)


def log_multiplier_product(s: float, n_terms: int | None = None) -> float:
    """log prod_{n=1..N} tanh^2(n s / 2), evaluated as a sum of logs.

    Working in log space keeps small-s evaluations (where the raw product
    underflows to 0) exact enough for sign tests during bisection.
    """
    if s <= 0:
        raise OutOfRange(f"log_multiplier_product requires s > 0, got {s}")
    n = n_terms if n_terms is not None else _product_terms(s)
    k = np.arange(1, n + 1, dtype=np.float64)
    return float(2.0 * np.log(np.tanh(k * (s / 2.0))).sum())


def solve_tau(alpha: float, tol: float = 1e-12,
              bracket: tuple = (1e-6, 60.0)) -> TauSolution:
    """Solve for s = log tau with prod tanh^2(n s/2) = 2 alpha, by bisection.

    The equation's left side is strictly increasing in s with limits 0 and 1,
    so the root is unique; any bracket containing it gives the same answer.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 0.5:
        raise OutOfRange(f"solve_tau requires alpha in (0, 1/2), got {alpha}")
    if tol <= 0:
        raise OutOfRange(f"solve_tau requires tol > 0, got {tol}")
    target = math.log(2.0 * alpha)

    def g(s):
        return log_multiplier_product(s) - target

    lo, hi = float(bracket[0]), float(bracket[1])
    try:
        s = map_zoo.bisect(g, lo, hi, tol=1e-15)
    except NoSignChange as exc:
        raise NoSignChange(
            f"bracket {bracket} does not contain the root for alpha={alpha}"
        ) from exc
    n_terms = _product_terms(s)
    residual = abs(math.exp(log_multiplier_product(s, n_terms)) - 2.0 * alpha)
    if residual > tol:
        raise OutOfRange(
            f"bisection residual {residual:.3g} exceeds requested tol {tol:.3g}"
        )
    return TauSolution(alpha=alpha, tau=math.exp(s), s=s,
                       residual=residual, product_terms_used=n_terms)


def _saturation_horizon(s: float) -> int:
    """Largest n with tanh(n s / 2) < 1 in double precision.

    Beyond it the factors are numerically indistinguishable from 1 (the tail
    bound at the horizon is ~1e-14 even at the default exclusion radius), so
    nothing representable is lost by stopping there.
    """
    n = max(1, int(math.floor(38.0 / s)) + 2)
    while n > 1 and math.tanh(n * s / 2.0) >= 1.0:
        n -= 1
    while math.tanh((n + 1) * s / 2.0) < 1.0:
        n += 1
    return n


@dataclass(frozen=True)
class BlaschkeProduct:
    """Zero data of the product, with enough terms cached for routine use.

    ``zeros`` holds a_n = tanh(n s / 2) for n = 1..truncation_N; evaluation
    may compute further zeros on the fly without mutating the instance.
    ``tail_bound_constant`` is C with sum_{n>N} (1 - a_n^2) <= C * tau^-N.
    """

    alpha: float
    tau: float
    s: float
    truncation_N: int
    tail_bound_constant: float
    zeros: np.ndarray

    @classmethod
    def from_tau(cls, ts: TauSolution, n_terms: int | None = None) -> "BlaschkeProduct":
        n = n_terms if n_terms is not None else max(ts.product_terms_used, 64)
        n = min(n, N_CAP, _saturation_horizon(ts.s))
        zeros = np.tanh(np.arange(1, n + 1) * (ts.s / 2.0))
        return cls(alpha=ts.alpha, tau=ts.tau, s=ts.s, truncation_N=n,
                   tail_bound_constant=4.0 / (ts.tau - 1.0), zeros=zeros)

    @classmethod
    def from_alpha(cls, alpha: float, tol: float = 1e-12) -> "BlaschkeProduct":
        return cls.from_tau(solve_tau(alpha, tol=tol))

    def zeros_upto(self, n: int) -> np.ndarray:
        """First min(n, saturation horizon) zeros; saturated terms would be
        exactly 1 in double precision and are never produced."""
        n = min(n, _saturation_horizon(self.s))
        if n <= self.truncation_N:
            return self.zeros[:n]
        return np.tanh(np.arange(1, n + 1) * (self.s / 2.0))


def _chordal_gap(z):
    """min(|z - 1|, |z + 1|), elementwise."""
    z = np.asarray(z, dtype=np.complex128)
    return np.minimum(np.abs(z - 1.0), np.abs(z + 1.0))


def required_terms(B: BlaschkeProduct, z, target_err: float = DEFAULT_TARGET_ERR,
                   exclusion: float = DEFAULT_EXCLUSION):
    """Product terms needed to bound the truncation error below target_err at z.

    Scalar z gives an int; an array gives an int array.  Raises
    TooCloseToSingularity if z violates the exclusion radius around +-1 or if
    the certified count would exceed the term cap.
    """
    if target_err <= 0:
        raise OutOfRange(f"target_err must be > 0, got {target_err}")
    z_arr = np.asarray(z, dtype=np.complex128)
    gap = _chordal_gap(z_arr)
    if np.any(gap <= exclusion):
        raise TooCloseToSingularity(
            f"evaluation within {exclusion:.3g} of a singularity at +-1",
            min_usable_radius=exclusion,
        )
    w = np.abs(1.0 - z_arr * z_arr)
    u = np.maximum(np.abs(1.0 + z_arr * z_arr), 1e-300)
    log_tau = B.s
    # past n0 the factor denominators are bounded below by w/2
    n0 = np.ceil(np.log(8.0 / w) / log_tau)
    geom = np.ceil(
        np.log(16.0 * u / (w * (1.0 - 1.0 / B.tau) * target_err)) / log_tau
    )
    n = np.maximum(np.maximum(n0, geom), 1.0)
    if np.any(n > N_CAP):
        raise TooCloseToSingularity(
            f"term cap {N_CAP} cannot certify target_err={target_err:.3g} here",
            min_usable_radius=exclusion,
        )
    # past the saturation horizon the remaining factors are exactly 1 in
    # double precision; check the bound still certifies the target there
    horizon = _saturation_horizon(B.s)
    clipped = n > horizon
    if np.any(clipped):
        tail = (16.0 * u / (w * (1.0 - 1.0 / B.tau))) * B.tau ** -(horizon + 1.0)
        if np.any(tail[clipped] > target_err):
            raise TooCloseToSingularity(
                f"double precision cannot certify target_err={target_err:.3g} "
                "this close to the singularities",
                min_usable_radius=exclusion,
            )
        n = np.minimum(n, horizon)
    n = n.astype(np.int64)
    return n if z_arr.ndim else int(n)


def eval_blaschke(B: BlaschkeProduct, z, target_err: float = 1e-12,
                  exclusion: float = DEFAULT_EXCLUSION):
    """Partial product with certified truncation error below target_err.

    Accepts a scalar or an array of points with |z| <= 1.  The factors tend
    to 1 geometrically, so the partial product is accumulated directly; a log
    sum would be ill-defined at the zeros +-a_n and gains nothing here.
    """
    z_arr = np.asarray(z, dtype=np.complex128)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    if np.any(np.abs(z_arr) > 1.0 + 1e-12):
        raise OutOfRange("eval_blaschke requires |z| <= 1")
    n = int(np.max(required_terms(B, z_arr, target_err, exclusion)))
    a = B.zeros_upto(n)
    z2 = z_arr * z_arr
    out = z_arr.copy()
    for an in a:
        a2 = an * an
        out *= (a2 - z2) / (1.0 - a2 * z2)
    return complex(out[0]) if scalar else out


def derivative_at_zero(B: BlaschkeProduct) -> float:
    """B'(0) = prod a_n^2, accumulated in log space with a certified tail.

    Equals 2*alpha up to the tau-solve residual plus the product tail, both
    far below 1e-10.
    """
    n = int(math.ceil(math.log(B.tail_bound_constant / 1e-14) / B.s)) + 1
    a = B.zeros_upto(max(n, B.truncation_N))
    return float(math.exp(2.0 * np.log(a).sum()))


def circle_eval(B: BlaschkeProduct, theta: float,
                target_err: float = DEFAULT_TARGET_ERR,
                exclusion: float = DEFAULT_EXCLUSION) -> float:
    """Boundary map angle: arg B(e^(i theta)), reduced to [0, 2*pi).

    theta must keep e^(i theta) outside the exclusion radius around +-1.
    The result's modulus is checked against 1 before the argument is taken.
    """
    return float(circle_eval_many(B, np.asarray([theta]), target_err, exclusion)[0])


def circle_eval_many(B: BlaschkeProduct, thetas,
                     target_err: float = DEFAULT_TARGET_ERR,
                     exclusion: float = DEFAULT_EXCLUSION) -> np.ndarray:
    """Vectorized circle_eval over an array of angles."""
    th = np.asarray(thetas, dtype=np.float64)
    z = np.exp(1j * th)
    vals = eval_blaschke(B, z, target_err, exclusion)
    moduli = np.abs(vals)
    worst = float(np.max(np.abs(moduli - 1.0))) if vals.size else 0.0
    if worst > max(target_err, 1e-13):
        raise FatouLabError(
            f"boundary modulus check failed: | |B| - 1 | = {worst:.3g}"
        )
    return np.angle(vals) % TWO_PI
