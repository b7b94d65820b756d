"""Catalogue of the concrete holomorphic maps used across the package.

Provides complex evaluation, closed-form derivatives, orbits, critical data,
and a deterministic scalar bisection root-finder.  The star of the zoo is the
punctured-plane map

    f(z) = exp(alpha * (z - 1/z)),    alpha in (0, 1/2),

whose unit circle is invariant and which is semiconjugate to
F(z) = 2*alpha*sin(z) through z -> exp(i z).  Both share the fixed-point
multiplier 2*alpha (at 1 and at 0 respectively).

All operations here are pure functions of their arguments; nothing in this
module draws random numbers or mutates shared state.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ExponentOverflow,
    NoSignChange,
    OutOfRange,
    SingularityHit,
    UnsupportedMap,
)

# Exponential-type maps reject exponents beyond this real part instead of
# silently producing inf/0; near the double overflow threshold exp(709.78).
EXP_CAP = 700.0


@dataclass(frozen=True)
class ComplexPoint:
    """A point of the extended plane: finite coordinates or a flagged infinity."""

    re: float
    im: float
    at_infinity: bool = False

    def __post_init__(self):
        if not self.at_infinity:
            if not (math.isfinite(self.re) and math.isfinite(self.im)):
                raise OutOfRange("finite ComplexPoint requires finite coordinates")

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexPoint":
        return cls(float(z.real), float(z.imag))

    @classmethod
    def infinity(cls) -> "ComplexPoint":
        return cls(math.inf, 0.0, True)

    def to_complex(self) -> complex:
        if self.at_infinity:
            raise OutOfRange("the point at infinity has no finite complex value")
        return complex(self.re, self.im)

    def __complex__(self) -> complex:
        return self.to_complex()


INFINITY = ComplexPoint.infinity()

# Map kinds, with their JSON names.
EXP_BAKER = "exp_baker"
SINE_MODEL = "sine_model"
POWER = "power"
ROTATION = "rotation"
MOBIUS = "mobius"
FINITE_BLASCHKE = "finite_blaschke"
KEEN = "keen"
MCMULLEN = "mcmullen"

# Self-maps of the punctured plane; for these both 0 and infinity are escape
# ends and essential singularities.
_CSTAR_KINDS = frozenset({EXP_BAKER, KEEN})
# Kinds allowed to produce or consume the point at infinity.
_PROJECTIVE_KINDS = frozenset({POWER, MCMULLEN})


@dataclass(frozen=True)
class MapSpec:
    """Tagged description of one map: kind, parameters, singularities,
    and any known fixed points with their multipliers."""

    kind: str
    params: tuple  # kind-specific parameter tuple, see factory functions
    singularities: tuple = ()
    fixed_points_known: tuple = ()  # ((ComplexPoint, multiplier), ...)

    def to_json(self) -> str:
        return json.dumps(spec_to_dict(self), sort_keys=True)


def exp_baker(alpha: float) -> MapSpec:
    """f(z) = exp(alpha*(z - 1/z)) on the punctured plane, alpha in (0, 1/2)."""
    alpha = float(alpha)
    if not 0.0 < alpha < 0.5:
        raise OutOfRange(f"exp_baker requires alpha in (0, 1/2), got {alpha}")
    return MapSpec(
        EXP_BAKER,
        (alpha,),
        singularities=(ComplexPoint(0.0, 0.0), INFINITY),
        fixed_points_known=((ComplexPoint(1.0, 0.0), complex(2.0 * alpha)),),
    )


def sine_model(alpha: float) -> MapSpec:
    """F(z) = 2*alpha*sin(z), alpha in (0, 1/2)."""
    alpha = float(alpha)
    if not 0.0 < alpha < 0.5:
        raise OutOfRange(f"sine_model requires alpha in (0, 1/2), got {alpha}")
    return MapSpec(
        SINE_MODEL,
        (alpha,),
        singularities=(INFINITY,),
        fixed_points_known=((ComplexPoint(0.0, 0.0), complex(2.0 * alpha)),),
    )


def power_map(d: int) -> MapSpec:
    """z -> z**d for integer d >= 1."""
    d = int(d)
    if d < 1:
        raise OutOfRange(f"power_map requires d >= 1, got {d}")
    return MapSpec(POWER, (d,))


def rotation(theta: float) -> MapSpec:
    """z -> exp(i*theta) * z."""
    return MapSpec(ROTATION, (float(theta),))


def mobius(a: complex, b: complex, c: complex, d: complex) -> MapSpec:
    """z -> (a z + b) / (c z + d) with ad - bc != 0."""
    a, b, c, d = complex(a), complex(b), complex(c), complex(d)
    if a * d - b * c == 0:
        raise OutOfRange("mobius requires ad - bc != 0")
    return MapSpec(MOBIUS, (a, b, c, d))


def identity_mobius() -> MapSpec:
    return mobius(1.0, 0.0, 0.0, 1.0)


def finite_blaschke(zeros: Sequence[complex], rotation_factor: complex = 1.0) -> MapSpec:
    """Finite Blaschke product rot * prod (z - a_k)/(1 - conj(a_k) z)."""
    zs = tuple(complex(z) for z in zeros)
    for z in zs:
        if abs(z) >= 1.0:
            raise OutOfRange(f"finite_blaschke zeros must have modulus < 1, got {z}")
    rot = complex(rotation_factor)
    if abs(abs(rot) - 1.0) > 1e-12:
        raise OutOfRange(f"finite_blaschke rotation factor must be unimodular, got {rot}")
    return MapSpec(FINITE_BLASCHKE, (zs, rot))


def keen(alpha: float, lam: float) -> MapSpec:
    """f(z) = z * exp(alpha*(z + 1/z) + lambda) on the punctured plane."""
    return MapSpec(
        KEEN,
        (float(alpha), float(lam)),
        singularities=(ComplexPoint(0.0, 0.0), INFINITY),
    )


def mcmullen(m: int, l: int, c: complex) -> MapSpec:
    """f(z) = z**m + c / z**l, integers m, l >= 1, c != 0."""
    m, l = int(m), int(l)
    if m < 1 or l < 1:
        raise OutOfRange(f"mcmullen requires m, l >= 1, got {m}, {l}")
    c = complex(c)
    if c == 0:
        raise OutOfRange("mcmullen requires c != 0")
    return MapSpec(MCMULLEN, (m, l, c))


# ---------------------------------------------------------------------------
# JSON serialization


def spec_to_dict(spec: MapSpec) -> dict:
    k = spec.kind
    if k == EXP_BAKER:
        params = {"alpha": spec.params[0]}
    elif k == SINE_MODEL:
        params = {"alpha": spec.params[0]}
    elif k == POWER:
        params = {"d": spec.params[0]}
    elif k == ROTATION:
        params = {"theta": spec.params[0]}
    elif k == MOBIUS:
        a, b, c, d = spec.params
        params = {"a": _cpair(a), "b": _cpair(b), "c": _cpair(c), "d": _cpair(d)}
    elif k == FINITE_BLASCHKE:
        zs, rot = spec.params
        params = {"zeros": [_cpair(z) for z in zs], "rotation": _cpair(rot)}
    elif k == KEEN:
        params = {"alpha": spec.params[0], "lambda": spec.params[1]}
    elif k == MCMULLEN:
        m, l, c = spec.params
        params = {"m": m, "l": l, "c": _cpair(c)}
    else:
        raise UnsupportedMap(f"unknown map kind {k!r}")
    return {"kind": k, "params": params}


def spec_from_dict(obj: dict) -> MapSpec:
    kind = obj["kind"]
    p = obj.get("params", {})
    if kind == EXP_BAKER:
        return exp_baker(p["alpha"])
    if kind == SINE_MODEL:
        return sine_model(p["alpha"])
    if kind == POWER:
        return power_map(p["d"])
    if kind == ROTATION:
        return rotation(p["theta"])
    if kind == MOBIUS:
        return mobius(_cval(p["a"]), _cval(p["b"]), _cval(p["c"]), _cval(p["d"]))
    if kind == FINITE_BLASCHKE:
        return finite_blaschke([_cval(z) for z in p["zeros"]],
                               _cval(p.get("rotation", [1.0, 0.0])))
    if kind == KEEN:
        return keen(p["alpha"], p["lambda"])
    if kind == MCMULLEN:
        return mcmullen(p["m"], p["l"], _cval(p["c"]))
    raise UnsupportedMap(f"unknown map kind {kind!r}")


def spec_from_json(text: str) -> MapSpec:
    return spec_from_dict(json.loads(text))


def _cpair(z: complex):
    return [z.real, z.imag]


def _cval(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(v[0], v[1])


# ---------------------------------------------------------------------------
# Evaluation


def _coerce(z) -> ComplexPoint:
    if isinstance(z, ComplexPoint):
        return z
    return ComplexPoint.from_complex(complex(z))


def _check_singularities(spec: MapSpec, p: ComplexPoint):
    for i, s in enumerate(spec.singularities):
        if s.at_infinity:
            if p.at_infinity:
                raise SingularityHit(f"{spec.kind}: evaluation at infinity", index=i)
        elif not p.at_infinity:
            if p.re == s.re and p.im == s.im:
                raise SingularityHit(
                    f"{spec.kind}: evaluation at singularity {complex(s.re, s.im)}",
                    index=i,
                )


def _guard_exponent(w: complex, what: str) -> complex:
    if w.real > EXP_CAP:
        raise ExponentOverflow(f"{what}: exponent real part {w.real:.3g} above cap", +1)
    if w.real < -EXP_CAP:
        raise ExponentOverflow(f"{what}: exponent real part {w.real:.3g} below cap", -1)
    return cmath.exp(w)


def evaluate(spec: MapSpec, z) -> ComplexPoint:
    """Apply the map at z.  z may be complex or ComplexPoint.

    Raises SingularityHit on listed essential singularities and
    ExponentOverflow when an exponential-type map leaves the safe exponent
    range.  Only the projective kinds (power, mcmullen) produce or consume
    the point at infinity.
    """
    p = _coerce(z)
    _check_singularities(spec, p)
    k = spec.kind

    if p.at_infinity:
        if k in _PROJECTIVE_KINDS:
            return INFINITY  # both kinds fix infinity for the allowed exponents
        raise UnsupportedMap(f"{k}: evaluation at infinity is not defined")

    v = p.to_complex()
    if k == EXP_BAKER:
        (alpha,) = spec.params
        w = alpha * v - alpha / v
        return ComplexPoint.from_complex(_guard_exponent(w, k))
    if k == SINE_MODEL:
        (alpha,) = spec.params
        if abs(v.imag) > EXP_CAP:
            raise ExponentOverflow(f"{k}: |Im z| = {abs(v.imag):.3g} above cap", +1)
        return ComplexPoint.from_complex(2.0 * alpha * cmath.sin(v))
    if k == POWER:
        (d,) = spec.params
        try:
            return ComplexPoint.from_complex(v ** d)
        except OverflowError:
            return INFINITY
    if k == ROTATION:
        (theta,) = spec.params
        return ComplexPoint.from_complex(cmath.exp(1j * theta) * v)
    if k == MOBIUS:
        a, b, c, d = spec.params
        return ComplexPoint.from_complex((a * v + b) / (c * v + d))
    if k == FINITE_BLASCHKE:
        zs, rot = spec.params
        out = rot
        for a in zs:
            out *= (v - a) / (1.0 - a.conjugate() * v)
        return ComplexPoint.from_complex(out)
    if k == KEEN:
        alpha, lam = spec.params
        w = alpha * (v + 1.0 / v) + lam
        val = _guard_exponent(w, k)
        return ComplexPoint.from_complex(v * val)
    if k == MCMULLEN:
        m, l, c = spec.params
        if v == 0:
            return INFINITY  # pole of order l
        try:
            return ComplexPoint.from_complex(v ** m + c / v ** l)
        except OverflowError:
            return INFINITY
    raise UnsupportedMap(f"unknown map kind {k!r}")


def derivative(spec: MapSpec, z) -> ComplexPoint:
    """Analytic derivative at a finite point, in closed form."""
    p = _coerce(z)
    _check_singularities(spec, p)
    if p.at_infinity:
        raise UnsupportedMap(f"{spec.kind}: derivative at infinity is not defined")
    v = p.to_complex()
    k = spec.kind

    if k == EXP_BAKER:
        (alpha,) = spec.params
        f = evaluate(spec, p).to_complex()
        return ComplexPoint.from_complex(f * alpha * (1.0 + 1.0 / (v * v)))
    if k == SINE_MODEL:
        (alpha,) = spec.params
        if abs(v.imag) > EXP_CAP:
            raise ExponentOverflow(f"{k}: |Im z| above cap", +1)
        return ComplexPoint.from_complex(2.0 * alpha * cmath.cos(v))
    if k == POWER:
        (d,) = spec.params
        return ComplexPoint.from_complex(d * v ** (d - 1))
    if k == ROTATION:
        (theta,) = spec.params
        return ComplexPoint.from_complex(cmath.exp(1j * theta))
    if k == MOBIUS:
        a, b, c, d = spec.params
        den = c * v + d
        return ComplexPoint.from_complex((a * d - b * c) / (den * den))
    if k == FINITE_BLASCHKE:
        zs, rot = spec.params
        # product rule; each factor's derivative is (1-|a|^2)/(1-conj(a) z)^2
        facs = [(v - a) / (1.0 - a.conjugate() * v) for a in zs]
        dfacs = [
            (1.0 - abs(a) ** 2) / (1.0 - a.conjugate() * v) ** 2 for a in zs
        ]
        total = 0.0 + 0.0j
        for i in range(len(zs)):
            term = dfacs[i]
            for j in range(len(zs)):
                if j != i:
                    term *= facs[j]
            total += term
        return ComplexPoint.from_complex(rot * total)
    if k == KEEN:
        alpha, lam = spec.params
        w = alpha * (v + 1.0 / v) + lam
        e = _guard_exponent(w, k)
        return ComplexPoint.from_complex(e * (1.0 + alpha * v - alpha / v))
    if k == MCMULLEN:
        m, l, c = spec.params
        if v == 0:
            raise SingularityHit(f"{k}: derivative at the pole 0")
        return ComplexPoint.from_complex(m * v ** (m - 1) - l * c / v ** (l + 1))
    raise UnsupportedMap(f"unknown map kind {k!r}")


# ---------------------------------------------------------------------------
# Orbits

TERMINAL_COMPLETED = "completed"
TERMINAL_ESCAPED = "escaped"
TERMINAL_HIT_SINGULARITY = "hit_singularity"
TERMINAL_CONVERGED = "converged"

END_ZERO = "zero"
END_INFINITY = "infinity"


@dataclass(frozen=True)
class Orbit:
    """Iterate sequence with its terminal state.

    ``points[k+1]`` is always the map applied to ``points[k]``; the terminal
    describes why iteration stopped after the last stored point.
    """

    points: tuple
    terminal: str
    escape_end: Optional[str] = None
    escape_radius: Optional[float] = None
    singularity_index: Optional[int] = None
    target: Optional[ComplexPoint] = None
    tolerance: Optional[float] = None


def orbit(
    spec: MapSpec,
    z0,
    n_max: int,
    escape_radius: float,
    target: Optional[tuple] = None,
) -> Orbit:
    """Iterate the map from z0 for at most n_max steps.

    Stops on escape (|z| > escape_radius; for punctured-plane maps also
    |z| < 1/escape_radius, attributed to the zero end), on a singularity hit,
    or on convergence to ``target = (point, tol)``.  Exponent-cap overflows
    terminate as escapes toward the corresponding end, since the next value
    would exceed any escape radius.
    """
    if n_max < 1:
        raise OutOfRange(f"orbit requires n_max >= 1, got {n_max}")
    if escape_radius <= 0:
        raise OutOfRange(f"orbit requires escape_radius > 0, got {escape_radius}")

    tgt = None
    tol = None
    if target is not None:
        tgt = _coerce(target[0]).to_complex()
        tol = float(target[1])

    cstar = spec.kind in _CSTAR_KINDS
    pts = [_coerce(z0)]

    for _ in range(n_max):
        try:
            nxt = evaluate(spec, pts[-1])
        except SingularityHit as exc:
            return Orbit(tuple(pts), TERMINAL_HIT_SINGULARITY,
                         singularity_index=exc.index)
        except ExponentOverflow as exc:
            end = END_INFINITY if exc.sign > 0 else END_ZERO
            if not cstar:
                end = END_INFINITY
            return Orbit(tuple(pts), TERMINAL_ESCAPED, escape_end=end,
                         escape_radius=escape_radius)
        pts.append(nxt)
        if nxt.at_infinity:
            return Orbit(tuple(pts), TERMINAL_ESCAPED, escape_end=END_INFINITY,
                         escape_radius=escape_radius)
        v = nxt.to_complex()
        if tgt is not None and abs(v - tgt) <= tol:
            return Orbit(tuple(pts), TERMINAL_CONVERGED,
                         target=ComplexPoint.from_complex(tgt), tolerance=tol)
        if abs(v) > escape_radius:
            return Orbit(tuple(pts), TERMINAL_ESCAPED, escape_end=END_INFINITY,
                         escape_radius=escape_radius)
        if cstar and abs(v) < 1.0 / escape_radius:
            return Orbit(tuple(pts), TERMINAL_ESCAPED, escape_end=END_ZERO,
                         escape_radius=escape_radius)

    return Orbit(tuple(pts), TERMINAL_COMPLETED)


# ---------------------------------------------------------------------------
# Critical data


def critical_data(spec: MapSpec):
    """Critical points with their images, for kinds with closed-form data.

    For exp_baker the critical points are +-i and their images are
    exp(+-2 i alpha); for sine_model the points pi/2 + k pi are represented
    by the fundamental pair +-pi/2 with images +-2 alpha.
    """
    k = spec.kind
    if k == EXP_BAKER:
        (alpha,) = spec.params
        out = []
        for cp in (1j, -1j):
            out.append((ComplexPoint.from_complex(cp),
                        evaluate(spec, cp)))
        return out
    if k == SINE_MODEL:
        (alpha,) = spec.params
        return [
            (ComplexPoint(math.pi / 2, 0.0), ComplexPoint(2.0 * alpha, 0.0)),
            (ComplexPoint(-math.pi / 2, 0.0), ComplexPoint(-2.0 * alpha, 0.0)),
        ]
    if k == POWER:
        (d,) = spec.params
        if d < 2:
            return []
        return [
            (ComplexPoint(0.0, 0.0), ComplexPoint(0.0, 0.0)),
            (INFINITY, INFINITY),
        ]
    if k == FINITE_BLASCHKE:
        zs, rot = spec.params
        if len(zs) < 2:
            return []
        # Critical points are the finite roots of P'Q - PQ' where
        # B = rot * P/Q, P = prod(z - a), Q = prod(1 - conj(a) z).
        from numpy.polynomial import polynomial as npoly

        P = np.array([1.0 + 0.0j])
        Q = np.array([1.0 + 0.0j])
        for a in zs:
            P = npoly.polymul(P, np.array([-a, 1.0 + 0.0j]))
            Q = npoly.polymul(Q, np.array([1.0 + 0.0j, -a.conjugate()]))
        num = npoly.polysub(
            npoly.polymul(npoly.polyder(P), Q),
            npoly.polymul(P, npoly.polyder(Q)),
        )
        roots = npoly.polyroots(num)
        out = []
        for r in roots:
            pt = ComplexPoint.from_complex(complex(r))
            out.append((pt, evaluate(spec, pt)))
        return out
    if k == MCMULLEN:
        m, l, c = spec.params
        # f' = 0  <=>  z^(m+l) = l c / m, plus the projective points 0, inf.
        n = m + l
        base = (l * c / m) ** (1.0 / n)
        out = [(ComplexPoint(0.0, 0.0), INFINITY), (INFINITY, INFINITY)]
        for j in range(n):
            cp = base * cmath.exp(2j * math.pi * j / n)
            out.append((ComplexPoint.from_complex(cp), evaluate(spec, cp)))
        return out
    raise UnsupportedMap(f"critical_data is not available for kind {k!r}")


# ---------------------------------------------------------------------------
# Scalar root finding


def bisect(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Deterministic bisection on [a, b] down to bracket width <= tol.

    Requires a strict sign change: f(a) * f(b) < 0.
    """
    if not b > a:
        raise OutOfRange(f"bisect requires b > a, got [{a}, {b}]")
    if tol <= 0:
        raise OutOfRange(f"bisect requires tol > 0, got {tol}")
    fa, fb = f(a), f(b)
    if not (fa < 0 < fb or fb < 0 < fa):
        raise NoSignChange(f"f({a}) = {fa} and f({b}) = {fb} do not straddle 0")
    while (b - a) > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break  # bracket at floating-point resolution
        fm = f(m)
        if fm == 0.0:
            return m
        if (fa < 0) == (fm < 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    return 0.5 * (a + b)
