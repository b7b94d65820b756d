"""Harmonic-measure estimation by Walk-on-Spheres on closed-form domains.

A walk from the base point repeatedly jumps to a uniformly random point on
the largest boundary-avoiding circle centered at its current position.  The
jump chain converges to the boundary geometrically; the walk stops once the
distance drops below the epsilon shell and the exit is attributed to the
nearest boundary component and binned by arc.  The resulting histogram
estimates the harmonic measure of the domain seen from the base point.

Domains are described by distance oracles with stable integer component ids:

* ``annulus(r_in, r_out)``: component 0 is the outer circle, 1 the inner.
* ``champagne_disk(bubbles)``: the unit disk minus disjoint closed disks;
  component 0 is the unit circle, components 1..k the bubble circles.
* ``disk_minus_disk(center, radius)``: the one-bubble special case.

Randomness is a pure function of (seed, walk index, step index), so runs are
reproducible and independent of batching or worker count; walks may be
sharded with ``walk_offset`` and merged exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covering import ANNULUS as COVER_ANNULUS
from .covering import CoveringModel, cover_eval, pushforward_measure
from .errors import (
    BasePointOnBoundary,
    DomainMismatch,
    OutOfRange,
    StallRateExceeded,
    UnsupportedMap,
)
from .histograms import ArcHistogram, bin_angles, new_histograms, tv_distance
from .rng import derive_seed, uniform01

TWO_PI = 2.0 * math.pi

ANNULUS = "annulus"
CHAMPAGNE_DISK = "champagne_disk"
DISK_MINUS_DISK = "disk_minus_disk"

DEFAULT_STEP_CAP = 100_000
DEFAULT_N_BINS = 64
STALL_GATE = 1e-3


@dataclass(frozen=True)
class DomainOracle:
    """Closed-form domain with a distance oracle.

    ``bubbles`` is a tuple of (center, radius) pairs for the removed disks;
    empty for the annulus.
    """

    kind: str
    r_in: float
    r_out: float
    bubbles: tuple

    @property
    def n_components(self) -> int:
        if self.kind == ANNULUS:
            return 2
        return 1 + len(self.bubbles)

    def component_centers(self) -> np.ndarray:
        if self.kind == ANNULUS:
            return np.zeros(2, dtype=np.complex128)
        return np.concatenate(
            [[0.0 + 0.0j], np.asarray([b[0] for b in self.bubbles],
                                      dtype=np.complex128)]
        )

    @property
    def diameter(self) -> float:
        return 2.0 * self.r_out if self.kind == ANNULUS else 2.0

    def distance(self, z):
        """Distance to the boundary and id of the nearest component.

        Vectorized; ``z`` is a complex array, returns (float array, int array).
        """
        z = np.asarray(z, dtype=np.complex128)
        if self.kind == ANNULUS:
            r = np.abs(z)
            d_out = self.r_out - r
            d_in = r - self.r_in
            comp = np.where(d_out < d_in, 0, 1)
            return np.minimum(d_out, d_in), comp
        d = 1.0 - np.abs(z)[:, None]
        if self.bubbles:
            centers = np.asarray([b[0] for b in self.bubbles], dtype=np.complex128)
            radii = np.asarray([b[1] for b in self.bubbles], dtype=np.float64)
            d_bub = np.abs(z[:, None] - centers[None, :]) - radii[None, :]
            d = np.concatenate([d, d_bub], axis=1)
        comp = np.argmin(d, axis=1)
        return d[np.arange(z.size), comp], comp

    def distance_point(self, z: complex):
        d, comp = self.distance(np.asarray([z]))
        return float(d[0]), int(comp[0])


def annulus(r_in: float, r_out: float) -> DomainOracle:
    if not 0.0 < r_in < r_out:
        raise OutOfRange(f"annulus needs 0 < r_in < r_out, got ({r_in}, {r_out})")
    return DomainOracle(ANNULUS, float(r_in), float(r_out), ())


def champagne_disk(bubbles) -> DomainOracle:
    """Unit disk minus pairwise disjoint closed disks strictly inside it."""
    bub = tuple((complex(c), float(r)) for c, r in bubbles)
    if not bub:
        raise OutOfRange("champagne_disk needs at least one bubble")
    for i, (c, r) in enumerate(bub):
        if r <= 0:
            raise OutOfRange(f"bubble {i} has non-positive radius {r}")
        if abs(c) + r >= 1.0:
            raise OutOfRange(f"bubble {i} is not strictly inside the unit disk")
        for j in range(i + 1, len(bub)):
            cj, rj = bub[j]
            if abs(c - cj) <= r + rj:
                raise OutOfRange(f"bubbles {i} and {j} are not disjoint")
    return DomainOracle(CHAMPAGNE_DISK, math.nan, math.nan, bub)


def disk_minus_disk(center: complex, radius: float) -> DomainOracle:
    oracle = champagne_disk([(center, radius)])
    return DomainOracle(DISK_MINUS_DISK, math.nan, math.nan, oracle.bubbles)


def rotated(domain: DomainOracle, beta: float) -> DomainOracle:
    """The domain rotated by angle beta about the origin."""
    if domain.kind == ANNULUS:
        return domain
    rot = complex(math.cos(beta), math.sin(beta))
    bub = tuple((rot * c, r) for c, r in domain.bubbles)
    return DomainOracle(domain.kind, domain.r_in, domain.r_out, bub)


def annulus_outer_mass(rho: float, r_in: float, r_out: float) -> float:
    """Closed-form harmonic measure of the outer circle from |z| = rho.

    log(rho / r_in) / log(r_out / r_in) is harmonic in log|z|, 0 on the inner
    circle and 1 on the outer one.
    """
    if not r_in < rho < r_out:
        raise OutOfRange(f"need r_in < rho < r_out, got rho={rho}")
    return math.log(rho / r_in) / math.log(r_out / r_in)


# ---------------------------------------------------------------------------
# Walk-on-Spheres


@dataclass(frozen=True)
class WalkResult:
    """Exit histogram of one Walk-on-Spheres run."""

    hits: tuple  # ArcHistogram per boundary component
    walks: int
    stalled: int
    seed: int
    epsilon_shell: float

    def component_masses(self) -> list:
        return [h.mass() for h in self.hits]

    def summary(self) -> dict:
        return {
            "walks": self.walks,
            "stalled": self.stalled,
            "seed": self.seed,
            "epsilon_shell": self.epsilon_shell,
            "component_masses": self.component_masses(),
        }


def walk_on_spheres(domain: DomainOracle, base: complex, walks: int,
                    epsilon_shell: float | None = None,
                    step_cap: int = DEFAULT_STEP_CAP,
                    seed: int = 0, n_bins: int = DEFAULT_N_BINS,
                    walk_offset: int = 0) -> WalkResult:
    """Run ``walks`` independent walks from ``base`` and bin their exits.

    Walk i draws its jump angles from counter stream (walk_offset + i); a
    run sharded into offset ranges merges to the unsharded result exactly.
    Walks exceeding ``step_cap`` are counted as stalled; the run is rejected
    if the stalled fraction reaches 0.1%.
    """
    if walks < 1:
        raise OutOfRange(f"walks must be >= 1, got {walks}")
    if epsilon_shell is None:
        epsilon_shell = 1e-6 * domain.diameter
    base = complex(base)
    d0, _ = domain.distance_point(base)
    if d0 <= epsilon_shell:
        raise BasePointOnBoundary(
            f"base point {base} is within the epsilon shell of the boundary"
        )

    centers = domain.component_centers()
    hists = new_histograms(domain.n_components, n_bins, walks)
    counts = np.stack([h.counts for h in hists])

    z = np.full(walks, base, dtype=np.complex128)
    streams = np.arange(walk_offset, walk_offset + walks, dtype=np.uint64)
    alive = np.arange(walks)
    step = 0
    while alive.size and step < step_cap:
        za = z[alive]
        d, comp = domain.distance(za)
        done = d < epsilon_shell
        if done.any():
            exits = za[done]
            cids = comp[done]
            ang = np.angle(exits - centers[cids]) % TWO_PI
            np.add.at(counts, (cids, bin_angles(ang, n_bins)), 1)
        live = ~done
        ia = alive[live]
        if ia.size:
            u = uniform01(seed, streams[ia], step + 1)
            z[ia] = za[live] + d[live] * np.exp(1j * TWO_PI * u)
        alive = ia
        step += 1

    stalled = int(alive.size)
    if stalled / walks >= STALL_GATE:
        raise StallRateExceeded(
            f"{stalled} of {walks} walks exceeded the step cap {step_cap}"
        )
    for cid in range(domain.n_components):
        hists[cid].counts[:] = counts[cid]
    return WalkResult(hits=tuple(hists), walks=walks, stalled=stalled,
                      seed=seed, epsilon_shell=epsilon_shell)


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class SupportReport:
    """Bins whose empirical mass falls below the positivity threshold."""

    passed: bool
    min_bin_mass: float
    deficient: tuple  # (component_id, bin_index, mass)
    smallest_mass: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "min_bin_mass": self.min_bin_mass,
            "deficient": [list(t) for t in self.deficient],
            "smallest_mass": self.smallest_mass,
        }


def support_test(result: WalkResult, min_bin_mass: float) -> SupportReport:
    """Check that every arc of every boundary component received mass."""
    deficient = []
    smallest = math.inf
    for h in result.hits:
        masses = h.masses()
        smallest = min(smallest, float(masses.min()))
        for j in np.nonzero(masses < min_bin_mass)[0]:
            deficient.append((h.component_id, int(j), float(masses[j])))
    return SupportReport(
        passed=not deficient,
        min_bin_mass=min_bin_mass,
        deficient=tuple(deficient),
        smallest_mass=smallest,
    )


@dataclass(frozen=True)
class CrossValidation:
    """Agreement between the WoS estimate and the radial pushforward."""

    tv_distance: float
    threshold: float
    passed: bool
    walks: int

    def to_dict(self) -> dict:
        return {
            "tv_distance": self.tv_distance,
            "threshold": self.threshold,
            "passed": self.passed,
            "walks": self.walks,
        }


def cross_validate(domain: DomainOracle, model: CoveringModel, walks: int,
                   seed: int, n_bins: int = 32) -> CrossValidation:
    """Compare the two estimators of the same harmonic measure.

    The Brownian exit distribution from cover_eval(0) and the pushforward of
    arc length under the radial extension both target the harmonic measure
    with that base point, so their total-variation distance must vanish at
    the Monte-Carlo rate; the pass threshold is 10/sqrt(walks).
    """
    if domain.kind != ANNULUS or model.domain != COVER_ANNULUS:
        raise DomainMismatch("cross_validate compares annulus descriptions only")
    if (abs(domain.r_in - 1.0 / model.R) > 1e-9 / model.R
            or abs(domain.r_out - model.R) > 1e-9 * model.R):
        raise DomainMismatch(
            f"oracle radii ({domain.r_in}, {domain.r_out}) do not match the "
            f"covering model A(1/R, R) with R = {model.R}"
        )
    base = cover_eval(model, 0.0 + 0.0j)
    wos = walk_on_spheres(domain, base, walks, seed=derive_seed(seed, 1),
                          n_bins=n_bins)
    push = pushforward_measure(model, walks, n_bins, derive_seed(seed, 2))
    tv = tv_distance(list(wos.hits), push)
    threshold = 10.0 / math.sqrt(walks)
    return CrossValidation(tv_distance=tv, threshold=threshold,
                           passed=tv < threshold, walks=walks)
