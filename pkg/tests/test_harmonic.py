import math

import numpy as np
import pytest

from fatoulab import covering as cov
from fatoulab import harmonic as hm
from fatoulab.errors import (
    BasePointOnBoundary,
    DomainMismatch,
    OutOfRange,
    StallRateExceeded,
)
from fatoulab.histograms import shift_bins, tv_distance

R_E = math.e

PENTAGON = [(0.45 * np.exp(2j * math.pi * (k / 5 + 0.05)), 0.09) for k in range(5)]


def test_annulus_closed_form_oracle():
    # u(z) = log(|z| R)/log(R^2) is harmonic, 0 inner, 1 outer
    p = hm.annulus_outer_mass(1.0, 1.0 / 2.0, 2.0)
    assert p == pytest.approx(0.5)
    p = hm.annulus_outer_mass(math.sqrt(2.0), 0.5, 2.0)
    assert p == pytest.approx(0.75)


def test_wos_annulus_matches_closed_form():
    R, rho, walks = 2.0, math.sqrt(2.0), 100_000
    domain = hm.annulus(1.0 / R, R)
    res = hm.walk_on_spheres(domain, rho + 0.0j, walks, seed=1234)
    p = hm.annulus_outer_mass(rho, 1.0 / R, R)
    sigma = math.sqrt(p * (1.0 - p) / walks)
    assert abs(res.component_masses()[0] - p) < 4.0 * sigma


def test_wos_single_bubble_closed_form():
    # D(0, r) removed from the unit disk is the annulus A(r, 1)
    r, rho, walks = 0.3, 0.6, 100_000
    domain = hm.champagne_disk([(0.0 + 0.0j, r)])
    res = hm.walk_on_spheres(domain, rho + 0.0j, walks, seed=88)
    p = math.log(rho / r) / math.log(1.0 / r)
    sigma = math.sqrt(p * (1.0 - p) / walks)
    assert abs(res.component_masses()[0] - p) < 4.0 * sigma


def test_disk_minus_disk_equals_single_bubble():
    a = hm.walk_on_spheres(hm.disk_minus_disk(0.2 + 0.1j, 0.25), 0.6j, 20_000, seed=5)
    b = hm.walk_on_spheres(hm.champagne_disk([(0.2 + 0.1j, 0.25)]), 0.6j, 20_000, seed=5)
    for ha, hb in zip(a.hits, b.hits):
        assert np.array_equal(ha.counts, hb.counts)


def test_wos_bookkeeping():
    domain = hm.annulus(0.5, 2.0)
    res = hm.walk_on_spheres(domain, 1.0, 5_000, seed=2)
    assert sum(h.hits for h in res.hits) + res.stalled == res.walks
    total_mass = sum(h.masses().sum() for h in res.hits)
    assert total_mass == pytest.approx((res.walks - res.stalled) / res.walks)


def test_wos_deterministic_and_mergeable():
    domain = hm.annulus(0.5, 2.0)
    full = hm.walk_on_spheres(domain, 1.0, 2_000, seed=9)
    again = hm.walk_on_spheres(domain, 1.0, 2_000, seed=9)
    for ha, hb in zip(full.hits, again.hits):
        assert np.array_equal(ha.counts, hb.counts)
    # sharding by walk_offset reproduces the full run exactly
    first = hm.walk_on_spheres(domain, 1.0, 1_000, seed=9)
    second = hm.walk_on_spheres(domain, 1.0, 1_000, seed=9, walk_offset=1_000)
    for hf, h1, h2 in zip(full.hits, first.hits, second.hits):
        assert np.array_equal(hf.counts, h1.counts + h2.counts)


def test_wos_base_point_validation():
    domain = hm.annulus(0.5, 2.0)
    with pytest.raises(BasePointOnBoundary):
        hm.walk_on_spheres(domain, 2.0, 10, seed=1)
    with pytest.raises(OutOfRange):
        hm.walk_on_spheres(domain, 1.0, 0, seed=1)


def test_wos_stall_gate():
    domain = hm.annulus(0.5, 2.0)
    with pytest.raises(StallRateExceeded):
        hm.walk_on_spheres(domain, 1.0, 100, seed=3, step_cap=1)


def test_champagne_validation():
    with pytest.raises(OutOfRange):
        hm.champagne_disk([])
    with pytest.raises(OutOfRange):
        hm.champagne_disk([(0.9 + 0.0j, 0.2)])  # leaks outside the disk
    with pytest.raises(OutOfRange):
        hm.champagne_disk([(0.0j, 0.2), (0.1 + 0.0j, 0.2)])  # overlapping


def test_champagne_positivity_and_monotonicity():
    # every bubble receives positive mass; the single-bubble closed form is
    # an upper bound by domain monotonicity (removing the other bubbles
    # enlarges the domain)
    domain = hm.champagne_disk(PENTAGON)
    walks = 60_000
    res = hm.walk_on_spheres(domain, 0.0j, walks, seed=404)
    masses = res.component_masses()
    for i, (c, r) in enumerate(PENTAGON, start=1):
        assert masses[i] > 0.0
        single = 1.0 - math.log(abs(c) / r) / math.log(1.0 / r)
        sigma = math.sqrt(single * (1.0 - single) / walks)
        assert masses[i] <= single + 4.0 * sigma


def test_rotation_equivariance():
    n_bins = 32
    beta = 2.0 * math.pi * 3 / n_bins  # an exact bin shift
    walks = 20_000
    domain = hm.champagne_disk(PENTAGON)
    base = 0.1 + 0.0j
    res = hm.walk_on_spheres(domain, base, walks, seed=31337, n_bins=n_bins)
    rot_domain = hm.rotated(domain, beta)
    rot_base = base * complex(math.cos(beta), math.sin(beta))
    res_rot = hm.walk_on_spheres(rot_domain, rot_base, walks, seed=2718,
                                 n_bins=n_bins)
    shifted = [shift_bins(h, 3) for h in res.hits]
    assert tv_distance(shifted, list(res_rot.hits)) < 10.0 / math.sqrt(walks)


def test_support_test_pass_and_fail():
    domain = hm.annulus(1.0 / R_E, R_E)
    res = hm.walk_on_spheres(domain, 1.0, 100_000, seed=6, n_bins=32)
    report = hm.support_test(res, 1e-4)
    assert report.passed
    assert report.smallest_mass > 1e-4

    tiny = hm.walk_on_spheres(domain, 1.0, 10, seed=6, n_bins=64)
    report = hm.support_test(tiny, 1e-4)
    assert not report.passed
    assert len(report.deficient) > 0


def test_cross_validate_annulus():
    domain = hm.annulus(1.0 / R_E, R_E)
    model = cov.annulus_model(R_E)
    report = hm.cross_validate(domain, model, 100_000, seed=246)
    assert report.passed
    assert report.tv_distance < 10.0 / math.sqrt(100_000)


def test_cross_validate_deterministic():
    domain = hm.annulus(1.0 / R_E, R_E)
    model = cov.annulus_model(R_E)
    a = hm.cross_validate(domain, model, 20_000, seed=99)
    b = hm.cross_validate(domain, model, 20_000, seed=99)
    assert a.tv_distance == b.tv_distance


def test_cross_validate_domain_mismatch():
    model = cov.annulus_model(R_E)
    with pytest.raises(DomainMismatch):
        hm.cross_validate(hm.annulus(0.5, 2.0), model, 1_000, seed=1)
    with pytest.raises(DomainMismatch):
        hm.cross_validate(hm.champagne_disk([(0.0j, 0.2)]), model, 1_000, seed=1)
