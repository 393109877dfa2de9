import math
from dataclasses import replace

import numpy as np
import pytest

from septrans.loops import (LoopConstructionError, UnsupportedOperationError,
                            inner_time_param, loop_action_sigma, loop_profile,
                            restriction_residual)
from septrans.models import HamiltonianModel, builtin_model


def test_identical_pendula_profiles():
    m = builtin_model("pendula_identical", [0.12])
    p = loop_profile(m)
    for q1 in np.linspace(0.0, 2 * math.pi, 40):
        assert p.dS0(q1) == pytest.approx(4.0 * math.sin(q1 / 2.0), abs=1e-12)
        assert p.S1(q1) == pytest.approx(2.0 * math.sin(q1 / 2.0), abs=1e-12)
        assert p.beta(q1) == pytest.approx(0.5, abs=1e-15)


def test_neumann_profiles():
    l1 = 1.4
    m = builtin_model("neumann", [l1, 2.0])
    p = loop_profile(m)
    for q1 in np.linspace(0.0, 8.0, 40):
        assert p.dS0(q1) == pytest.approx(
            16.0 * l1 * q1 / (4.0 + q1 * q1) ** 2, rel=1e-12, abs=1e-12)
        assert p.S1(q1) == 0.0


def test_profiles_vanish_at_equilibrium():
    for spec in (("neumann", [1.0, 2.0]), ("pendula_weak", [2.0])):
        made = builtin_model(*spec)
        m = made[0] if isinstance(made, tuple) else made
        p = loop_profile(m)
        assert p.dS0(0.0) == 0.0
        assert p.S1(0.0) == 0.0


def test_s1_relation_pointwise():
    m, _ = builtin_model("pendula_weak", [2.3])
    p = loop_profile(m)
    for q1 in np.linspace(0.1, 2 * math.pi - 0.1, 50):
        expect = -(m.b120(q1) / m.b220(q1)) * p.dS0(q1)
        assert p.S1(q1) == pytest.approx(expect, rel=1e-9)


def test_energy_on_loop():
    for spec in (("neumann", [1.0, 2.0]), ("pendula_identical", [0.2]),
                 ("pendula_weak", [1.8])):
        made = builtin_model(*spec)
        m = made[0] if isinstance(made, tuple) else made
        p = loop_profile(m)
        a, b = m.domain
        for q1 in np.linspace(a, b, 60):
            e = 0.5 * p.beta(q1) * p.dS0(q1) ** 2 + m.V0(q1)
            assert abs(e) < 1e-10


def test_restriction_residual_identical_pendula():
    m = builtin_model("pendula_identical", [0.0])
    p = loop_profile(m)
    # dS1*beta*dS0 = cos(q1/2) * (1/2) * 4 sin(q1/2) = sin(q1) = -V1
    assert abs(restriction_residual(p, m, math.pi / 2)) < 1e-12


def test_restriction_residual_neumann_exact_zero():
    m = builtin_model("neumann", [1.0, 2.0])
    p = loop_profile(m)
    for q1 in (0.5, 2.0, 5.0):
        assert restriction_residual(p, m, q1) == 0.0


def test_corrupted_v1_detected():
    base = builtin_model("pendula_identical", [0.0])
    bad = replace(base, V1=lambda q1: -math.sin(q1) + 0.1)
    p = loop_profile(base)
    assert restriction_residual(p, bad, 1.0) == pytest.approx(0.1, abs=1e-10)
    with pytest.raises(LoopConstructionError, match="inconsistent V1"):
        loop_profile(bad)


def test_no_loop_for_positive_potential():
    one = lambda q1: 1.0
    zero = lambda q1: 0.0
    m = HamiltonianModel(
        b110=one, b120=zero, b220=one, b112=zero, b122=zero, b222=zero,
        V0=lambda q1: q1 * q1 * (1.0 - q1), V1=zero, Y=one,
        domain=(0.0, 2.0))
    with pytest.raises(LoopConstructionError, match="no loop"):
        p = loop_profile(m)
        p.dS0(0.5)


def test_inner_time_identity():
    m = builtin_model("neumann", [1.0, 2.0])
    p = loop_profile(m)
    assert inner_time_param(p, 2.0, 0.0).q1 == 2.0


def test_inner_time_neumann_exponential():
    # the inner dynamics is q1' = lambda1 * q1
    m = builtin_model("neumann", [1.0, 2.0])
    p = loop_profile(m)
    r = inner_time_param(p, 2.0, 1.0)
    assert not r.clipped
    assert r.q1 == pytest.approx(2.0 * math.e, rel=1e-9)


def test_inner_time_pendula_closed_form():
    m = builtin_model("pendula_identical", [0.0])
    p = loop_profile(m)
    # q1' = 2 sin(q1/2) with q1(0) = pi gives 4 arctan(e^t)
    for t in (-1.0, 1.0):
        r = inner_time_param(p, math.pi, t)
        assert r.q1 == pytest.approx(4.0 * math.atan(math.exp(t)), rel=1e-9)
        assert not r.clipped


def test_inner_time_monotone_and_clipped():
    m = builtin_model("neumann", [1.0, 2.0])
    p = loop_profile(m)
    qs = [inner_time_param(p, 2.0, t).q1 for t in (-1.0, 0.0, 0.5, 1.0)]
    assert all(a < b for a, b in zip(qs, qs[1:]))
    r = inner_time_param(p, 7.9, 5.0)
    assert r.clipped
    assert r.q1 <= 8.0


def test_loop_reparameterization_matches_momentum():
    # evaluating dS0 along the inner flow reproduces the explicit loop's p1
    m = builtin_model("pendula_identical", [0.0])
    p = loop_profile(m)
    for t in (-2.0, -0.5, 0.7, 1.5):
        q1 = inner_time_param(p, math.pi, t).q1
        p1_expected = 4.0 * math.sin(2.0 * math.atan(math.exp(t)))  # 2/cosh(t)*2
        assert p.dS0(q1) == pytest.approx(p1_expected, abs=1e-8)


def test_sigma_identical_pendula():
    m = builtin_model("pendula_identical", [0.3])
    assert loop_action_sigma(loop_profile(m)) == pytest.approx(16.0, abs=1e-10)


def test_sigma_weak_lam1():
    m, _ = builtin_model("pendula_weak", [1.0])
    assert loop_action_sigma(loop_profile(m)) == pytest.approx(16.0, abs=1e-9)


def test_sigma_scales_linearly():
    m = builtin_model("pendula_identical", [0.0])
    p = loop_profile(m)
    scaled = replace(p, dS0=lambda q1: 2.5 * p.dS0(q1))
    assert loop_action_sigma(scaled) == pytest.approx(40.0, abs=1e-9)


def test_sigma_requires_periodic():
    m = builtin_model("neumann", [1.0, 2.0])
    with pytest.raises(UnsupportedOperationError):
        loop_action_sigma(loop_profile(m))


def test_antiperiodic_extension():
    m, _ = builtin_model("pendula_weak", [2.0])
    p = loop_profile(m)
    for q1 in np.linspace(0.05, 2 * math.pi - 0.05, 30):
        assert p.dS0_extended(q1 + 2 * math.pi) == pytest.approx(
            -p.dS0_extended(q1), abs=1e-10)
        assert p.S1_extended(q1 + 2 * math.pi) == pytest.approx(
            -p.S1_extended(q1), abs=1e-10)
