import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qedsim.geometry import (
    DegeneracyError,
    LoopSpec,
    berry_phase,
    classify_intersection,
    heisenberg_force,
    loop_eigenvectors,
    wilson_loop_phase,
)
from qedsim.models import ModelSpec


def test_conical_loop_phase_pi():
    bp = berry_phase(ModelSpec("EpsilonE", g=1.0, Omega=0.0), LoopSpec(radius=1.0))
    assert abs(abs(bp.phase) - np.pi) < 1e-10
    assert bp.error < 1e-9


def test_non_enclosing_loop_phase_zero():
    bp = berry_phase(ModelSpec("EpsilonE", g=1.0, Omega=0.0), LoopSpec(center=(2.0, 0.5), radius=1.0))
    assert abs(bp.phase) < 1e-10


@pytest.mark.parametrize("branch", [0, 2])
def test_renner_teller_phase_vanishes(branch):
    spec = ModelSpec("RennerTeller", g=1.0, E3=1.0)
    bp = berry_phase(spec, LoopSpec(radius=1.0, branch=branch))
    assert abs(bp.phase) < 1e-10


def test_gapped_cone_solid_angle():
    # spin-1/2 in the field (g Px, g Py, Omega/2): phase = pi (1 - cos theta)
    spec = ModelSpec("EpsilonE", g=1.0, Omega=0.5)
    bp = berry_phase(spec, LoopSpec(radius=1.0))
    expected = np.pi * (1 - 0.25 / np.sqrt(0.0625 + 1.0))
    assert abs(abs(bp.phase) - expected) < 1e-4
    assert abs(abs(bp.extrapolated) - expected) < 1e-8


def test_phase_converges_with_sampling():
    spec = ModelSpec("EpsilonE", g=1.0, Omega=0.5)
    errs = []
    expected = np.pi * (1 - 0.25 / np.sqrt(1.0625))
    for n in (64, 128, 256):
        errs.append(abs(abs(berry_phase(spec, LoopSpec(n_points=n)).phase) - expected))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)


def test_loop_through_degeneracy_rejected():
    spec = ModelSpec("EpsilonE", g=1.0, Omega=0.0)
    with pytest.raises(DegeneracyError, match="degenerate"):
        berry_phase(spec, LoopSpec(center=(1.0, 0.0), radius=1.0, n_points=64))


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-np.pi, np.pi), min_size=64, max_size=64))
def test_wilson_loop_gauge_invariant(phases):
    spec = ModelSpec("EpsilonE", g=1.0, Omega=0.3)
    vecs = loop_eigenvectors(spec, LoopSpec(n_points=64))
    rotated = vecs * np.exp(1j * np.array(phases))[:, None]
    assert abs(wilson_loop_phase(rotated) - wilson_loop_phase(vecs)) < 1e-12


@pytest.mark.parametrize(
    "spec, kind, exponent",
    [
        (ModelSpec("EpsilonE", g=1.0, Omega=0.0), "Conical", 1.0),
        (ModelSpec("RennerTeller", g=1.0, E3=1.0), "Glancing", 2.0),
        (ModelSpec("EpsilonE", g=1.0, Omega=0.5), "Avoided", None),
    ],
)
def test_intersection_classification(spec, kind, exponent):
    rep = classify_intersection(spec)
    assert rep.kind == kind
    if exponent is None:
        assert rep.gap_at_origin == pytest.approx(0.5)
    else:
        assert rep.exponent == pytest.approx(exponent, abs=1e-3)


def test_heisenberg_force_decomposition():
    w, om, g = 0.7, 1.3, 0.4
    rep = heisenberg_force(ModelSpec("EpsilonE", omega=w, g=g, Omega=om), ModelSpec("EpsilonE", g=g, Omega=om).space(8))
    cx, cy = rep.coefficients["x"], rep.coefficients["y"]
    assert cx["X"] == pytest.approx(-w * w, abs=1e-12)
    assert cx["sigma_y"] == pytest.approx(-g * om, abs=1e-12)
    assert cx["P_y sigma_z"] == pytest.approx(2 * g * g, abs=1e-12)
    assert cy["Y"] == pytest.approx(-w * w, abs=1e-12)
    assert cy["sigma_x"] == pytest.approx(g * om, abs=1e-12)
    assert cy["P_x sigma_z"] == pytest.approx(-2 * g * g, abs=1e-12)
    assert rep.interior_residual < 1e-12
    assert rep.fx.is_hermitian()


@pytest.mark.parametrize("radius", [0.1, 1.0, 5.0])
def test_conical_phase_topological(radius):
    bp = berry_phase(ModelSpec("EpsilonE", g=1.0, Omega=0.0), LoopSpec(radius=radius))
    assert abs(abs(bp.phase) - np.pi) < 1e-3


def test_phase_independent_of_start_and_doubling():
    spec = ModelSpec("EpsilonE", g=0.7, Omega=0.4)
    a = berry_phase(spec, LoopSpec(radius=1.3, n_points=128))
    b = berry_phase(spec, LoopSpec(radius=1.3, n_points=128, start_angle=1.1))
    assert abs(a.phase - b.phase) < 1e-12
    fine = berry_phase(spec, LoopSpec(radius=1.3, n_points=256))
    assert abs(fine.phase - a.phase) <= a.error


@pytest.mark.parametrize("Omega", [0.1, 0.5, 1.0])
def test_gapped_origin_is_avoided(Omega):
    assert classify_intersection(ModelSpec("EpsilonE", g=1.0, Omega=Omega)).kind == "Avoided"


def test_free_force_is_harmonic():
    spec = ModelSpec("EpsilonE", omega=1.3, g=0.0, Omega=0.8)
    rep = heisenberg_force(spec, spec.space(6))
    assert rep.coefficients["x"]["X"] == pytest.approx(-1.69, abs=1e-12)
    assert abs(rep.coefficients["x"]["sigma_y"]) < 1e-12
    assert abs(rep.coefficients["x"]["P_y sigma_z"]) < 1e-12
