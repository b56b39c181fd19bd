import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qedsim.operators import (
    OperatorMatrix,
    QuantumState,
    SpaceDescriptor,
    SpaceError,
    basis_ket,
    coherent_amplitudes,
    coherent_ket,
    commutator,
    destroy,
    gell_mann,
    identity,
    make_annihilator,
    make_atomic_projector,
    make_number,
    make_quadratures,
    pauli,
    quadratures,
    required_cutoff,
    truncation_loss,
)


@pytest.mark.parametrize("n", [2, 3, 4, 16, 64])
def test_truncated_commutator(n):
    x, p = quadratures(n)
    top = np.zeros((n, n))
    top[-1, -1] = 1.0
    expected = 1j * (np.eye(n) - n * top)
    assert np.max(np.abs(x @ p - p @ x - expected)) <= 1e-13


def test_quadratures_hermitian_and_energy():
    n = 10
    x, p = quadratures(n)
    assert np.allclose(x, x.conj().T)
    assert np.allclose(p, p.conj().T)
    # (X^2 + P^2)/2 = a^+a + 1/2 except on the top level
    h = 0.5 * (x @ x + p @ p)
    diag = np.arange(n) + 0.5
    diag[-1] = 0.5 * (n - 1)
    assert np.allclose(h, np.diag(diag), atol=1e-14)


def test_destroy_lowers():
    a = destroy(5)
    v = np.zeros(5)
    v[3] = 1.0
    out = a @ v
    assert np.isclose(out[2], np.sqrt(3))
    assert np.count_nonzero(out) == 1


def test_pauli_algebra():
    s = pauli()
    assert np.allclose(s["x"] @ s["y"], 1j * s["z"])
    # level 1 is the +1 eigenstate of sigma_z
    assert np.allclose(s["z"] @ [1, 0], [1, 0])
    assert np.allclose(s["z"] @ [0, 1], [0, -1])


def test_gell_mann_normalisation_and_commutator():
    mats = [gell_mann(k) for k in range(1, 9)]
    gram = np.array([[np.trace(a @ b) for b in mats] for a in mats])
    assert np.allclose(gram, 2 * np.eye(8))
    l4, l6, l2 = gell_mann(4), gell_mann(6), gell_mann(2)
    assert np.allclose(l4 @ l6 - l6 @ l4, 1j * l2)


def test_kron_layout_atom_slowest_first_mode_fastest():
    space = SpaceDescriptor.build(2, x=3, y=4)
    assert space.dim == 24
    table = space.index_table
    # first rows: atom level 1, x runs fastest
    assert table[0].tolist() == [1, 0, 0]
    assert table[1].tolist() == [1, 1, 0]
    assert table[3].tolist() == [1, 0, 1]
    assert table[12].tolist() == [2, 0, 0]
    nx = make_number(space, "x").matrix
    assert np.allclose(np.diag(nx).real, space.occupation("x"))
    ket = basis_ket(space, 2, {"x": 2, "y": 3})
    idx = int(np.argmax(np.abs(ket.data)))
    assert table[idx].tolist() == [2, 2, 3]


def test_embedded_operators_commute_across_modes():
    space = SpaceDescriptor.build(2, x=4, y=5)
    ax = make_annihilator(space, "x")
    ay = make_annihilator(space, "y")
    assert commutator(ax, ay).max_abs() == 0.0
    assert commutator(ax, ay.dag()).max_abs() == 0.0
    x, p = make_quadratures(space, "y")
    c = commutator(x, p).matrix
    edge = space.occupation("y") == 4
    assert np.allclose(np.diag(c)[~edge], 1j)
    assert np.allclose(np.diag(c)[edge], 1j * (1 - 5))


def test_atomic_projector_sigma_minus():
    space = SpaceDescriptor.build(2, x=3)
    lower = make_atomic_projector(space, 2, 1)
    up = basis_ket(space, 1)
    down = basis_ket(space, 2)
    assert np.allclose(lower.matrix @ up.data, down.data)


@pytest.mark.parametrize(
    "modes, levels",
    [((("x", 1),), 2), ((("x", 3), ("x", 3)), 2), ((("x", 3),), 4), ((), 2)],
)
def test_space_rejects_bad_shapes(modes, levels):
    with pytest.raises(SpaceError):
        SpaceDescriptor(modes, levels)


def test_unknown_label_names_modes():
    space = SpaceDescriptor.build(2, x=3)
    with pytest.raises(SpaceError, match="x"):
        space.cutoff("z")


def test_operator_guards():
    a = SpaceDescriptor.build(2, x=3)
    b = SpaceDescriptor.build(2, x=4)
    with pytest.raises(SpaceError):
        identity(a) + identity(b)
    with pytest.raises(ValueError):
        OperatorMatrix(a, np.triu(np.ones((6, 6))), hermitian=True)
    op = identity(a)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 2.0


def test_state_validation():
    space = SpaceDescriptor.build(2, x=3)
    with pytest.raises(ValueError, match="norm"):
        QuantumState(space, np.ones(6))
    rho = np.diag([1.2, -0.2, 0, 0, 0, 0])
    with pytest.raises(ValueError, match="negative"):
        QuantumState(space, rho)
    with pytest.raises(ValueError, match="trace"):
        QuantumState(space, np.eye(6))
    psi = basis_ket(space, 1, {"x": 1})
    assert psi.density().norm() == pytest.approx(1.0)
    n = make_number(space, "x")
    assert psi.expect(n) == pytest.approx(1.0)
    assert psi.density().expect(n) == pytest.approx(1.0)


def test_coherent_amplitudes_closed_form():
    amps = coherent_amplitudes(4, 0.5 + 0.5j)
    a = 0.5 + 0.5j
    ref = np.exp(-abs(a) ** 2 / 2) * np.array([1, a, a**2 / np.sqrt(2), a**3 / np.sqrt(6)])
    assert np.allclose(amps, ref, atol=1e-15)


def test_coherent_admissibility():
    need = required_cutoff(2.0)
    assert need >= 16
    assert truncation_loss(need, 2.0) <= 1e-10
    space = SpaceDescriptor.build(2, x=12)
    with pytest.raises(SpaceError, match=f"at least {need}"):
        coherent_ket(space, "x", 2.0)
    psi = coherent_ket(space, "x", 2.0, allow_truncation=True)
    assert psi.norm() == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(-np.pi, np.pi))
def test_coherent_state_statistics(r, phi):
    alpha = r * np.exp(1j * phi)
    n = required_cutoff(alpha)
    space = SpaceDescriptor.build(2, x=n)
    psi = coherent_ket(space, "x", alpha, level=2)
    a = make_annihilator(space, "x")
    assert abs(psi.expect(a) - alpha) < 1e-6
    assert abs(psi.expect(make_number(space, "x")) - r * r) < 1e-6
