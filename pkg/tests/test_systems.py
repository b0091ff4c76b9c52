import numpy as np
import pytest

from phmm import (
    DescriptorModel,
    GeneratorLeft,
    GeneratorRight,
    LtiSystem,
    PortHamiltonianSystem,
    expansion_at_infinity,
    ladder_system,
    markov_parameters,
    smib_system,
    transfer_eval,
)
from phmm.errors import DimensionError, InvariantError, NonPositiveParameter, PoleHit, SingularE
from phmm.systems import SMIB_INDUCTANCE, SMIB_INERTIA, SMIB_RESISTANCE

from helpers import SAMPLES, resolvent_transfer


def test_ph_invariants_rejected():
    I2 = np.eye(2)
    B = np.ones((2, 1))
    with pytest.raises(InvariantError, match="skew"):
        PortHamiltonianSystem(np.ones((2, 2)), I2, I2, B)
    with pytest.raises(InvariantError, match="R is not symmetric"):
        PortHamiltonianSystem(np.zeros((2, 2)), np.array([[1, 1], [0, 1.0]]), I2, B)
    with pytest.raises(InvariantError, match="singular"):
        PortHamiltonianSystem(np.zeros((2, 2)), I2, np.zeros((2, 2)), B)
    with pytest.raises(InvariantError, match="semidefinite"):
        PortHamiltonianSystem(np.zeros((2, 2)), -I2, I2, B, r_psd=True)
    with pytest.raises(InvariantError, match="positive definite"):
        PortHamiltonianSystem(np.zeros((2, 2)), I2, -I2, B, q_pd=True)
    with pytest.raises(DimensionError):
        PortHamiltonianSystem(np.zeros((2, 2)), I2, I2, np.ones((3, 1)))


def test_ph_symmetrize_and_derived():
    sys = PortHamiltonianSystem(np.array([[0, 1], [-1, 1e-3]]), np.eye(2), np.diag([2.0, 1.0]), [[1.0], [0.0]],
                                symmetrize=True)
    assert np.allclose(sys.J, [[0, 1], [-1, 0]])
    assert np.allclose(sys.A, (sys.J - sys.R) @ sys.Q)
    assert np.allclose(sys.C, sys.B.T @ sys.Q)
    assert sys.hamiltonian([1.0, 2.0]) == pytest.approx(0.5 * (2 + 4))
    assert sys.with_flags(r_psd=True).r_psd
    with pytest.raises(ValueError):
        sys.J[0, 0] = 1.0  # read-only


def test_ladder_structure_and_transfer():
    lad = ladder_system()
    assert lad.r_psd and lad.q_pd
    assert np.allclose(lad.R, np.diag([0, 1, 0, 2]))
    assert np.allclose(lad.J, -lad.J.T)
    # K(0) = R1 + R2 + R3 for unit values
    assert transfer_eval(lad, 0.0)[0, 0] == pytest.approx(3.0)
    for s in SAMPLES:
        assert np.allclose(transfer_eval(lad, s), resolvent_transfer(lad.A, lad.B, lad.C, s))


def test_ladder_parameter_checks():
    with pytest.raises(NonPositiveParameter):
        ladder_system(r=(1, -1, 1))
    with pytest.raises(DimensionError):
        ladder_system(r=(1, 1))
    assert np.allclose(ladder_system(q=(1, 1, 2, 1)).Q, np.diag([1, 1, 2, 1]))


def test_markov_parameters_direct():
    lad2 = ladder_system(q=(1, 1, 2, 1))
    eta = [float(x.item()) for x in markov_parameters(lad2, 4)]
    assert eta == [0.0, 1.0, 0.0, -1.0]
    A, B, C = lad2.A, lad2.B, lad2.C
    assert np.allclose(markov_parameters(lad2, 6)[5], C @ np.linalg.matrix_power(A, 4) @ B)


def test_lti_dimension_checks():
    with pytest.raises(DimensionError):
        LtiSystem(np.eye(2), np.ones((3, 1)), np.ones((1, 2)))


def test_descriptor_transfer_and_flags():
    E = np.array([[1.0, 0.5], [0.0, 2.0]])
    F = np.array([[-1.0, 0.0], [1.0, -3.0]])
    G = np.array([[1.0], [0.0]])
    H = np.array([[0.0, 1.0]])
    d = DescriptorModel(E, F, G, H)
    lti = d.to_lti()
    for s in SAMPLES[:4]:
        ref = H @ np.linalg.solve(s * E - F, G)
        assert np.allclose(transfer_eval(d, s), ref)
        assert np.allclose(transfer_eval(lti, s), ref)
    dd = DescriptorModel(E, F, G, H, output_derivative=True)
    assert np.allclose(transfer_eval(dd, 2.0), 2.0 * transfer_eval(d, 2.0))
    with pytest.raises(DimensionError):
        dd.to_lti()
    with pytest.raises(SingularE):
        DescriptorModel(np.array([[1.0, 0], [0, 0]]), -np.eye(2), G, H).to_lti()
    with pytest.raises(InvariantError, match="pencil"):
        DescriptorModel(np.zeros((2, 2)), np.array([[1.0, 0], [0, 0]]), G, H)


def test_expansion_at_infinity_derivative_flags():
    E = np.eye(2)
    F = np.array([[-1.0, 1.0], [0.0, -2.0]])
    G = np.array([[1.0], [1.0]])
    H = np.array([[1.0, 2.0]])
    both = DescriptorModel(E, F, G, H, input_derivative=True, output_derivative=True)
    poly, markov = expansion_at_infinity(both, 3)
    # s^2 H (sI - F)^-1 G = HG s + HFG + HF^2G / s + ...
    assert len(poly) == 1 and poly[0].item() == pytest.approx((H @ G).item())
    assert markov[0].item() == pytest.approx((H @ F @ G).item())
    assert markov[1].item() == pytest.approx((H @ F @ F @ G).item())
    one = DescriptorModel(E, F, G, H, output_derivative=True)
    poly1, markov1 = expansion_at_infinity(one, 2)
    assert poly1 == [] and markov1[0].item() == pytest.approx((H @ G).item())
    with pytest.raises(SingularE):
        expansion_at_infinity(DescriptorModel(np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2), G, H), 2)


def test_pole_hit():
    with pytest.raises(PoleHit):
        transfer_eval(LtiSystem(np.diag([-1.0, -2.0]), np.ones((2, 1)), np.ones((1, 2))), -1.0)


def test_generator_validation():
    with pytest.raises(InvariantError, match="observable"):
        GeneratorRight(np.array([[0, 1], [0, 0.0]]), np.array([[0.0, 0.0]]))
    with pytest.raises(InvariantError, match="controllable"):
        GeneratorLeft(np.diag([1.0, 1.0]), np.array([[1.0], [1.0]]))
    g = GeneratorRight(np.diag([1.0, 2.0]), np.array([[1.0], [1.0]]))  # column form accepted
    assert g.L.shape == (1, 2)
    gj = GeneratorRight.jordan(0.5, 3)
    assert np.allclose(gj.points, 0.5) and np.array_equal(gj.L, [[1, 0, 0]])
    gl = GeneratorLeft.jordan(0.0, 2)
    assert np.array_equal(gl.Qc, [[0, 0], [1, 0]]) and np.array_equal(gl.Rc, [[1], [0]])
    assert np.allclose(np.sort(GeneratorLeft.diagonal([2.0, 1.0]).points), [1, 2])


def test_smib_structure():
    for delta in (0.0, np.pi / 4, 1.0):
        m = smib_system(delta)
        assert (m.n, m.m) == (7, 3)
        assert np.allclose(m.J, 0)
        assert np.allclose(m.R, np.diag(SMIB_RESISTANCE))
        assert np.allclose(np.linalg.inv(m.Q[:6, :6]), SMIB_INDUCTANCE)
        assert m.Q[6, 6] == pytest.approx(1 / SMIB_INERTIA)
        assert np.allclose(m.B[:, 0], np.eye(7)[6])
        assert np.allclose(m.B[:, 1], np.eye(7)[2])
        assert np.allclose(m.B[:2, 2], [np.sin(delta), np.cos(delta)])
        assert np.all(np.linalg.eigvals(m.A).real < 0)
    assert np.allclose(smib_system().B[:2, 2], np.sqrt(0.5))


def test_equality_semantics():
    assert ladder_system() == ladder_system()
    assert ladder_system() != ladder_system(q=(1, 1, 2, 1))
