import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mosaiq import qsim
from mosaiq.errors import ShapeError

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])


def expm_pauli(theta, pauli):
    # exp(-i t P / 2) = cos(t/2) I - i sin(t/2) P for any Pauli P
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * pauli


def dense_1q(gate, qubit, n):
    """Full 2^n matrix; qubit 0 is the rightmost Kronecker factor."""
    out = np.eye(1)
    for q in reversed(range(n)):
        out = np.kron(out, gate if q == qubit else I2)
    return out


def dense_cz(a, b, n):
    d = np.ones(2 ** n, dtype=complex)
    for idx in range(2 ** n):
        if (idx >> a) & 1 and (idx >> b) & 1:
            d[idx] = -1
    return np.diag(d)


def random_state(rng, n):
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return v / np.linalg.norm(v)


def test_gate_matrices_match_exponentials(rng):
    for t in rng.uniform(-7, 7, 5):
        np.testing.assert_allclose(qsim.rx(t), expm_pauli(t, X), atol=1e-15)
        np.testing.assert_allclose(qsim.ry(t), expm_pauli(t, Y), atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_single_qubit_gates_vs_dense(n, rng):
    for q in range(n):
        for make in (qsim.rx, qsim.ry):
            t = rng.uniform(-np.pi, np.pi)
            psi = random_state(rng, n)
            expected = dense_1q(make(t), q, n) @ psi
            np.testing.assert_allclose(qsim.apply_1q(psi, make(t), q), expected, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_cz_vs_dense(n, rng):
    for a in range(n):
        for b in range(n):
            if a != b:
                psi = random_state(rng, n)
                np.testing.assert_allclose(qsim.apply_cz(psi, a, b), dense_cz(a, b, n) @ psi, atol=1e-12)


def test_cz_basis_cases():
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1
    np.testing.assert_array_equal(qsim.apply_cz(psi, 0, 1), psi)
    psi = np.zeros(4, dtype=complex)
    psi[3] = 1
    np.testing.assert_array_equal(qsim.apply_cz(psi, 0, 1), -psi)


@pytest.mark.parametrize("n", [2, 3])
def test_layer_vs_dense(n, rng):
    spec = qsim.CircuitSpec(n_qubits=n, n_layers=1)
    thetas = rng.uniform(-np.pi, np.pi, n)
    u = np.eye(2 ** n)
    for q in range(n):
        u = dense_1q(expm_pauli(thetas[q], Y), q, n) @ u
    for a, b in qsim.ring(n):
        u = dense_cz(a, b, n) @ u
    psi = random_state(rng, n)
    np.testing.assert_allclose(qsim.apply_layer(psi, thetas, spec), u @ psi, atol=1e-12)


def test_layer_zero_angles_on_ground_state():
    spec = qsim.CircuitSpec(n_qubits=2, n_layers=1)
    psi = qsim.zero_state(2)
    np.testing.assert_array_equal(qsim.apply_layer(psi, [0.0, 0.0], spec), psi)


def test_ring_topology():
    assert qsim.ring(5) == ((0, 1), (1, 2), (2, 3), (3, 4), (4, 0))
    assert qsim.ring(2) == ((0, 1),)
    assert qsim.ring(1) == ()
    with pytest.raises(ShapeError):
        qsim.CircuitSpec(n_qubits=2, entangler=((0, 0),))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_embedding_vs_dense(n, rng):
    z = rng.uniform(-np.pi, np.pi, n)
    u = np.eye(2 ** n)
    for q in range(n):
        u = dense_1q(expm_pauli(z[q], Y) @ expm_pauli(z[q], X), q, n) @ u
    np.testing.assert_allclose(qsim.embed_noise(z), u[:, 0], atol=1e-12)


def test_embedding_examples():
    np.testing.assert_array_equal(qsim.embed_noise(np.zeros(3)), qsim.zero_state(3))
    # RY(pi) RX(pi) |0> = RY(pi) (-i|1>) = -i (-|0>) = i|0>
    np.testing.assert_allclose(qsim.embed_noise([np.pi]), [1j, 0], atol=1e-15)
    with pytest.raises(ShapeError):
        qsim.embed_noise(np.zeros(3), n_qubits=5)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=6))
def test_embedding_is_normalised(z):
    assert np.linalg.norm(qsim.embed_noise(z)) == pytest.approx(1.0, abs=1e-12)


def test_norm_after_1000_random_gates(rng):
    n = 4
    psi = qsim.zero_state(n)
    for _ in range(1000):
        kind = rng.integers(3)
        if kind == 2:
            a, b = rng.choice(n, 2, replace=False)
            psi = qsim.apply_cz(psi, int(a), int(b))
        else:
            gate = (qsim.rx, qsim.ry)[kind](rng.uniform(-np.pi, np.pi))
            psi = qsim.apply_1q(psi, gate, int(rng.integers(n)))
    assert abs(np.vdot(psi, psi).real - 1) < 1e-10


def test_expect_x_single_qubit():
    for t in (0.0, 0.3, np.pi / 2, 2.0):
        psi = qsim.apply_1q(qsim.zero_state(1), qsim.ry(t), 0)
        assert qsim.expect_x(psi, 0) == pytest.approx(np.sin(t), abs=1e-12)
    psi = qsim.apply_1q(qsim.zero_state(1), qsim.ry(np.pi / 2), 0)
    assert qsim.expect_x(psi, 0) == pytest.approx(1.0, abs=1e-15)


def test_expect_x_vs_dense(rng):
    psi = random_state(rng, 3)
    for q in range(3):
        val = np.vdot(psi, dense_1q(X, q, 3) @ psi)
        assert abs(val.imag) < 1e-12
        assert qsim.expect_x(psi, q) == pytest.approx(val.real, abs=1e-12)
    with pytest.raises(IndexError):
        qsim.expect_x(psi, 3)


def test_run_circuit_examples(rng):
    spec0 = qsim.CircuitSpec(n_qubits=3, n_layers=0)
    np.testing.assert_array_equal(qsim.run_circuit(spec0, np.zeros(3), np.zeros((0, 3))), 0.0)
    # one qubit, no layers: RY(z) RX(z)|0> gives <X> = sin(z) cos(z)
    spec1 = qsim.CircuitSpec(n_qubits=1, n_layers=0)
    for z in (0.2, 1.1, -2.5):
        out = qsim.run_circuit(spec1, [z], np.zeros((0, 1)))
        assert out[0] == pytest.approx(0.5 * np.sin(2 * z), abs=1e-12)
    spec = qsim.CircuitSpec()
    out = qsim.run_circuit(spec, rng.uniform(-3, 3, (20, 5)), rng.uniform(-3, 3, (20, 6, 5)))
    assert out.shape == (20, 5)
    assert np.all(np.abs(out) <= 1 + 1e-12)
    with pytest.raises(ShapeError):
        qsim.run_circuit(spec, np.zeros(5), np.zeros((5, 5)))


def test_batched_run_matches_loop(rng):
    spec = qsim.CircuitSpec(n_qubits=3, n_layers=2)
    z = rng.uniform(-3, 3, (4, 3))
    p = rng.uniform(-3, 3, (2, 3))
    batched = qsim.run_circuit(spec, z, p)
    for i in range(4):
        np.testing.assert_array_equal(batched[i], qsim.run_circuit(spec, z[i], p))


def test_gradient_trig_example():
    spec = qsim.CircuitSpec(n_qubits=1, n_layers=1)
    for t in (0.0, 0.7, 2.9):
        assert qsim.run_circuit(spec, [0.0], [[t]])[0] == pytest.approx(np.sin(t), abs=1e-12)
        g = qsim.param_shift_grad(spec, [0.0], [[t]], [1.0])
        assert g.shape == (1, 1)
        assert g[0, 0] == pytest.approx(np.cos(t), abs=1e-12)


def test_gradient_empty_for_zero_layers():
    spec = qsim.CircuitSpec(n_qubits=1, n_layers=0)
    assert qsim.param_shift_grad(spec, [0.3], np.zeros((0, 1)), [1.0]).shape == (0, 1)


def finite_difference(spec, z, p, u, h=1e-5):
    flat = p.ravel()
    m = flat.size
    plus = np.tile(flat, (m, 1)) + h * np.eye(m)
    minus = np.tile(flat, (m, 1)) - h * np.eye(m)
    shape = (m,) + p.shape
    fp = qsim.run_circuit(spec, z, plus.reshape(shape)) @ u
    fm = qsim.run_circuit(spec, z, minus.reshape(shape)) @ u
    return ((fp - fm) / (2 * h)).reshape(p.shape)


def test_gradient_vs_finite_differences(rng):
    spec = qsim.CircuitSpec(n_qubits=5, n_layers=3)
    for _ in range(10):
        z = rng.uniform(-np.pi, np.pi, 5)
        p = rng.uniform(0, 2 * np.pi, (3, 5))
        u = rng.normal(size=5)
        g = qsim.param_shift_grad(spec, z, p, u)
        np.testing.assert_allclose(g, finite_difference(spec, z, p, u), atol=1e-6)


def test_gradient_batched_is_sum(rng):
    spec = qsim.CircuitSpec(n_qubits=3, n_layers=2)
    z = rng.uniform(-3, 3, (4, 3))
    u = rng.normal(size=(4, 3))
    p = rng.uniform(-3, 3, (2, 3))
    total = sum(qsim.param_shift_grad(spec, z[i], p, u[i]) for i in range(4))
    np.testing.assert_allclose(qsim.param_shift_grad(spec, z, p, u), total, atol=1e-12)
    # extra leading axis: two parameter sets with their own batches
    p2 = rng.uniform(-3, 3, (2, 2, 3))
    z2 = rng.uniform(-3, 3, (2, 4, 3))
    u2 = rng.normal(size=(2, 4, 3))
    g2 = qsim.param_shift_grad(spec, z2, p2, u2)
    for j in range(2):
        np.testing.assert_allclose(g2[j], qsim.param_shift_grad(spec, z2[j], p2[j], u2[j]), atol=1e-12)


def test_gradient_linear_in_upstream(rng):
    spec = qsim.CircuitSpec(n_qubits=3, n_layers=2)
    z, p, u = rng.normal(size=3), rng.normal(size=(2, 3)), rng.normal(size=3)
    np.testing.assert_allclose(
        qsim.param_shift_grad(spec, z, p, -2.5 * u), -2.5 * qsim.param_shift_grad(spec, z, p, u), atol=1e-12
    )
