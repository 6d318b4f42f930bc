"""Ideal statevector simulation of the sub-generator circuit.

Circuit: RX(z_q) RY(z_q) noise embedding on every qubit, then ``n_layers``
blocks of trainable RY rotations followed by a ring of CZ gates, then the
Pauli-X expectation of each qubit.

Conventions:
  * RX(t) = exp(-i t X / 2), RY(t) = exp(-i t Y / 2)
  * qubit q is bit q (least significant first) of the amplitude index

All state functions take arrays of shape (..., 2**n) and act on the last
axis, so whole batches of circuits (different noise, different parameter
sets) are simulated in one vectorised pass.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ShapeError

SHIFT = np.pi / 2


@dataclass(frozen=True)
class CircuitSpec:
    n_qubits: int = 5
    n_layers: int = 6
    entangler: tuple[tuple[int, int], ...] | None = field(default=None)

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_layers < 0:
            raise ShapeError("need n_qubits >= 1 and n_layers >= 0")
        if self.entangler is None:
            object.__setattr__(self, "entangler", ring(self.n_qubits))
        for a, b in self.entangler:
            if a == b or not (0 <= a < self.n_qubits and 0 <= b < self.n_qubits):
                raise ShapeError(f"invalid CZ pair ({a}, {b})")

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def n_params(self) -> int:
        return self.n_layers * self.n_qubits

    @cached_property
    def cz_phase(self) -> np.ndarray:
        return entangler_phase(self.n_qubits, self.entangler)


def ring(n: int) -> tuple[tuple[int, int], ...]:
    if n < 2:
        return ()
    if n == 2:
        return ((0, 1),)
    return tuple((q, (q + 1) % n) for q in range(n))


def zero_state(n_qubits: int, batch: tuple[int, ...] = ()) -> np.ndarray:
    psi = np.zeros(batch + (2 ** n_qubits,), dtype=np.complex128)
    psi[..., 0] = 1.0
    return psi


def rx(theta) -> np.ndarray:
    """RX matrices, shape (..., 2, 2)."""
    t = np.asarray(theta, dtype=np.float64) / 2
    c, s = np.cos(t), np.sin(t)
    return np.stack([np.stack([c, -1j * s], -1), np.stack([-1j * s, c], -1)], -2)


def ry(theta) -> np.ndarray:
    t = np.asarray(theta, dtype=np.float64) / 2
    c, s = np.cos(t), np.sin(t)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2).astype(np.complex128)


def _n_qubits(psi: np.ndarray) -> int:
    n = psi.shape[-1].bit_length() - 1
    if psi.shape[-1] != 2 ** n:
        raise ShapeError(f"state length {psi.shape[-1]} is not a power of two")
    return n


def apply_1q(psi: np.ndarray, matrix, qubit: int) -> np.ndarray:
    """Apply a single-qubit gate; ``matrix`` may be (2, 2) or batched (..., 2, 2)."""
    n = _n_qubits(psi)
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for {n} qubits")
    m = np.asarray(matrix)
    batch = np.broadcast_shapes(psi.shape[:-1], m.shape[:-2])
    v = np.broadcast_to(psi, batch + psi.shape[-1:]).reshape(batch + (2 ** (n - 1 - qubit), 2, 2 ** qubit))
    m = m[..., None, :, :, None]  # (..., 1, 2, 2, 1)
    v0, v1 = v[..., 0, :], v[..., 1, :]
    out = np.empty_like(v)
    out[..., 0, :] = m[..., 0, 0, :] * v0 + m[..., 0, 1, :] * v1
    out[..., 1, :] = m[..., 1, 0, :] * v0 + m[..., 1, 1, :] * v1
    return out.reshape(batch + psi.shape[-1:])


def cz_phase(n_qubits: int, a: int, b: int) -> np.ndarray:
    idx = np.arange(2 ** n_qubits)
    both = ((idx >> a) & 1) & ((idx >> b) & 1)
    return np.where(both == 1, -1.0, 1.0)


def entangler_phase(n_qubits: int, pairs) -> np.ndarray:
    """Diagonal of the product of CZ gates over ``pairs`` (all CZs commute)."""
    phase = np.ones(2 ** n_qubits)
    for a, b in pairs:
        phase = phase * cz_phase(n_qubits, a, b)
    return phase


def apply_cz(psi: np.ndarray, a: int, b: int) -> np.ndarray:
    n = _n_qubits(psi)
    if a == b or not (0 <= a < n and 0 <= b < n):
        raise IndexError(f"invalid CZ pair ({a}, {b}) for {n} qubits")
    return psi * cz_phase(n, a, b)


def embed_noise(noise, n_qubits: int | None = None) -> np.ndarray:
    """|0...0> followed by RX(z_q) then RY(z_q) on every qubit.

    ``noise`` has shape (..., n); the result has shape (..., 2**n).
    Each qubit ends up in the product state RY(z)RX(z)|0>, so the state is
    built as a Kronecker product rather than by gate application.
    """
    z = np.asarray(noise, dtype=np.float64)
    n = z.shape[-1]
    if n_qubits is not None and n != n_qubits:
        raise ShapeError(f"noise has length {n}, circuit has {n_qubits} qubits")
    single = (ry(z) @ rx(z))[..., :, 0]  # (..., n, 2)
    psi = single[..., 0, :]
    for q in range(1, n):
        # qubit q is the more significant factor
        psi = (single[..., q, :, None] * psi[..., None, :]).reshape(z.shape[:-1] + (2 ** (q + 1),))
    return psi


def apply_layer(psi: np.ndarray, thetas, spec: CircuitSpec) -> np.ndarray:
    """RY(theta_q) on each qubit, then the CZ entangler ring.

    ``thetas`` is (..., n) and broadcasts against the batch axes of ``psi``.
    """
    t = np.asarray(thetas, dtype=np.float64)
    if t.shape[-1] != spec.n_qubits:
        raise ShapeError(f"expected {spec.n_qubits} angles, got {t.shape[-1]}")
    c, s = np.cos(t / 2), np.sin(t / 2)
    n = spec.n_qubits
    batch = np.broadcast_shapes(psi.shape[:-1], t.shape[:-1])
    psi = np.broadcast_to(psi, batch + psi.shape[-1:])
    for q in range(n):
        v = psi.reshape(batch + (2 ** (n - 1 - q), 2, 2 ** q))
        cq = c[..., q, None, None]
        sq = s[..., q, None, None]
        v0, v1 = v[..., 0, :], v[..., 1, :]
        psi = np.stack([cq * v0 - sq * v1, sq * v0 + cq * v1], axis=-2).reshape(batch + (2 ** n,))
    return psi * spec.cz_phase


def expect_x(psi: np.ndarray, qubit: int) -> np.ndarray:
    """<psi| X_qubit |psi>, real, over the batch axes of ``psi``."""
    n = _n_qubits(psi)
    if not 0 <= qubit < n:
        raise IndexError(f"qubit {qubit} out of range for {n} qubits")
    v = psi.reshape(psi.shape[:-1] + (2 ** (n - 1 - qubit), 2, 2 ** qubit))
    val = np.sum(np.conj(v[..., 0, :]) * v[..., 1, :], axis=(-2, -1))
    return 2.0 * val.real


def expect_x_all(psi: np.ndarray) -> np.ndarray:
    """(..., n) array of <X_q> for every qubit."""
    n = _n_qubits(psi)
    return np.stack([expect_x(psi, q) for q in range(n)], axis=-1)


def _check_params(spec: CircuitSpec, params) -> np.ndarray:
    p = np.asarray(params, dtype=np.float64)
    if p.shape[-2:] != (spec.n_layers, spec.n_qubits):
        raise ShapeError(f"params must end in shape {(spec.n_layers, spec.n_qubits)}, got {p.shape}")
    return p


def evolve(spec: CircuitSpec, psi: np.ndarray, params) -> np.ndarray:
    """Apply all trainable layers; ``params`` is (..., n_layers, n)."""
    p = _check_params(spec, params)
    for layer in range(spec.n_layers):
        psi = apply_layer(psi, p[..., layer, :], spec)
    return psi


def run_circuit(spec: CircuitSpec, noise, params) -> np.ndarray:
    """Pauli-X expectations of the full circuit, shape (..., n).

    ``noise`` (..., n) and ``params`` (..., n_layers, n) broadcast against
    each other over the leading axes.
    """
    psi = embed_noise(noise, spec.n_qubits)
    psi = evolve(spec, psi, params)
    return expect_x_all(psi)


def shifted_params(params: np.ndarray, shift: float = SHIFT) -> np.ndarray:
    """Stack of parameter sets with one angle shifted by +/- ``shift``.

    Input (..., L, n); output (..., 2, L*n, L, n) where index [..., 0, j]
    is the +shift copy for flat parameter j and [..., 1, j] the -shift copy.
    """
    lay, n = params.shape[-2:]
    m = lay * n
    eye = np.eye(m).reshape(m, lay, n)
    base = params[..., None, None, :, :]
    delta = np.stack([eye, -eye]) * shift
    return base + delta


def param_shift_grad(spec: CircuitSpec, noise, params, upstream) -> np.ndarray:
    """Gradient of sum_q upstream_q * <X_q> with respect to the RY angles.

    Uses the two-term shift rule (f(t + pi/2) - f(t - pi/2)) / 2, exact for
    gates generated by a Pauli.  Batched use: ``noise`` (B, n) and
    ``upstream`` (B, n) give the gradient summed over the B samples.
    ``params`` may carry extra leading axes (..., L, n), e.g. one entry per
    sub-generator, with ``noise``/``upstream`` shaped (..., B, n).
    """
    p = _check_params(spec, params)
    z = np.asarray(noise, dtype=np.float64)
    u = np.asarray(upstream, dtype=np.float64)
    if spec.n_params == 0:
        return np.zeros(p.shape)
    if z.shape[-1] != spec.n_qubits or u.shape[-1] != spec.n_qubits:
        raise ShapeError("noise and upstream must have one entry per qubit")
    batched = z.ndim >= 2
    if not batched:
        z, u = z[None], u[None]
    psi0 = embed_noise(z)  # (..., B, D)
    shifted = shifted_params(p)  # (..., 2, M, L, n)
    # evaluate all shifted circuits for every noise sample: (..., 2, M, B, D)
    psi = psi0[..., None, None, :, :]
    psi = evolve(spec, psi, shifted[..., None, :, :])
    ex = expect_x_all(psi)  # (..., 2, M, B, n)
    f = np.einsum("...smbn,...bn->...sm", ex, u)
    grad = 0.5 * (f[..., 0, :] - f[..., 1, :])
    return grad.reshape(p.shape)
