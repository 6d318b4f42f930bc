"""Quantum generator: an ensemble of identical sub-generator circuits.

Every sub-generator sees the same noise vector.  Its Pauli-X expectations
are mapped from [-1, 1] to [0, 1] with (x + 1) / 2 and scattered back into
principal-component order through the feature assignment.
"""
from __future__ import annotations

import numpy as np

from . import qsim
from .errors import ShapeError
from .featmap import FeatureAssignment, scatter


def init_params(g: int, spec: qsim.CircuitSpec, rng: np.random.Generator) -> np.ndarray:
    """Angles drawn uniformly from [0, pi), shape (G, n_layers, n_qubits)."""
    return rng.uniform(0.0, np.pi, size=(g, spec.n_layers, spec.n_qubits))


def _check(params, assignment: FeatureAssignment, spec: qsim.CircuitSpec) -> np.ndarray:
    p = np.asarray(params, dtype=np.float64)
    want = (assignment.g, spec.n_layers, spec.n_qubits)
    if p.shape != want:
        raise ShapeError(f"generator params have shape {p.shape}, expected {want}")
    if assignment.n != spec.n_qubits:
        raise ShapeError(f"assignment puts {assignment.n} features on {spec.n_qubits}-qubit circuits")
    if not np.all(np.isfinite(p)):
        raise ValueError("generator params are not finite")
    return p


def generate_batch(params, assignment: FeatureAssignment, noises, spec: qsim.CircuitSpec) -> np.ndarray:
    """(B, n_qubits) noise rows -> (B, k) features in [0, 1]."""
    p = _check(params, assignment, spec)
    z = np.asarray(noises, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != spec.n_qubits:
        raise ShapeError(f"noises must be (B, {spec.n_qubits}), got {z.shape}")
    psi = qsim.embed_noise(z)  # (B, D), shared across sub-generators
    psi = np.broadcast_to(psi, (len(p),) + psi.shape)
    psi = qsim.evolve(spec, psi, p[:, None])  # (G, B, D)
    ex = qsim.expect_x_all(psi)  # (G, B, n)
    parts = (ex + 1.0) / 2.0
    return scatter(assignment, np.swapaxes(parts, 0, 1))


def generate(params, assignment: FeatureAssignment, noise, spec: qsim.CircuitSpec) -> np.ndarray:
    z = np.asarray(noise, dtype=np.float64)
    if z.ndim != 1:
        raise ShapeError("generate takes a single noise vector")
    return generate_batch(params, assignment, z[None], spec)[0]


def backward(params, assignment: FeatureAssignment, noises, upstream, spec: qsim.CircuitSpec) -> np.ndarray:
    """Gradient of sum_b upstream[b] . generate(noise[b]) w.r.t. the params.

    Accepts a single noise/upstream vector or a batch of rows.
    """
    p = _check(params, assignment, spec)
    z = np.atleast_2d(np.asarray(noises, dtype=np.float64))
    u = np.atleast_2d(np.asarray(upstream, dtype=np.float64))
    if u.shape != (len(z), assignment.k):
        raise ShapeError(f"upstream must be ({len(z)}, {assignment.k}), got {u.shape}")
    # d output / d <X> = 1/2; route each sub-generator's slice to its circuit
    slots = 0.5 * u[:, assignment.index]  # (B, G, n)
    return qsim.param_shift_grad(spec, z, p, np.swapaxes(slots, 0, 1))
