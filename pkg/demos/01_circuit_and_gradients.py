"""
The sub-generator circuit and its gradients
===========================================

One sub-generator is a five-qubit circuit: the noise vector is written into
the qubits with RX and RY rotations, six layers of trainable RY rotations
follow (each closed by a ring of CZ gates), and the Pauli-X expectation of
every qubit is read out.
"""
import numpy as np

from mosaiq import qsim

spec = qsim.CircuitSpec(n_qubits=5, n_layers=6)
rng = np.random.default_rng(0)

# a single circuit: 5 noise angles in, 5 expectations in [-1, 1] out
noise = rng.uniform(0, np.pi / 2, 5)
params = rng.uniform(0, np.pi, (6, 5))
print("<X_q> =", np.round(qsim.run_circuit(spec, noise, params), 4))

# the simulator is batched: 1000 noise draws through the same circuit at once
batch = qsim.run_circuit(spec, rng.uniform(0, np.pi / 2, (1000, 5)), params)
print("batch output", batch.shape, "spread per qubit", np.round(batch.std(axis=0), 3))

# gradients come from the parameter-shift rule, which is exact for RY gates:
# compare it against central finite differences on a weighted output sum
upstream = rng.normal(size=5)
grad = qsim.param_shift_grad(spec, noise, params, upstream)

h = 1e-5
fd = np.zeros_like(params)
for idx in np.ndindex(params.shape):
    step = np.zeros_like(params)
    step[idx] = h
    plus = qsim.run_circuit(spec, noise, params + step) @ upstream
    minus = qsim.run_circuit(spec, noise, params - step) @ upstream
    fd[idx] = (plus - minus) / (2 * h)
print("max |shift rule - finite difference| =", np.abs(grad - fd).max())
