"""Adversarial training of the generator ensemble against the discriminator.

Each iteration does one discriminator SGD step (real features labelled 1,
generated labelled 0) and one generator SGD step (non-saturating BCE
against label 1), each phase with fresh noise.  The noise is uniform on
[0, bound]; in adaptive mode the bound follows the loss balance:

    bound = pi/8 + 5pi/8 * relu(tanh(D_L / G_L - ratio0))

where ratio0 = G_L0 / D_L0 is taken from the mean losses of the first
epoch.  Until that first epoch completes the bound stays at pi/8.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import disc, pca, qgen, qsim
from .dataio import ImageSet
from .errors import (
    DegenerateLossError,
    InsufficientSamplesError,
    NumericError,
    RangeError,
    ShapeError,
)
from .featmap import FeatureAssignment, assign

MIN_BOUND = math.pi / 8
MAX_BOUND = 3 * math.pi / 4
FIXED_DEFAULT = math.pi / 2

QUANTUM = "quantum"
CLASSICAL = "classical"


@dataclass(frozen=True)
class TrainConfig:
    k: int = 40
    sub_generators: int = 8
    n_qubits: int = 5
    n_layers: int = 6
    batch: int = 8
    iterations: int = 500
    lr_gen: float = 0.3
    lr_disc: float = 0.05
    seed: int = 0
    class_id: int = 0
    noise_mode: str = "adaptive"  # "adaptive" or "fixed"
    fixed_bound: float = FIXED_DEFAULT
    generator: str = QUANTUM
    max_images: int | None = None

    def __post_init__(self):
        counts = (self.k, self.sub_generators, self.n_qubits, self.batch)
        if min(counts) < 1 or self.n_layers < 0 or self.iterations < 0:
            raise ValueError("counts must be positive")
        if self.k != self.sub_generators * self.n_qubits:
            raise ShapeError(f"k={self.k} must equal sub_generators*n_qubits="
                             f"{self.sub_generators * self.n_qubits}")
        if self.lr_gen < 0 or self.lr_disc < 0:
            raise ValueError("learning rates must be non-negative")
        if self.noise_mode not in ("adaptive", "fixed"):
            raise ValueError(f"unknown noise mode {self.noise_mode!r}")
        if not self.fixed_bound > 0:
            raise RangeError("fixed noise bound must be positive")
        if self.generator not in (QUANTUM, CLASSICAL):
            raise ValueError(f"unknown generator kind {self.generator!r}")
        if self.max_images is not None and self.max_images < 1:
            raise ValueError("max_images must be positive")

    @property
    def circuit(self) -> qsim.CircuitSpec:
        return qsim.CircuitSpec(self.n_qubits, self.n_layers)

    @property
    def quantum_param_count(self) -> int:
        return self.sub_generators * self.n_layers * self.n_qubits


def parse_noise_mode(text: str) -> tuple[str, float]:
    """``"adaptive"``, ``"fixed"`` or ``"fixed:<bound>"`` -> (mode, fixed bound)."""
    if text == "adaptive":
        return "adaptive", FIXED_DEFAULT
    if text == "fixed":
        return "fixed", FIXED_DEFAULT
    if text.startswith("fixed:"):
        return "fixed", float(text.split(":", 1)[1])
    raise ValueError(f"noise mode must be 'adaptive' or 'fixed[:bound]', got {text!r}")


def adaptive_noise_bound(d_loss: float, g_loss: float, ratio0: float) -> float:
    if not (d_loss > 0 and g_loss > 0):
        raise DegenerateLossError(f"losses must be positive, got D_L={d_loss}, G_L={g_loss}")
    x = d_loss / g_loss - ratio0
    return MIN_BOUND + (5 * math.pi / 8) * max(math.tanh(x), 0.0)


def sample_noise(bound: float, dim, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. uniform angles on [0, bound]; ``dim`` is an int or a shape."""
    if not bound > 0:
        raise RangeError(f"noise bound must be positive, got {bound}")
    return rng.uniform(0.0, bound, size=dim)


# --- generators -------------------------------------------------------------

class QuantumGenerator:
    kind = QUANTUM

    def __init__(self, config: TrainConfig, assignment: FeatureAssignment):
        self.spec = config.circuit
        self.assignment = assignment
        self.g = config.sub_generators

    def init(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        return {"angles": qgen.init_params(self.g, self.spec, rng)}

    def n_params(self, params) -> int:
        return params["angles"].size

    def forward(self, params, noise):
        return qgen.generate_batch(params["angles"], self.assignment, noise, self.spec), None

    def backward(self, params, noise, upstream, cache):
        return {"angles": qgen.backward(params["angles"], self.assignment, noise, upstream, self.spec)}


def classical_layout(n_params: int, n_in: int, k: int) -> tuple[int, np.ndarray]:
    """Hidden width and output-connectivity mask giving exactly ``n_params``.

    Layout: noise (n_in) -> tanh hidden (h, full weights + bias) -> sigmoid
    output (k, bias + masked weights).  The mask fills hidden unit 0's
    connections to every output, then unit 1's, and so on, so only the
    last hidden unit can be partially connected.
    """
    rest = n_params - k
    if rest < 0:
        raise ShapeError(f"{n_params} parameters cannot cover {k} output biases")
    h = math.ceil(rest / (n_in + 1 + k))
    while h >= 0:
        nnz = rest - h * (n_in + 1)
        if 0 <= nnz <= h * k:
            break
        h -= 1
    else:
        raise ShapeError(f"no classical layout with exactly {n_params} parameters")
    flat = np.zeros(h * k, dtype=bool)
    flat[:nnz] = True
    # flat index t -> hidden unit t // k, output t % k
    mask = flat.reshape(h, k).T.copy()
    return h, mask


class ClassicalGenerator:
    """Parameter-matched classical stand-in for the quantum ensemble."""

    kind = CLASSICAL

    def __init__(self, config: TrainConfig):
        self.n_in = config.n_qubits
        self.k = config.k
        self.hidden, self.mask = classical_layout(config.quantum_param_count, self.n_in, self.k)

    def init(self, rng):
        h, n = self.hidden, self.n_in
        s1 = 1.0 / math.sqrt(n)
        s2 = 1.0 / math.sqrt(max(h, 1))
        return {
            "w1": rng.uniform(-s1, s1, size=(h, n)),
            "b1": rng.uniform(-s1, s1, size=h),
            "w2": rng.uniform(-s2, s2, size=(self.k, h)) * self.mask,
            "b2": rng.uniform(-s2, s2, size=self.k),
        }

    def n_params(self, params) -> int:
        return params["w1"].size + params["b1"].size + int(self.mask.sum()) + params["b2"].size

    def forward(self, params, noise):
        z = np.atleast_2d(noise)
        hid = np.tanh(z @ params["w1"].T + params["b1"])
        out = disc.sigmoid(hid @ (params["w2"] * self.mask).T + params["b2"])
        return out, (z, hid, out)

    def backward(self, params, noise, upstream, cache):
        z, hid, out = cache
        d_pre = upstream * out * (1.0 - out)
        d_hid = (d_pre @ (params["w2"] * self.mask)) * (1.0 - hid ** 2)
        return {
            "w1": d_hid.T @ z,
            "b1": d_hid.sum(axis=0),
            "w2": (d_pre.T @ hid) * self.mask,
            "b2": d_pre.sum(axis=0),
        }


def make_generator(config: TrainConfig, assignment: FeatureAssignment):
    if config.generator == CLASSICAL:
        return ClassicalGenerator(config)
    return QuantumGenerator(config, assignment)


# --- training ---------------------------------------------------------------

@dataclass
class TrainState:
    gen_params: dict[str, np.ndarray]
    disc_params: disc.MlpParams
    rng: np.random.Generator
    gen_loss: float = math.nan
    disc_loss: float = math.nan
    ratio0: float | None = None
    iteration: int = 0
    noise_bound: float = MIN_BOUND


@dataclass
class Checkpoint:
    config: TrainConfig
    pca: pca.PcaModel
    assignment: FeatureAssignment
    gen_params: dict[str, np.ndarray]
    disc_params: disc.MlpParams
    ratio0: float | None
    gen_loss: float
    disc_loss: float
    noise_bound: float
    iteration: int
    history: list[tuple[int, float, float, float]] = field(default_factory=list, compare=False)

    @property
    def generator(self):
        return make_generator(self.config, self.assignment)

    @property
    def gen_param_count(self) -> int:
        return self.generator.n_params(self.gen_params)


def _next_bound(config: TrainConfig, state: TrainState) -> float:
    if config.noise_mode == "fixed":
        return config.fixed_bound
    if state.ratio0 is None:
        return MIN_BOUND
    return adaptive_noise_bound(state.disc_loss, state.gen_loss, state.ratio0)


def train_step(state: TrainState, config: TrainConfig, real_features, generator) -> TrainState:
    """One discriminator update followed by one generator update.

    ``state`` is updated in place (and returned); ``gen_loss``/``disc_loss``
    hold this step's batch-mean losses, measured before each update.
    """
    real = np.atleast_2d(np.asarray(real_features, dtype=np.float64))
    b = len(real)
    if b == 0:
        raise InsufficientSamplesError("empty training batch")
    n_in = config.n_qubits
    rng = state.rng

    z = sample_noise(state.noise_bound, (b, n_in), rng)
    fake, _ = generator.forward(state.gen_params, z)
    both = np.concatenate([real, fake])
    labels = np.concatenate([np.ones(b), np.zeros(b)])
    prob, cache = disc.forward(state.disc_params, both)
    # D_L = mean BCE on the real batch + mean BCE on the fake batch
    d_loss = float(disc.bce(prob, labels).sum() / b)
    d_grads, _ = disc.backward(state.disc_params, cache, disc.bce_grad(prob, labels) / b)
    state.disc_params = disc.sgd_step(state.disc_params, d_grads, config.lr_disc)

    z = sample_noise(state.noise_bound, (b, n_in), rng)
    fake, g_cache = generator.forward(state.gen_params, z)
    prob, cache = disc.forward(state.disc_params, fake)
    g_loss = float(disc.bce(prob, 1.0).mean())
    _, d_feat = disc.backward(state.disc_params, cache, disc.bce_grad(prob, 1.0) / b)
    g_grads = generator.backward(state.gen_params, z, d_feat, g_cache)
    state.gen_params = {name: p - config.lr_gen * g_grads[name] for name, p in state.gen_params.items()}

    if not (math.isfinite(d_loss) and math.isfinite(g_loss)):
        raise NumericError(f"non-finite loss at iteration {state.iteration}")
    state.gen_loss, state.disc_loss = g_loss, d_loss
    state.iteration += 1
    state.noise_bound = _next_bound(config, state)
    return state


def _class_pixels(images, config: TrainConfig) -> np.ndarray:
    x = images.images if isinstance(images, ImageSet) else np.atleast_2d(np.asarray(images, dtype=np.float64))
    if config.max_images is not None:
        x = x[: config.max_images]
    if len(x) == 0:
        raise InsufficientSamplesError("no training images")
    return x


def train(config: TrainConfig, images, on_step: Callable[[tuple], None] | None = None) -> Checkpoint:
    """Fit PCA on one class's images and run ``config.iterations`` steps.

    ``on_step`` receives each log row ``(iteration, G_L, D_L, noise_bound)``.
    """
    x = _class_pixels(images, config)
    model = pca.fit(x, config.k)
    feats = pca.transform(model, x)
    assignment = assign(config.k, config.sub_generators)
    generator = make_generator(config, assignment)

    init_seq, run_seq = np.random.SeedSequence(config.seed).spawn(2)
    init_rng = np.random.default_rng(init_seq)
    gen_params = generator.init(init_rng)
    d_params = disc.init_discriminator(config.k, init_rng)
    state = TrainState(gen_params, d_params, np.random.default_rng(run_seq))
    state.noise_bound = _next_bound(config, state)

    n = len(feats)
    per_epoch = math.ceil(n / config.batch)
    order = np.arange(n)
    epoch_g, epoch_d = [], []
    history = []
    for it in range(config.iterations):
        slot = it % per_epoch
        if slot == 0:
            order = state.rng.permutation(n)
        batch = feats[order[slot * config.batch:(slot + 1) * config.batch]]
        train_step(state, config, batch, generator)
        if state.ratio0 is None:
            epoch_g.append(state.gen_loss)
            epoch_d.append(state.disc_loss)
            if slot == per_epoch - 1:
                state.ratio0 = float(np.mean(epoch_g) / np.mean(epoch_d))
                state.noise_bound = _next_bound(config, state)
        row = (state.iteration, state.gen_loss, state.disc_loss, state.noise_bound)
        history.append(row)
        if on_step is not None:
            on_step(row)

    return Checkpoint(
        config=config,
        pca=model,
        assignment=assignment,
        gen_params=state.gen_params,
        disc_params=state.disc_params,
        ratio0=state.ratio0,
        gen_loss=state.gen_loss,
        disc_loss=state.disc_loss,
        noise_bound=state.noise_bound,
        iteration=state.iteration,
        history=history,
    )


def sample_features(ckpt: Checkpoint, count: int, rng: np.random.Generator,
                    bound: float | None = None) -> np.ndarray:
    """Generated (count, k) features; noise bound defaults to the final training bound."""
    bound = ckpt.noise_bound if bound is None else bound
    z = sample_noise(bound, (count, ckpt.config.n_qubits), rng)
    if count == 0:
        return np.zeros((0, ckpt.config.k))
    feats, _ = ckpt.generator.forward(ckpt.gen_params, z)
    return feats


def sample_images(ckpt: Checkpoint, count: int, rng: np.random.Generator,
                  bound: float | None = None) -> np.ndarray:
    """Noise -> generators -> unscale -> inverse PCA, as (count, 784) pixels."""
    feats = sample_features(ckpt, count, rng, bound)
    if count == 0:
        return np.zeros((0, ckpt.pca.mean.size))
    return pca.inverse(ckpt.pca, feats)


def baseline_pca_inverse(model: pca.PcaModel, count: int, rng: np.random.Generator) -> np.ndarray:
    """Learning-free baseline: uniform random features pushed through inverse PCA."""
    if count == 0:
        return np.zeros((0, model.mean.size))
    return pca.inverse(model, rng.uniform(0.0, 1.0, size=(count, model.k)))


def baseline_classical_pca(config: TrainConfig, images, on_step=None) -> Checkpoint:
    """Same pipeline with the parameter-matched classical generator."""
    return train(replace(config, generator=CLASSICAL), images, on_step=on_step)
