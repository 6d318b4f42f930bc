import copy
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mosaiq import checkpoint, disc, featmap, pca, qgen, trainer
from mosaiq.errors import DegenerateLossError, InsufficientSamplesError, RangeError, ShapeError

PI = math.pi


# --- adaptive noise -----------------------------------------------------------

def test_bound_examples():
    assert trainer.adaptive_noise_bound(2.0, 1.0, 2.0) == PI / 8
    assert trainer.adaptive_noise_bound(1.0, 1.0, 3.0) == PI / 8
    # pi/8 + (5pi/8) tanh(1) = 0.39269908 + 1.96349541 * 0.76159416
    assert trainer.adaptive_noise_bound(3.0, 1.0, 2.0) == pytest.approx(1.8880857, abs=1e-6)
    assert trainer.adaptive_noise_bound(3.0, 1.0, 2.0) == pytest.approx(PI / 8 + 5 * PI / 8 * math.tanh(1), abs=1e-15)


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6), st.floats(-100, 100))
def test_bound_range(d, g, r):
    assert PI / 8 <= trainer.adaptive_noise_bound(d, g, r) <= 3 * PI / 4


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(-10, 10))
def test_bound_monotone(d1, d2, g, r):
    lo, hi = sorted([d1, d2])
    assert trainer.adaptive_noise_bound(lo, g, r) <= trainer.adaptive_noise_bound(hi, g, r)


@pytest.mark.parametrize("d,g", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (float("nan"), 1.0)])
def test_bound_rejects_degenerate_losses(d, g):
    with pytest.raises(DegenerateLossError):
        trainer.adaptive_noise_bound(d, g, 1.0)


def test_sample_noise_support_and_mean():
    bound = 1.3
    z = trainer.sample_noise(bound, 100_000, np.random.default_rng(5))
    assert z.min() >= 0 and z.max() <= bound
    sigma = bound / math.sqrt(12 * z.size)
    assert abs(z.mean() - bound / 2) < 3 * sigma
    again = trainer.sample_noise(bound, 100_000, np.random.default_rng(5))
    np.testing.assert_array_equal(z, again)
    with pytest.raises(RangeError):
        trainer.sample_noise(0.0, 3, np.random.default_rng(0))


def test_parse_noise_mode():
    assert trainer.parse_noise_mode("adaptive")[0] == "adaptive"
    assert trainer.parse_noise_mode("fixed") == ("fixed", PI / 2)
    assert trainer.parse_noise_mode("fixed:0.4") == ("fixed", 0.4)
    with pytest.raises(ValueError):
        trainer.parse_noise_mode("wobbly")


def test_config_validation():
    assert trainer.TrainConfig().quantum_param_count == 240
    with pytest.raises(ShapeError):
        trainer.TrainConfig(k=30)
    with pytest.raises(ValueError):
        trainer.TrainConfig(batch=0)
    with pytest.raises(RangeError):
        trainer.TrainConfig(noise_mode="fixed", fixed_bound=0.0)


# --- classical baseline generator ---------------------------------------------

def test_classical_parameter_match(rng):
    config = trainer.TrainConfig()
    gen = trainer.ClassicalGenerator(config)
    params = gen.init(rng)
    assert gen.n_params(params) == config.quantum_param_count == 240
    out, _ = gen.forward(params, rng.uniform(0, PI, (50, 5)))
    assert out.shape == (50, 40)
    assert np.all((out >= 0) & (out <= 1))


@pytest.mark.parametrize("n_params,n_in,k", [(240, 5, 40), (37, 2, 6), (12, 3, 4)])
def test_classical_layout_is_exact(n_params, n_in, k):
    h, mask = trainer.classical_layout(n_params, n_in, k)
    assert h * (n_in + 1) + int(mask.sum()) + k == n_params


def test_classical_gradient_audit(rng):
    config = trainer.TrainConfig(k=6, sub_generators=3, n_qubits=2, n_layers=2)
    gen = trainer.ClassicalGenerator(config)
    params = gen.init(rng)
    z = rng.uniform(0, PI, (4, 2))
    u = rng.normal(size=(4, 6))
    out, cache = gen.forward(params, z)
    grads = gen.backward(params, z, u, cache)

    def f(p):
        return float(np.sum(gen.forward(p, z)[0] * u))

    h = 1e-6
    for name, arr in params.items():
        fd = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            plus = {k: v.copy() for k, v in params.items()}
            minus = {k: v.copy() for k, v in params.items()}
            plus[name][idx] += h
            minus[name][idx] -= h
            fd[idx] = (f(plus) - f(minus)) / (2 * h)
        fd = fd * gen.mask if name == "w2" else fd
        np.testing.assert_allclose(grads[name], fd, rtol=1e-5, atol=1e-9)


# --- single training steps -----------------------------------------------------

def tiny_setup(rng, lr_gen=0.3, lr_disc=0.05):
    config = trainer.TrainConfig(k=2, sub_generators=1, n_qubits=2, n_layers=1, batch=4,
                                 lr_gen=lr_gen, lr_disc=lr_disc)
    assignment = featmap.assign(2, 1)
    gen = trainer.QuantumGenerator(config, assignment)
    state = trainer.TrainState(gen.init(rng), disc.init_discriminator(2, rng), np.random.default_rng(3))
    state.noise_bound = 0.9
    real = rng.uniform(0, 1, (4, 2))
    return config, assignment, gen, state, real


def test_zero_learning_rates_are_pure_evaluation(rng):
    config, _, gen, state, real = tiny_setup(rng, 0.0, 0.0)
    before_g = copy.deepcopy(state.gen_params)
    before_d = copy.deepcopy(state.disc_params)
    trainer.train_step(state, config, real, gen)
    np.testing.assert_array_equal(state.gen_params["angles"], before_g["angles"])
    for a, b in zip(state.disc_params.arrays(), before_d.arrays()):
        np.testing.assert_array_equal(a, b)
    assert state.gen_loss > 0 and state.disc_loss > 0


def _d_loss(params, real, fake):
    b = len(real)
    pr, _ = disc.forward(params, real)
    pf, _ = disc.forward(params, fake)
    return float(disc.bce(pr, 1).sum() / b + disc.bce(pf, 0).sum() / b)


def _fd_mlp(fn, params, h=1e-6):
    grads = []
    for arr in params.arrays():
        g = np.zeros_like(arr)
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + h
            fp = fn(params)
            arr[idx] = old - h
            fm = fn(params)
            arr[idx] = old
            g[idx] = (fp - fm) / (2 * h)
        grads.append(g)
    return grads


def test_single_step_matches_finite_difference_descent(rng):
    config, assignment, gen, state, real = tiny_setup(rng)
    spec = config.circuit
    d0 = copy.deepcopy(state.disc_params)
    g0 = state.gen_params["angles"].copy()
    twin = copy.deepcopy(state.rng)
    z_d = trainer.sample_noise(state.noise_bound, (4, 2), twin)
    z_g = trainer.sample_noise(state.noise_bound, (4, 2), twin)

    trainer.train_step(state, config, real, gen)

    fake = qgen.generate_batch(g0, assignment, z_d, spec)
    d_grad = _fd_mlp(lambda p: _d_loss(p, real, fake), copy.deepcopy(d0))
    expected_d = [a - config.lr_disc * g for a, g in zip(d0.arrays(), d_grad)]
    for got, want in zip(state.disc_params.arrays(), expected_d):
        np.testing.assert_allclose(got, want, atol=1e-8)

    def g_loss(angles):
        p, _ = disc.forward(state.disc_params, qgen.generate_batch(angles, assignment, z_g, spec))
        return float(disc.bce(p, 1).mean())

    fd = np.zeros_like(g0)
    for idx in np.ndindex(g0.shape):
        d = np.zeros_like(g0)
        d[idx] = 1e-6
        fd[idx] = (g_loss(g0 + d) - g_loss(g0 - d)) / 2e-6
    np.testing.assert_allclose(state.gen_params["angles"], g0 - config.lr_gen * fd, atol=1e-8)
    assert state.disc_loss == pytest.approx(_d_loss(d0, real, fake), abs=1e-12)
    assert state.gen_loss == pytest.approx(g_loss(g0), abs=1e-12)


def test_disc_loss_falls_against_frozen_generator(rng):
    config, _, gen, state, _ = tiny_setup(rng, lr_gen=0.0, lr_disc=0.5)
    real_rng = np.random.default_rng(11)
    losses = []
    for _ in range(50):
        # real features live near one corner; the frozen generator does not
        real = 0.9 + 0.1 * real_rng.random((4, 2))
        trainer.train_step(state, config, real, gen)
        losses.append(state.disc_loss)
    assert np.mean(losses[-10:]) < np.mean(losses[:10])


def test_empty_batch(rng):
    config, _, gen, state, _ = tiny_setup(rng)
    with pytest.raises(InsufficientSamplesError):
        trainer.train_step(state, config, np.zeros((0, 2)), gen)


# --- full runs --------------------------------------------------------------

def small_config(**kw):
    base = dict(k=8, sub_generators=2, n_qubits=4, n_layers=2, batch=8, iterations=6, max_images=24, seed=4)
    base.update(kw)
    return trainer.TrainConfig(**base)


def test_zero_iterations(digit0):
    ckpt = trainer.train(small_config(iterations=0), digit0)
    assert ckpt.ratio0 is None
    assert ckpt.noise_bound == PI / 8
    assert ckpt.iteration == 0
    assert math.isnan(ckpt.gen_loss)


def test_ratio0_after_first_epoch(digit0):
    ckpt = trainer.train(small_config(), digit0)
    # 24 images in batches of 8: the first epoch is 3 iterations
    rows = ckpt.history
    assert [r[3] for r in rows[:2]] == [PI / 8, PI / 8]
    g, d = np.mean([r[1] for r in rows[:3]]), np.mean([r[2] for r in rows[:3]])
    assert ckpt.ratio0 == pytest.approx(g / d, rel=1e-15)
    for it, gl, dl, bound in rows[2:]:
        assert bound == pytest.approx(trainer.adaptive_noise_bound(dl, gl, ckpt.ratio0), abs=1e-15)
        assert PI / 8 <= bound <= 3 * PI / 4


def test_partial_last_batch(digit0):
    ckpt = trainer.train(small_config(max_images=20, iterations=4), digit0)
    assert ckpt.ratio0 is not None  # epoch = 3 iterations (8, 8, 4)


def test_fixed_mode_keeps_bound(digit0):
    ckpt = trainer.train(small_config(noise_mode="fixed", fixed_bound=0.7), digit0)
    assert all(r[3] == 0.7 for r in ckpt.history)


def test_determinism(digit0):
    a = trainer.train(small_config(), digit0)
    b = trainer.train(small_config(), digit0)
    assert checkpoint.to_bytes(a) == checkpoint.to_bytes(b)
    assert a.history == b.history
    c = trainer.train(small_config(seed=5), digit0)
    assert checkpoint.to_bytes(a) != checkpoint.to_bytes(c)


def test_sampling(digit0):
    ckpt = trainer.train(small_config(), digit0)
    imgs = trainer.sample_images(ckpt, 10, np.random.default_rng(0))
    assert imgs.shape == (10, 784)
    assert imgs.min() >= 0 and imgs.max() <= 1
    assert trainer.sample_images(ckpt, 0, np.random.default_rng(0)).shape == (0, 784)


def test_classical_baseline_run(digit0):
    ckpt = trainer.baseline_classical_pca(small_config(), digit0)
    assert ckpt.config.generator == "classical"
    assert ckpt.gen_param_count == small_config().quantum_param_count


def test_pca_inverse_baseline(digit0):
    model = pca.fit(digit0.images, 40)
    assert trainer.baseline_pca_inverse(model, 0, np.random.default_rng(0)).shape == (0, 784)
    out = trainer.baseline_pca_inverse(model, 10_000, np.random.default_rng(1))
    assert out.min() >= 0 and out.max() <= 1
    u = np.random.default_rng(1).uniform(0, 1, (10_000, 40))
    np.testing.assert_array_equal(out, pca.inverse(model, u))
    # before the clamp the map is affine, so the sample mean tracks inverse(0.5)
    raw = pca.inverse(model, u, clamp=False)
    centre = pca.inverse(model, np.full(40, 0.5), clamp=False)
    se = raw.std(axis=0) / math.sqrt(len(raw))
    assert np.all(np.abs(raw.mean(axis=0) - centre) <= 5 * se + 1e-12)
