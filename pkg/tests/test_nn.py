import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sensorveil import nn


def identity_net(dim, activation="linear"):
    layers = [nn.Layer(np.eye(dim), np.zeros(dim), activation)]
    return nn.DenseNet(layers)


def random_net(sizes, activations, seed=0):
    return nn.build_net(sizes, activations, np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# forward

def test_linear_identity_forward():
    net = identity_net(3)
    out, _ = nn.forward(net, [[1.0, 2.0, 3.0]])
    np.testing.assert_array_equal(out, [[1.0, 2.0, 3.0]])


def test_softmax_symmetry():
    net = identity_net(2, "softmax")
    out, _ = nn.forward(net, [[0.0, 0.0]])
    np.testing.assert_allclose(out, [[0.5, 0.5]], atol=1e-12)


def test_selu_negative_one():
    # lambda * alpha * (e^-1 - 1) with the published constants
    net = identity_net(1, "selu")
    out, _ = nn.forward(net, [[-1.0]])
    assert out[0, 0] == pytest.approx(-1.1113307378125625, abs=1e-12)


def test_forward_shape_error():
    net = identity_net(3)
    with pytest.raises(nn.ShapeError):
        nn.forward(net, [[1.0, 2.0]])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.floats(-15, 15), min_size=4, max_size=4), min_size=1, max_size=6))
def test_softmax_rows_sum_to_one(rows):
    # logit gaps bounded so float64 cannot saturate an entry to exactly 0 or 1
    net = identity_net(4, "softmax")
    out, _ = nn.forward(net, np.array(rows))
    assert np.all(out > 0) and np.all(out < 1)
    np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-6)


def test_softmax_extreme_logits_still_sum_to_one():
    net = identity_net(4, "softmax")
    out, _ = nn.forward(net, [[0.0, 0.0, 0.0, 800.0], [-700.0, 0.0, 0.0, 0.0]])
    assert np.all(np.isfinite(out))
    np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-20, 20), min_size=4, max_size=4),
       st.floats(-30, 30))
def test_softmax_shift_invariance(logits, shift):
    net = identity_net(4, "softmax")
    base, _ = nn.forward(net, [logits])
    shifted, _ = nn.forward(net, [np.array(logits) + shift])
    np.testing.assert_allclose(base, shifted, atol=1e-9)


def test_dropout_infer_mode_is_clean():
    net = random_net([5, 8, 5], ["selu", "linear"], seed=3)
    x = np.random.default_rng(1).normal(size=(4, 5))
    a, _ = nn.forward(net, x, mode="infer")
    b, _ = nn.forward(net, x, mode="infer", dropout_rate=0.5)
    np.testing.assert_array_equal(a, b)


def test_dropout_zero_rate_equals_infer():
    net = random_net([5, 8, 5], ["selu", "linear"], seed=3)
    x = np.random.default_rng(1).normal(size=(4, 5))
    a, _ = nn.forward(net, x, mode="infer")
    b, _ = nn.forward(net, x, mode="train", rng=np.random.default_rng(0), dropout_rate=0.0)
    np.testing.assert_array_equal(a, b)


def test_dropout_mask_scaling():
    # surviving units are scaled by 1/(1-p), dropped units are exactly zero
    net = identity_net(1000)
    x = np.ones((1, 1000))
    out, cache = nn.forward(net, x, mode="train", rng=np.random.default_rng(7), dropout_rate=0.4)
    assert cache.masks[-1] is None  # never on the output layer
    # output layer is last, so mask applies to nothing here; check a 2-layer net
    net2 = nn.DenseNet([nn.Layer(np.eye(1000), np.zeros(1000), "linear"),
                        nn.Layer(np.eye(1000), np.zeros(1000), "linear")])
    out2, cache2 = nn.forward(net2, x, mode="train", rng=np.random.default_rng(7), dropout_rate=0.4)
    vals = np.unique(out2)
    assert set(np.round(vals, 12)) <= {0.0, round(1 / 0.6, 12)}
    kept = (out2 != 0).mean()
    assert 0.5 < kept < 0.7


# ---------------------------------------------------------------------------
# losses

def test_mse_zero_case():
    x = np.arange(6, dtype=float).reshape(2, 3)
    loss, grad = nn.mse_loss(x, x)
    assert loss == 0.0
    np.testing.assert_array_equal(grad, np.zeros_like(x))


def test_cross_entropy_hand_value():
    loss, _ = nn.cross_entropy_loss([[0.25, 0.75]], [[0.0, 1.0]])
    assert loss == pytest.approx(0.2876820724517809, abs=1e-12)


def test_identity_penalty_hand_value():
    # two labels, uniform adversary: -(log .5 + log .5) = 2 ln 2
    loss, _ = nn.identity_penalty([[0.5, 0.5]], [[1.0, 0.0]])
    assert loss == pytest.approx(1.3862943611198906, abs=1e-12)


def test_identity_penalty_confident_adversary_is_finite():
    loss, grad = nn.identity_penalty([[1.0, 0.0]], [[1.0, 0.0]])
    assert np.isfinite(loss) and loss > 10
    assert np.all(np.isfinite(grad))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.01, 10), min_size=2, max_size=6), st.data())
def test_identity_penalty_nonnegative(raw, data):
    p = np.array(raw) / np.sum(raw)
    true = data.draw(st.integers(0, len(raw) - 1))
    onehot = np.zeros(len(raw))
    onehot[true] = 1.0
    loss, _ = nn.identity_penalty([p], [onehot])
    assert loss >= 0.0


def test_identity_penalty_monotone_in_true_prob():
    # raising the true-label probability (mass taken evenly from others)
    # strictly raises the penalty
    losses = []
    for p_true in (0.2, 0.4, 0.6, 0.8):
        rest = (1 - p_true) / 3
        loss, _ = nn.identity_penalty([[p_true, rest, rest, rest]], [[1, 0, 0, 0]])
        losses.append(loss)
    assert all(b > a for a, b in zip(losses, losses[1:]))


def test_composite_decomposition():
    rng = np.random.default_rng(5)
    w = nn.Composite(0.7, 1.3, 2.0)
    out = rng.normal(size=(4, 6))
    orig = rng.normal(size=(4, 6))
    aux = nn.CompositeBatch(
        identity_probs=[rng.dirichlet(np.ones(3), size=4), rng.dirichlet(np.ones(3), size=4)],
        identity_true=np.eye(3)[rng.integers(0, 3, 4)],
        activity_probs=rng.dirichlet(np.ones(5), size=4),
        activity_true=np.eye(5)[rng.integers(0, 5, 4)],
    )
    res = nn.composite_loss(w, out, orig, aux)
    recombined = 0.7 * res.identity - 1.3 * res.activity + 2.0 * res.distance
    assert res.total == pytest.approx(recombined, abs=1e-9)


def test_composite_rejects_negative_weights():
    with pytest.raises(ValueError):
        nn.Composite(-0.1, 1.0, 1.0)


# ---------------------------------------------------------------------------
# backward

def test_zero_upstream_gradient():
    net = random_net([4, 6, 3], ["selu", "linear"], seed=2)
    x = np.random.default_rng(0).normal(size=(5, 4))
    _, cache = nn.forward(net, x)
    grads, d_in = nn.backward(net, cache, np.zeros((5, 3)))
    for dw, db in grads.layers:
        assert not dw.any() and not db.any()
    assert not d_in.any()


def test_backward_closed_form_linear_mse():
    # scalar net y = w*x + b, loss (y-t)^2: dL/dw = 2(wx+b-t)x, dL/db = 2(wx+b-t)
    w, b, x, t = 1.7, 0.3, 2.0, -1.0
    net = nn.DenseNet([nn.Layer(np.array([[w]]), np.array([b]), "linear")])
    out, cache = nn.forward(net, [[x]])
    loss, d_out = nn.mse_loss(out, [[t]])
    grads, _ = nn.backward(net, cache, d_out)
    resid = w * x + b - t
    assert grads.layers[0][0][0, 0] == pytest.approx(2 * resid * x, rel=1e-12)
    assert grads.layers[0][1][0] == pytest.approx(2 * resid, rel=1e-12)


def _numeric_grads(loss_fn, net, h=1e-6):
    """Test-local central differences, independent of nn.gradient_check."""
    out = []
    for layer in net.layers:
        for param in (layer.weights, layer.bias):
            g = np.zeros_like(param)
            flat, gflat = param.ravel(), g.ravel()
            for i in range(flat.size):
                s = flat[i]
                flat[i] = s + h
                hi = loss_fn()
                flat[i] = s - h
                lo = loss_fn()
                flat[i] = s
                gflat[i] = (hi - lo) / (2 * h)
            out.append(g)
    return out


@pytest.mark.parametrize("sizes,acts,kind", [
    ([3, 5, 2], ["selu", "softmax"], "cce"),
    ([3, 4, 3], ["tanh", "softmax"], "identity"),
    ([4, 6, 4], ["sigmoid", "linear"], "mse"),
    ([4, 5, 3, 4], ["selu", "tanh", "linear"], "mse"),
])
def test_backward_matches_test_local_finite_differences(sizes, acts, kind):
    rng = np.random.default_rng(11)
    net = random_net(sizes, acts, seed=13)
    x = rng.normal(size=(6, sizes[0]))
    if kind == "mse":
        targets = rng.normal(size=(6, sizes[-1]))
    else:
        targets = np.eye(sizes[-1])[rng.integers(0, sizes[-1], 6)]

    def loss_fn():
        out, _ = nn.forward(net, x)
        loss, _ = nn.compute_loss(kind, out, targets)
        return loss

    out, cache = nn.forward(net, x)
    _, d_out = nn.compute_loss(kind, out, targets)
    grads, _ = nn.backward(net, cache, d_out)
    numeric = _numeric_grads(loss_fn, net)
    analytic = [g for pair in grads.layers for g in pair]
    for a, n in zip(analytic, numeric):
        np.testing.assert_allclose(a, n, rtol=1e-4, atol=1e-7)


def test_l2_term_consistent_with_gradient():
    net = random_net([3, 4, 2], ["selu", "linear"], seed=9)
    x = np.random.default_rng(4).normal(size=(5, 3))
    t = np.random.default_rng(5).normal(size=(5, 2))
    lam = 0.05

    def loss_fn():
        out, _ = nn.forward(net, x)
        loss, _ = nn.mse_loss(out, t)
        return loss + nn.l2_penalty(net, lam)

    out, cache = nn.forward(net, x)
    _, d_out = nn.mse_loss(out, t)
    grads, _ = nn.backward(net, cache, d_out, l2_lambda=lam)
    numeric = _numeric_grads(loss_fn, net)
    analytic = [g for pair in grads.layers for g in pair]
    for a, n in zip(analytic, numeric):
        np.testing.assert_allclose(a, n, rtol=1e-4, atol=1e-7)


def test_backward_stale_cache_shape_error():
    net = random_net([3, 4, 2], ["selu", "linear"])
    other = random_net([3, 5, 5, 2], ["selu", "selu", "linear"])
    x = np.zeros((2, 3))
    _, cache = nn.forward(net, x)
    with pytest.raises(nn.ShapeError):
        nn.backward(other, cache, np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# gradient_check (the product-side checker)

def test_gradient_check_linear_mse_tight():
    net = random_net([3, 4, 2], ["linear", "linear"], seed=21)
    batch = np.random.default_rng(2).normal(size=(4, 3))
    res = nn.gradient_check(net, batch, "mse", tolerance=1e-6)
    assert res.passed, res.max_rel_error


def test_gradient_check_selu_cce():
    net = random_net([4, 6, 3], ["selu", "softmax"], seed=22)
    batch = np.random.default_rng(3).normal(size=(5, 4))
    res = nn.gradient_check(net, batch, "cce", tolerance=1e-4)
    assert res.passed, res.max_rel_error


def test_gradient_check_composite():
    net = random_net([4, 6, 4], ["selu", "linear"], seed=23)
    batch = np.random.default_rng(6).normal(size=(4, 4))
    res = nn.gradient_check(net, batch, nn.Composite(0.9, 1.1, 0.7), tolerance=1e-4)
    assert res.passed, res.max_rel_error


def test_gradient_check_detects_corruption():
    # doubling one analytic gradient entry must fail the check; emulate by
    # doubling a weight's contribution via a wrapped loss comparison
    net = random_net([3, 5, 2], ["selu", "linear"], seed=24)
    batch = np.random.default_rng(8).normal(size=(4, 3))
    res = nn.gradient_check(net, batch, "mse")
    assert res.passed

    real_backward = nn.backward

    def corrupted(netx, cache, d_out, l2_lambda=0.0):
        grads, d_in = real_backward(netx, cache, d_out, l2_lambda=l2_lambda)
        grads.layers[0][0][0, 0] *= 2.0
        return grads, d_in

    nn.backward = corrupted
    try:
        res2 = nn.gradient_check(net, batch, "mse")
    finally:
        nn.backward = real_backward
    assert not res2.passed


# ---------------------------------------------------------------------------
# Adam

def test_adam_zero_gradient_noop():
    net = random_net([3, 4, 2], ["selu", "linear"], seed=31)
    before = net.copy()
    grads = nn.Gradients([(np.zeros_like(l.weights), np.zeros_like(l.bias))
                          for l in net.layers])
    state = nn.init_adam(net)
    nn.adam_step(net, grads, state)
    assert state.step == 1
    for a, b in zip(net.layers, before.layers):
        np.testing.assert_array_equal(a.weights, b.weights)
        np.testing.assert_array_equal(a.bias, b.bias)


def test_adam_converges_on_quadratic():
    # minimize (w-3)^2 from w=0
    net = nn.DenseNet([nn.Layer(np.array([[0.0]]), np.array([0.0]), "linear")])
    net.layers[0].bias = np.zeros(0).reshape(0)  # unused; keep weights-only path simple
    net = nn.DenseNet([nn.Layer(np.array([[0.0]]), np.array([0.0]), "linear")])
    state = nn.init_adam(net, lr=0.05)
    for _ in range(500):
        w = net.layers[0].weights[0, 0]
        grads = nn.Gradients([(np.array([[2 * (w - 3.0)]]), np.array([0.0]))])
        nn.adam_step(net, grads, state)
    assert abs(net.layers[0].weights[0, 0] - 3.0) < 0.01
    assert state.step == 500


def test_adam_bitwise_determinism():
    def run():
        net = random_net([3, 4, 2], ["selu", "linear"], seed=7)
        state = nn.init_adam(net)
        rng = np.random.default_rng(17)
        for _ in range(20):
            x = rng.normal(size=(4, 3))
            t = rng.normal(size=(4, 2))
            out, cache = nn.forward(net, x)
            _, d_out = nn.mse_loss(out, t)
            grads, _ = nn.backward(net, cache, d_out)
            nn.adam_step(net, grads, state)
        return net

    a, b = run(), run()
    for la, lb in zip(a.layers, b.layers):
        np.testing.assert_array_equal(la.weights, lb.weights)
        np.testing.assert_array_equal(la.bias, lb.bias)


# ---------------------------------------------------------------------------
# fit

def test_fit_is_pure_given_seed():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(40, 3))
    t = x @ rng.normal(size=(3, 2))
    cfg = nn.TrainConfig(epochs=5, batch_size=8, rng_seed=123)

    def run():
        net = random_net([3, 6, 2], ["selu", "linear"], seed=1)
        return nn.fit(net, x, t, "mse", cfg).net

    a, b = run(), run()
    for la, lb in zip(a.layers, b.layers):
        np.testing.assert_array_equal(la.weights, lb.weights)


def test_fit_learns_linear_map():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(200, 3))
    t = x @ np.array([[1.0, 0.0], [0.0, -1.0], [0.5, 0.5]])
    cfg = nn.TrainConfig(epochs=200, batch_size=32, rng_seed=5, learning_rate=5e-3)
    net = random_net([3, 2], ["linear"], seed=2)
    result = nn.fit(net, x, t, "mse", cfg)
    out, _ = nn.forward(result.net, x)
    assert nn.mse_loss(out, t)[0] < 1e-3


def test_fit_keeps_best_validation_epoch():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(30, 2))
    t = x.copy()
    cfg = nn.TrainConfig(epochs=8, batch_size=10, rng_seed=3)
    net = random_net([2, 4, 2], ["selu", "linear"], seed=4)
    res = nn.fit(net, x, t, "mse", cfg, val_inputs=x, val_targets=t)
    scores = [h["score"] for h in res.history]
    assert res.best_score == max(scores)
    assert res.best_epoch == int(np.argmax(scores))


def test_train_config_validation():
    with pytest.raises(ValueError):
        nn.TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        nn.TrainConfig(dropout_rate=1.0)
    with pytest.raises(ValueError):
        nn.TrainConfig(l2_lambda=-1e-3)


# ---------------------------------------------------------------------------
# serialization

def test_model_roundtrip(tmp_path):
    net = random_net([3, 7, 2], ["selu", "softmax"], seed=8)
    other = random_net([2, 2], ["linear"], seed=9)
    path = tmp_path / "bundle.svl"
    nn.save_model(path, {"main": net, "aux": other}, {"purpose": "test", "seed": 8})
    nets, meta = nn.load_model(path)
    assert meta == {"purpose": "test", "seed": 8}
    assert set(nets) == {"main", "aux"}
    for la, lb in zip(net.layers, nets["main"].layers):
        np.testing.assert_array_equal(la.weights, lb.weights)
        np.testing.assert_array_equal(la.bias, lb.bias)
        assert la.activation == lb.activation


def test_model_rejects_unknown_version(tmp_path):
    net = random_net([2, 2], ["linear"], seed=1)
    path = tmp_path / "m.svl"
    nn.save_net(path, net)
    blob = bytearray(path.read_bytes())
    blob[5] = 99  # bump the version field
    path.write_bytes(bytes(blob))
    with pytest.raises(nn.FormatError):
        nn.load_model(path)


def test_model_rejects_bad_magic(tmp_path):
    path = tmp_path / "m.svl"
    path.write_bytes(b"NOTIT" + b"\x00" * 16)
    with pytest.raises(nn.FormatError):
        nn.load_model(path)


def test_model_rejects_truncation(tmp_path):
    net = random_net([4, 4], ["linear"], seed=1)
    path = tmp_path / "m.svl"
    nn.save_net(path, net)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(nn.FormatError):
        nn.load_model(path)
