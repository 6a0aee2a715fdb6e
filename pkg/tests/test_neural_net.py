import math

import numpy as np
import pytest
from pydantic import ValidationError

from angle_codec import AmbiguousAngleError
from neural_net import (
    ARCHITECTURES, Activation, ModelSpec, ShapeError, build_model, dense_forward, forward,
    gradient_check, loss_and_gradients, loss_report, lstm_step, make_dropout_masks, predict_angles,
)


def one_hot_batch(rng, batch, window):
    X = np.zeros((batch, window, 21))
    X[np.arange(batch)[:, None], np.arange(window)[None, :], rng.integers(0, 21, (batch, window))] = 1.0
    return X


# ------------------------------------------------------------------
# Layers
# ------------------------------------------------------------------
def test_dense_identity():
    x = np.array([[1.0, -2.0, 3.0]])
    assert np.array_equal(dense_forward(np.eye(3), np.zeros(3), x, Activation.IDENTITY), x)


def test_dense_zero_relu():
    out = dense_forward(np.zeros((4, 2)), np.zeros(2), np.ones((3, 4)), Activation.RELU)
    assert not out.any()


def test_dense_scalar_tanh():
    out = dense_forward([[2.0]], [0.5], [1.0], Activation.TANH)
    assert out[0] == pytest.approx(math.tanh(2.5))
    assert out[0] == pytest.approx(0.98661, abs=1e-5)


def test_dense_shape_error_lists_shapes():
    with pytest.raises(ShapeError, match=r'\(3, 2\)'):
        dense_forward(np.zeros((3, 2)), np.zeros(2), np.zeros((1, 4)))


def test_lstm_step_zero():
    h, c = lstm_step((np.zeros((5, 12)), np.zeros(12)), np.zeros(2), np.zeros(3), np.zeros(3))
    assert not h.any() and not c.any()


def test_lstm_step_saturated_forget_gate_keeps_cell():
    H = 3
    bias = np.zeros(4 * H)
    bias[H:2 * H] = 1000.0
    cell = np.array([0.3, -1.5, 2.0])
    _, c = lstm_step((np.zeros((2 + H, 4 * H)), bias), np.zeros(2), np.zeros(H), cell)
    assert np.allclose(c, cell)


def test_lstm_step_bounded_and_finite():
    rng = np.random.default_rng(0)
    H, D = 8, 4
    params = (rng.normal(0, 0.5, (D + H, 4 * H)), rng.normal(0, 0.5, 4 * H))
    h, c = np.zeros(H), np.zeros(H)
    for _ in range(10000):
        h, c = lstm_step(params, rng.normal(size=D), h, c)
        assert np.all(np.abs(h) <= 1.0)
    assert np.all(np.isfinite(c))


def test_lstm_step_shape_error():
    with pytest.raises(ShapeError):
        lstm_step((np.zeros((5, 12)), np.zeros(12)), np.zeros(3), np.zeros(3), np.zeros(3))


# ------------------------------------------------------------------
# Models
# ------------------------------------------------------------------
def test_architecture_table():
    assert ARCHITECTURES['DNN1'] == (3, 0) and ARCHITECTURES['DNN2'] == (6, 0)
    assert [ARCHITECTURES[f"LSTM{k}"][1] for k in range(1, 6)] == [1, 2, 4, 8, 64]


def test_spec_rejects_mismatched_rows():
    with pytest.raises(ValidationError):
        ModelSpec(name='DNN1', dense_layers=6, lstm_layers=0)
    with pytest.raises(ValidationError):
        ModelSpec(name='LSTM1', dense_layers=3, lstm_layers=0)
    with pytest.raises(ValidationError):
        ModelSpec(name='LSTM1', dense_layers=3, lstm_layers=1, output_width=3)


def test_lstm5_stacks_64_layers_or_one_wide_layer():
    deep = build_model('LSTM5', 4, hidden_width=4)
    assert len(deep.lstm_names) == 64
    wide = build_model('LSTM5', 4, hidden_width=64, lstm_layers=1)
    assert wide.lstm_names == ['lstm0'] and wide.params['lstm0.W'].shape == (21 + 64, 256)


def test_forget_bias_initialised_to_one():
    b = build_model('LSTM1', 2, hidden_width=5).params['lstm0.b']
    assert np.array_equal(b[5:10], np.ones(5))
    assert not b[:5].any() and not b[10:].any()


def test_zero_output_layer_predicts_zero():
    model = build_model('LSTM1', 4, hidden_width=6, seed=1)
    model.params['out.W'][:] = 0.0
    X = one_hot_batch(np.random.default_rng(0), 5, 7)
    assert not forward(model, X).any()


@pytest.mark.parametrize('name', ['DNN1', 'LSTM2'])
def test_empty_batch(name):
    model = build_model(name, 2, hidden_width=4, window_size=5)
    assert forward(model, np.zeros((0, 5, 21))).shape == (0, 2)


@pytest.mark.parametrize('name', ['DNN2', 'LSTM1'])
def test_forward_deterministic_and_bounded(name):
    X = one_hot_batch(np.random.default_rng(3), 8, 9)
    a = forward(build_model(name, 4, seed=7, window_size=9), X)
    b = forward(build_model(name, 4, seed=7, window_size=9), X)
    assert np.array_equal(a, b)
    assert a.shape == (8, 4) and np.all(np.abs(a) < 1.0)


def test_dnn_accepts_flat_and_windowed_inputs():
    model = build_model('DNN1', 2, hidden_width=4, window_size=3)
    X = one_hot_batch(np.random.default_rng(0), 4, 3)
    assert np.array_equal(forward(model, X), forward(model, X.reshape(4, 63)))
    with pytest.raises(ShapeError):
        forward(model, np.zeros((4, 5, 21)))


def test_lstm_rejects_flat_inputs():
    with pytest.raises(ShapeError):
        forward(build_model('LSTM1', 2), np.zeros((4, 147)))


# ------------------------------------------------------------------
# Loss and gradients
# ------------------------------------------------------------------
def test_perfect_prediction_has_zero_loss_and_gradient():
    model = build_model('LSTM1', 2, hidden_width=4, seed=2)
    X = one_hot_batch(np.random.default_rng(0), 3, 5)
    report, grads = loss_and_gradients(model, X, forward(model, X))
    assert report.mse == 0.0 and report.rmse == 0.0 and report.mae == 0.0
    assert all(not g.any() for g in grads.values())


def test_single_output_mse():
    report = loss_report(np.array([[0.5]]), np.array([[0.0]]))
    assert report.mse == pytest.approx(0.25)
    assert report.rmse == pytest.approx(0.5)
    assert report.n == 1


def test_rmse_at_least_mae():
    rng = np.random.default_rng(5)
    for _ in range(50):
        P, Y = rng.uniform(-1, 1, (7, 4)), rng.uniform(-1, 1, (7, 4))
        report = loss_report(P, Y)
        assert report.rmse >= report.mae - 1e-12 >= -1e-12


def test_target_shape_checked():
    model = build_model('DNN1', 4, hidden_width=3, window_size=3)
    with pytest.raises(ShapeError):
        loss_and_gradients(model, np.zeros((2, 3, 21)), np.zeros((2, 2)))
    with pytest.raises(ShapeError):
        loss_and_gradients(model, np.zeros((0, 3, 21)), np.zeros((0, 4)))


@pytest.mark.parametrize('name, window, width', [
    ('DNN1', 5, 4), ('DNN2', 3, 2), ('LSTM1', 7, 4), ('LSTM2', 5, 2), ('LSTM3', 3, 4),
])
def test_gradient_check(name, window, width):
    rng = np.random.default_rng(11)
    model = build_model(name, width, hidden_width=3, seed=4, window_size=window)
    X = one_hot_batch(rng, 3, window)
    Y = rng.uniform(-0.9, 0.9, (3, width))
    assert gradient_check(model, X, Y) < 1e-4


def test_gradient_check_with_dropout_masks():
    rng = np.random.default_rng(12)
    model = build_model('LSTM1', 4, hidden_width=3, seed=9, window_size=5)
    X = one_hot_batch(rng, 3, 5)
    Y = rng.uniform(-0.9, 0.9, (3, 4))
    masks = make_dropout_masks(model, 3, 0.3, rng)
    assert len(masks) == 2
    assert gradient_check(model, X, Y, masks=masks) < 1e-4


def test_gradient_check_ignores_relu_kinks():
    rng = np.random.default_rng(5)
    model = build_model('DNN2', 2, hidden_width=3, seed=1, window_size=3)
    model.params['dense0.W'][:] = 0.0
    model.params['dense0.b'][:] = 0.0
    X = one_hot_batch(rng, 4, 3)
    Y = rng.uniform(-0.9, 0.9, (4, 2))
    assert gradient_check(model, X, Y) < 1e-4


def test_inverted_dropout_preserves_expectation():
    model = build_model('DNN1', 2, hidden_width=4)
    rng = np.random.default_rng(0)
    mask = make_dropout_masks(model, 20000, 0.3, rng)[0]
    assert set(np.unique(mask)) == {0.0, 1.0 / 0.7}
    assert np.allclose(mask.mean(axis=0), 1.0, atol=0.03)
    assert make_dropout_masks(model, 1, 0.0, rng) is None


def test_small_step_does_not_increase_loss():
    rng = np.random.default_rng(21)
    model = build_model('LSTM2', 4, hidden_width=5, seed=3)
    X = one_hot_batch(rng, 16, 7)
    Y = rng.uniform(-1, 1, (16, 4))
    before, grads = loss_and_gradients(model, X, Y)
    lr = 1.0
    for _ in range(20):
        stepped = model.copy()
        for k, g in grads.items():
            stepped.params[k] -= lr * g
        after, _ = loss_and_gradients(stepped, X, Y)
        if after.mse <= before.mse:
            break
        lr /= 2
    assert after.mse <= before.mse


# ------------------------------------------------------------------
# Decoding predictions
# ------------------------------------------------------------------
def _constant_model(outputs):
    model = build_model('DNN1', len(outputs), hidden_width=2, window_size=3)
    model.params['out.W'][:] = 0.0
    model.params['out.b'][:] = np.arctanh(np.asarray(outputs, dtype=float))
    return model


def test_predict_angles_examples():
    X = np.zeros((1, 3, 21))
    assert predict_angles(_constant_model([0.0, -0.9]), X)[0].tolist() == pytest.approx([180.0])
    assert predict_angles(_constant_model([0.0, 0.9, 0.0, -0.9]), X)[0].tolist() == \
        pytest.approx([0.0, 180.0])


def test_predict_angles_scale_invariant():
    X = np.zeros((1, 3, 21))
    s, c = math.sin(math.radians(-57)), math.cos(math.radians(-57))
    full = predict_angles(_constant_model([0.9 * s, 0.9 * c]), X)
    scaled = predict_angles(_constant_model([0.3 * 0.9 * s, 0.3 * 0.9 * c]), X)
    assert full[0, 0] == pytest.approx(-57.0) and scaled[0, 0] == pytest.approx(-57.0)


def test_predict_angles_ambiguous_at_origin():
    with pytest.raises(AmbiguousAngleError):
        predict_angles(_constant_model([0.0, 0.0]), np.zeros((1, 3, 21)))
