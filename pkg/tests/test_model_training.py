import numpy as np
import pytest
from pydantic import ValidationError

from angle_codec import AmbiguousAngleError, encode_angles
from conftest import make_chain
from model_training import (
    HISTORY_COLUMNS, DivergenceError, EarlyStopping, ReduceLROnPlateau, TrainingConfig,
    evaluate, train,
)
from neural_net import build_model, forward, loss_report
from window_dataset import (
    DatasetBuilder, EmptyInputError, TargetMode, WindowConfig, WindowSet, window_arrays,
)


def small_sets(window=5, mode='both'):
    config = WindowConfig(window_size=window, target_mode=mode)
    train_set = window_arrays([make_chain(14, pdb_id='TR01'), make_chain(12, pdb_id='TR02')], config)
    val_set = window_arrays([make_chain(10, pdb_id='VA01')], config)
    return train_set, val_set


# ------------------------------------------------------------------
# Schedules
# ------------------------------------------------------------------
def test_plateau_halves_after_patience():
    scheduler = ReduceLROnPlateau(factor=0.5, patience=2, min_delta=0.0, min_lr=1e-6)
    lrs = [scheduler(loss, 0.1) for loss in (1.0, 1.0)]
    assert lrs == [0.1, 0.1]
    assert scheduler(1.0, 0.1) == pytest.approx(0.05)
    assert scheduler(1.0, 0.05) == pytest.approx(0.05)
    assert scheduler(1.0, 0.05) == pytest.approx(0.025)


def test_plateau_respects_floor():
    scheduler = ReduceLROnPlateau(factor=0.5, patience=1, min_delta=0.0, min_lr=1e-6)
    scheduler(1.0, 1e-6)
    assert scheduler(1.0, 1e-6) == 1e-6


def test_early_stopping():
    stopper = EarlyStopping(patience=2, min_delta=0.1)
    assert [stopper(v) for v in (1.0, 0.95, 0.5, 0.5, 0.5)] == [False, False, False, False, True]


def test_config_validation():
    assert TrainingConfig().dropout_rate == 0.30
    with pytest.raises(ValidationError):
        TrainingConfig(dropout_rate=1.0)
    with pytest.raises(ValidationError):
        TrainingConfig(learning_rate=0.0)
    with pytest.raises(ValidationError):
        TrainingConfig(batch_size=0)


# ------------------------------------------------------------------
# Training
# ------------------------------------------------------------------
def test_memorises_a_single_window():
    data = window_arrays([make_chain(5)], WindowConfig(window_size=5))
    assert len(data) == 1
    config = TrainingConfig(learning_rate=0.1, dropout_rate=0.0, batch_size=1, max_epochs=3000,
                            min_delta=0.0, early_stop_patience=3000, plateau_patience=3000)
    model, history = train(build_model('DNN1', 4, hidden_width=8, window_size=5), data, data, config)
    assert min(history.val_losses) < 1e-3
    assert loss_report(forward(model, data.inputs), data.targets).mse < 1e-3


def class_token_set(rng, n, window=3):
    tokens = rng.integers(0, 20, (n, window))
    inputs = np.zeros((n, window, 21))
    inputs[np.arange(n)[:, None], np.arange(window)[None, :], tokens] = 1.0
    angles = np.where(tokens[:, window // 2] < 10, 60.0, -120.0)[:, None]
    return WindowSet(inputs=inputs, targets=encode_angles(angles).reshape(n, 2), angles=angles)


def test_class_token_task_beats_predicting_zero():
    rng = np.random.default_rng(3)
    train_set, val_set = class_token_set(rng, 400), class_token_set(rng, 100)
    baseline = float(np.mean(val_set.targets ** 2))
    assert baseline == pytest.approx(0.5)
    config = TrainingConfig(learning_rate=0.1, dropout_rate=0.0, batch_size=16, max_epochs=60,
                            early_stop_patience=60, plateau_patience=60, seed=1)
    model, history = train(build_model('DNN1', 2, hidden_width=16, seed=2, window_size=3),
                           train_set, val_set, config)
    assert min(history.val_losses) < baseline
    assert loss_report(forward(model, val_set.inputs), val_set.targets).mse < baseline


def test_same_seed_same_history():
    train_set, val_set = small_sets()
    config = TrainingConfig(batch_size=4, max_epochs=3, seed=5)
    runs = [train(build_model('LSTM1', 4, hidden_width=6, seed=1, window_size=5),
                  train_set, val_set, config) for _ in range(2)]
    assert runs[0][1].rows == runs[1][1].rows
    for name, value in runs[0][0].params.items():
        assert np.array_equal(value, runs[1][0].params[name])


def test_best_epoch_parameters_are_returned():
    train_set, val_set = small_sets()
    config = TrainingConfig(learning_rate=0.2, batch_size=4, max_epochs=8, dropout_rate=0.3)
    model, history = train(build_model('DNN2', 4, hidden_width=6, window_size=5),
                           train_set, val_set, config)
    best = loss_report(forward(model, val_set.inputs), val_set.targets).mse
    assert best == min(history.val_losses)


def test_training_does_not_touch_the_initial_model():
    train_set, val_set = small_sets()
    model = build_model('DNN1', 4, hidden_width=4, window_size=5)
    before = {k: v.copy() for k, v in model.params.items()}
    train(model, train_set, val_set, TrainingConfig(max_epochs=2, batch_size=4))
    assert all(np.array_equal(before[k], model.params[k]) for k in before)


def test_history_csv(tmp_path):
    train_set, val_set = small_sets(mode='phi')
    _, history = train(build_model('DNN1', 2, hidden_width=4, window_size=5),
                       train_set, val_set, TrainingConfig(max_epochs=3, batch_size=4))
    path = history.to_csv(str(tmp_path / 'history.csv'))
    header = open(path).readline().strip().split(',')
    assert header == HISTORY_COLUMNS
    assert len(history) == 3
    assert history.to_frame()['epoch'].tolist() == [1, 2, 3]


def test_empty_sets_rejected():
    train_set, _ = small_sets()
    empty = WindowSet.empty(5, 4)
    model = build_model('DNN1', 4, window_size=5)
    with pytest.raises(EmptyInputError):
        train(model, train_set, empty, TrainingConfig())
    with pytest.raises(EmptyInputError):
        train(model, empty, train_set, TrainingConfig())
    with pytest.raises(EmptyInputError):
        evaluate(model, empty, TargetMode.BOTH)


def test_non_finite_input_diverges():
    train_set, val_set = small_sets()
    train_set.inputs[0, 0, 0] = np.nan
    with pytest.raises(DivergenceError) as info:
        train(build_model('DNN1', 4, hidden_width=4, window_size=5), train_set, val_set,
              TrainingConfig(batch_size=64, dropout_rate=0.0))
    assert info.value.epoch == 1


@pytest.mark.parametrize('mode', ['phi', 'psi', 'both'])
def test_evaluate_reports_requested_angles(mode):
    train_set, val_set = small_sets(mode=mode)
    width = TargetMode(mode).output_width
    model = build_model('LSTM1', width, hidden_width=4, window_size=5)
    model.params['out.b'][:] = 0.5
    report = evaluate(model, val_set, mode)
    assert report.loss.n == len(val_set)
    for name in ('phi', 'psi'):
        value = getattr(report, f"mae_{name}")
        if name in TargetMode(mode).angle_names:
            assert 0.0 <= value <= 180.0
        else:
            assert value is None


def test_evaluate_rejects_an_exact_zero_prediction():
    _, val_set = small_sets(mode='phi')
    model = build_model('DNN1', 2, hidden_width=4, window_size=5)
    model.params['out.W'][:] = 0.0
    with pytest.raises(AmbiguousAngleError):
        evaluate(model, val_set, 'phi')


@pytest.mark.slow
def test_noisy_helices_are_learned(tmp_path):
    from synthetic_corpus import HelixCorpusGenerator

    generator = HelixCorpusGenerator(n_chains=50, length=30, noise=3.0, seed=42, verbose=False)
    manifest = generator.save(generator.generate(), str(tmp_path / 'corpus'))
    builder = DatasetBuilder(verbose=False)
    builder.load(manifest)
    parts = builder.build(WindowConfig(window_size=7, scheme='one-hot'), seed=0)

    config = TrainingConfig(learning_rate=0.05, dropout_rate=0.0, batch_size=32, max_epochs=50)
    model, _ = train(build_model('LSTM1', 4, window_size=7), parts['train'], parts['validation'], config)
    report = evaluate(model, parts['test'], TargetMode.BOTH)
    assert report.mae_phi < 5.0 and report.mae_psi < 5.0
