import pytest
from pydantic import ValidationError

from model_training import TrainingConfig
from sweep_harness import (
    CellStatus, GridCell, JournalError, SweepData, SweepGrid, cell_seed, read_journal, run_cell,
    run_sweep,
)
from window_dataset import Corpus, TargetMode

QUICK = TrainingConfig(max_epochs=2, batch_size=16, hidden_width=4)


def tiny_grid(**overrides):
    fields = dict(encodings=['one-hot', 'BLOSUM62'], window_sizes=[5], models=['DNN1'],
                  target_modes=['phi'])
    fields.update(overrides)
    return SweepGrid(**fields)


@pytest.fixture
def helix_data(helix_corpus_dir):
    return SweepData.from_manifest(helix_corpus_dir, seed=0)


# ------------------------------------------------------------------
# Grid
# ------------------------------------------------------------------
def test_default_grid_cardinality():
    grid = SweepGrid()
    assert len(grid) == 2541 == 11 * 11 * 7 * 3
    assert len(grid.cells()) == 2541
    assert len({c.key() for c in grid.cells()}) == 2541


def test_two_cell_grid():
    cells = tiny_grid().cells()
    assert [c.key() for c in cells] == ['one-hot|5|DNN1|phi', 'BLOSUM62|5|DNN1|phi']


def test_focused_grid():
    grid = SweepGrid.focused()
    assert len(grid) == 1 * 4 * 1 * 3
    assert grid.models == ['LSTM5']
    assert grid.training_config().max_epochs == 150


def test_grid_from_yaml(tmp_path):
    path = tmp_path / 'grid.yaml'
    path.write_text("encodings: [onehot, blosum62]\nwindow_sizes: [7, 9]\n"
                    "models: [lstm1]\ntarget_modes: [both]\ntraining:\n  learning_rate: 0.05\n")
    grid = SweepGrid.from_yaml(str(path))
    assert grid.encodings == ['one-hot', 'BLOSUM62']
    assert grid.models == ['LSTM1']
    assert len(grid) == 4
    assert grid.training_config(TrainingConfig(seed=9)).learning_rate == 0.05
    assert grid.training_config(TrainingConfig(seed=9)).seed == 9


@pytest.mark.parametrize('text', [
    "windows: [7]\n",
    "window_sizes: [8]\n",
    "encodings: [BLOSUM63]\n",
    "models: [LSTM9]\n",
    "training:\n  dropout_rate: 2.0\n",
])
def test_bad_grid_rejected(tmp_path, text):
    path = tmp_path / 'grid.yaml'
    path.write_text(text)
    with pytest.raises(ValidationError):
        SweepGrid.from_yaml(str(path))


def test_cell_seed_is_stable_and_cell_specific():
    a = GridCell('one-hot', 7, 'LSTM1', TargetMode.PHI)
    b = GridCell('one-hot', 7, 'LSTM1', TargetMode.PSI)
    assert cell_seed(0, a) == cell_seed(0, a)
    assert cell_seed(0, a) != cell_seed(0, b)
    assert cell_seed(0, a) != cell_seed(1, a)
    assert 0 <= cell_seed(0, a) < 2 ** 32


# ------------------------------------------------------------------
# Cells
# ------------------------------------------------------------------
def test_empty_corpus_is_skipped():
    data = SweepData.from_corpus(Corpus(), seed=0)
    result = run_cell(GridCell('one-hot', 7, 'DNN1', TargetMode.BOTH), data, QUICK)
    assert result.status is CellStatus.SKIPPED
    assert result.codec_rmse is None


def test_window_longer_than_chains_is_skipped(helix_data):
    result = run_cell(GridCell('one-hot', 23, 'DNN1', TargetMode.PSI), helix_data, QUICK)
    assert result.status is CellStatus.SKIPPED
    assert 'train' in result.reason


def test_run_cell_is_deterministic(helix_data):
    cell = GridCell('BLOSUM62', 5, 'LSTM1', TargetMode.BOTH)
    first = run_cell(cell, helix_data, QUICK)
    second = run_cell(cell, helix_data, QUICK)
    assert first.status is CellStatus.COMPLETED
    assert first.model_dump() == second.model_dump()
    assert first.codec_mse == pytest.approx(first.codec_rmse ** 2)
    assert 0.0 <= first.degree_mae_phi <= 180.0 and 0.0 <= first.degree_mae_psi <= 180.0
    assert first.epochs_run == 2


# ------------------------------------------------------------------
# Sweeps and the journal
# ------------------------------------------------------------------
def test_sweep_journals_every_cell(helix_data, tmp_path):
    journal = str(tmp_path / 'sweep.jsonl')
    results = run_sweep(tiny_grid(), helix_data, QUICK, journal_path=journal)
    assert [r.encoding for r in results] == ['one-hot', 'BLOSUM62']
    assert [r.model_dump() for r in read_journal(journal)] == [r.model_dump() for r in results]


def test_resume_after_interruption(helix_data, tmp_path):
    journal = tmp_path / 'sweep.jsonl'
    full = run_sweep(tiny_grid(), helix_data, QUICK, journal_path=str(journal))
    first_line, second_line = journal.read_text().splitlines()
    # killed while writing the second result
    journal.write_text(first_line + '\n' + second_line[:len(second_line) // 2])
    assert len(read_journal(str(journal))) == 1

    resumed = run_sweep(tiny_grid(), helix_data, QUICK, journal_path=str(journal), resume=True)
    lines = journal.read_text().splitlines()
    assert len(lines) == 2 and lines[0] == first_line
    assert [r.model_dump() for r in resumed] == [r.model_dump() for r in full]


def test_fresh_run_truncates_journal(helix_data, tmp_path):
    journal = str(tmp_path / 'sweep.jsonl')
    run_sweep(tiny_grid(), helix_data, QUICK, journal_path=journal)
    run_sweep(tiny_grid(encodings=['one-hot']), helix_data, QUICK, journal_path=journal)
    assert len(read_journal(journal)) == 1


def test_corrupt_middle_line(tmp_path):
    journal = tmp_path / 'sweep.jsonl'
    journal.write_text('{"broken": \n{}\n')
    with pytest.raises(JournalError):
        read_journal(str(journal))


def test_missing_journal_reads_empty(tmp_path):
    assert read_journal(str(tmp_path / 'none.jsonl')) == []


@pytest.mark.slow
def test_worker_count_does_not_change_results(helix_data):
    grid = tiny_grid(window_sizes=[5, 7], models=['DNN1', 'LSTM1'])
    assert len(grid.cells()) == 8
    serial = run_sweep(grid, helix_data, QUICK, parallelism=1)
    parallel = run_sweep(grid, helix_data, QUICK, parallelism=8)
    assert [r.model_dump() for r in serial] == [r.model_dump() for r in parallel]
