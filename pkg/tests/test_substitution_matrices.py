import os

import numpy as np
import pytest

from substitution_matrices import (
    ALPHABET, EMBEDDED_MATRICES, MATRIX_NAMES, STANDARD, MatrixFormatError, get_matrix,
    load_matrix_file, parse_matrix_text, to_ncbi_text,
)

FIXTURES = os.path.join(os.path.dirname(__file__), 'fixtures', 'matrices')


def test_ten_matrices_in_fixed_order():
    assert MATRIX_NAMES == ['BLOSUM30', 'BLOSUM45', 'BLOSUM62', 'BLOSUM65', 'BLOSUM80',
                            'BLOSUM100', 'PAM30', 'PAM60', 'PAM120', 'PAM250']
    assert set(EMBEDDED_MATRICES) == set(MATRIX_NAMES)


def test_blosum62_alanine_row():
    expected = [4, -1, -2, -2, 0, -1, -1, 0, -2, -1, -1, -1, -1, -2, -1, 1, 0, -3, -2, 0, 0]
    assert get_matrix('BLOSUM62').row('A').tolist() == expected


@pytest.mark.parametrize('name', ['BLOSUM45', 'BLOSUM62', 'BLOSUM80', 'PAM30', 'PAM250'])
def test_matches_published_table(name):
    bio_matrices = pytest.importorskip('Bio.Align.substitution_matrices')
    reference = bio_matrices.load(name)
    ours = get_matrix(name)
    for i, a in enumerate(ALPHABET):
        for j, b in enumerate(ALPHABET):
            assert ours.values[i, j] == int(reference[a, b]), f"{name}[{a},{b}]"


@pytest.mark.parametrize('name', MATRIX_NAMES)
def test_matches_fixture_table(name):
    fixture = load_matrix_file(os.path.join(FIXTURES, f'{name}.txt'))
    assert fixture.name == name
    assert np.array_equal(fixture.values[:20, :20], get_matrix(name).values[:20, :20])
    assert np.array_equal(fixture.values, get_matrix(name).values)


def test_blosum62_x_row():
    expected = [0, -1, -1, -1, -2, -1, -1, -1, -1, -1, -1, -1, -1, -1, -2, 0, 0, -2, -1, -1, -1]
    values = get_matrix('BLOSUM62').values
    assert values[20].tolist() == expected
    assert values[:, 20].tolist() == expected
    assert get_matrix('PAM250').row('X')[:3].tolist() == [0, -1, 0]


@pytest.mark.parametrize('name', MATRIX_NAMES)
def test_structural_invariants(name):
    values = get_matrix(name).values
    assert values.shape == (21, 21)
    assert np.array_equal(values, values.T)
    core = values[:20, :20]
    assert all(core[i, i] == core[i].max() for i in range(20))
    assert len({tuple(row) for row in core}) == 20
    if name in ('BLOSUM30', 'BLOSUM65', 'BLOSUM100', 'PAM60', 'PAM120'):
        assert not values[20].any() and not values[:, 20].any()


def test_embedded_tables_are_read_only():
    with pytest.raises(ValueError):
        get_matrix('PAM120').values[0, 0] = 99


def test_unknown_matrix():
    with pytest.raises(KeyError):
        get_matrix('BLOSUM999')


def test_ncbi_text_round_trip():
    original = get_matrix('PAM60')
    parsed = parse_matrix_text(to_ncbi_text(original), 'PAM60')
    assert np.array_equal(parsed.values, original.values)


def test_extra_columns_ignored_and_missing_x_is_zero():
    letters = list(STANDARD) + ['B', 'Z', '*']
    lines = ['# custom matrix', '   ' + '  '.join(letters)]
    for i, a in enumerate(STANDARD):
        scores = [5 if a == b else -1 for b in STANDARD] + [0, 0, -4]
        lines.append(f"{a} " + ' '.join(str(s) for s in scores))
    lines.append('* ' + ' '.join(['-4'] * len(letters)))
    matrix = load_matrix_file('\n'.join(lines), name='custom')
    assert matrix.name == 'CUSTOM'
    assert matrix.values[0, 0] == 5 and matrix.values[0, 1] == -1
    assert not matrix.values[ALPHABET.index('X')].any()


def test_missing_rows_rejected():
    text = '   A  R\nA  4 -1\nR -1  5\n'
    with pytest.raises(MatrixFormatError, match='missing rows'):
        load_matrix_file(text, name='tiny')


def test_load_from_file_uses_stem_as_name(tmp_path):
    path = tmp_path / 'mymatrix.txt'
    path.write_text(to_ncbi_text(get_matrix('BLOSUM65')))
    matrix = load_matrix_file(str(path))
    assert matrix.name == 'MYMATRIX'
    assert np.array_equal(matrix.values, get_matrix('BLOSUM65').values)
