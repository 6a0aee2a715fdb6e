"""
Amino-Acid Substitution Matrices
================================
Ten BLOSUM / PAM score tables embedded as lower triangles over the
20 standard residues (order A R N D C Q E G H I L K M F P S T W Y V).
Tables are expanded to 21 x 21 in alphabet order. The trailing X row and
column carry the published values where the distributed table has them
(BLOSUM45/62/80, PAM30/250) and are zero otherwise.

Provenance:
    BLOSUM45, BLOSUM62, BLOSUM80, PAM30, PAM250  NCBI BLAST data directory
    BLOSUM30, BLOSUM65, BLOSUM100                Henikoff blocks release (blosumNN.iij)
    PAM60, PAM120                                NCBI legacy PAM series
"""

import os
from dataclasses import dataclass

import numpy as np

# -------------------------------------------------------------------
# Configuration
# -------------------------------------------------------------------
ALPHABET = "ARNDCQEGHILKMFPSTWYVX"
STANDARD = ALPHABET[:20]

MATRIX_NAMES = [
    'BLOSUM30', 'BLOSUM45', 'BLOSUM62', 'BLOSUM65', 'BLOSUM80', 'BLOSUM100',
    'PAM30', 'PAM60', 'PAM120', 'PAM250',
]

_LOWER_TRIANGLES = {
    'BLOSUM30': """
 4
-1  8
 0 -2  8
 0 -1  1  9
-3 -2 -1 -3 17
 1  3 -1 -1 -2  8
 0 -1 -1  1  1  2  6
 0 -2  0 -1 -4 -2 -2  8
-2 -1 -1 -2 -5  0  0 -3 14
 0 -3  0 -4 -2 -2 -3 -1 -2  6
-1 -2 -2 -1  0 -2 -1 -2 -1  2  4
 0  1  0  0 -3  0  2 -1 -2 -2 -2  4
 1  0  0 -3 -2 -1 -1 -2  2  1  2  2  8
-2 -1 -1 -5 -3 -3 -4 -3 -3  0  2 -1 -2 10
-1 -1 -3 -1 -3  0  1 -1  1 -3 -3  1 -4 -4 11
 1 -1  0  0 -2 -1  0  0 -1 -1 -2  0 -2 -1 -1  4
 1 -3  1 -1 -2  0 -2 -2 -2  0  0 -1  0 -2  0  2  5
-5  0 -7 -4 -2 -1 -1  1 -5 -3 -2 -2 -3  1 -3 -3 -5 20
-4  0 -4 -1 -6 -1 -2 -3  0 -1  3 -1 -1  3 -2 -2 -1  5  9
 1 -1 -2 -2 -2 -3 -3 -3 -3  4  1 -2  0  1 -4 -1  1 -3  1  5
""",
    'BLOSUM45': """
 5
-2  7
-1  0  6
-2 -1  2  7
-1 -3 -2 -3 12
-1  1  0  0 -3  6
-1  0  0  2 -3  2  6
 0 -2  0 -1 -3 -2 -2  7
-2  0  1  0 -3  1  0 -2 10
-1 -3 -2 -4 -3 -2 -3 -4 -3  5
-1 -2 -3 -3 -2 -2 -2 -3 -2  2  5
-1  3  0  0 -3  1  1 -2 -1 -3 -3  5
-1 -1 -2 -3 -2  0 -2 -2  0  2  2 -1  6
-2 -2 -2 -4 -2 -4 -3 -3 -2  0  1 -3  0  8
-1 -2 -2 -1 -4 -1  0 -2 -2 -2 -3 -1 -2 -3  9
 1 -1  1  0 -1  0  0  0 -1 -2 -3 -1 -2 -2 -1  4
 0 -1  0 -1 -1 -1 -1 -2 -2 -1 -1 -1 -1 -1 -1  2  5
-2 -2 -4 -4 -5 -2 -3 -2 -3 -2 -2 -2 -2  1 -3 -4 -3 15
-2 -1 -2 -2 -3 -1 -2 -3  2  0  0 -1  0  3 -3 -2 -1  3  8
 0 -2 -3 -3 -1 -3 -3 -3 -3  3  1 -2  1  0 -3 -1  0 -3 -1  5
""",
    'BLOSUM62': """
 4
-1  5
-2  0  6
-2 -2  1  6
 0 -3 -3 -3  9
-1  1  0  0 -3  5
-1  0  0  2 -4  2  5
 0 -2  0 -1 -3 -2 -2  6
-2  0  1 -1 -3  0  0 -2  8
-1 -3 -3 -3 -1 -3 -3 -4 -3  4
-1 -2 -3 -4 -1 -2 -3 -4 -3  2  4
-1  2  0 -1 -3  1  1 -2 -1 -3 -2  5
-1 -1 -2 -3 -1  0 -2 -3 -2  1  2 -1  5
-2 -3 -3 -3 -2 -3 -3 -3 -1  0  0 -3  0  6
-1 -2 -2 -1 -3 -1 -1 -2 -2 -3 -3 -1 -2 -4  7
 1 -1  1  0 -1  0  0  0 -1 -2 -2  0 -1 -2 -1  4
 0 -1  0 -1 -1 -1 -1 -2 -2 -1 -1 -1 -1 -2 -1  1  5
-3 -3 -4 -4 -2 -2 -3 -2 -2 -3 -2 -3 -1  1 -4 -3 -2 11
-2 -2 -2 -3 -2 -1 -2 -3  2 -1 -1 -2 -1  3 -3 -2 -2  2  7
 0 -3 -3 -3 -1 -2 -2 -3 -3  3  1 -2  1 -1 -2 -2  0 -3 -1  4
""",
    'BLOSUM65': """
 4
-1  6
-2  0  6
-2 -2  1  6
 0 -4 -3 -4  9
-1  1  0 -1 -3  6
-1  0  0  2 -4  2  5
 0 -2 -1 -1 -3 -2 -2  6
-2  0  1 -1 -3  1  0 -2  8
-1 -3 -3 -3 -1 -3 -3 -4 -3  4
-2 -2 -4 -4 -1 -2 -3 -4 -3  2  4
-1  2  0 -1 -3  1  1 -2 -1 -3 -3  5
-1 -2 -2 -3 -2  0 -2 -3 -2  1  2 -2  6
-2 -3 -3 -4 -2 -3 -3 -3 -1  0  0 -3  0  6
-1 -2 -2 -2 -3 -1 -1 -2 -2 -3 -3 -1 -3 -4  8
 1 -1  1  0 -1  0  0  0 -1 -2 -3  0 -2 -2 -1  4
 0 -1  0 -1 -1 -1 -1 -2 -2 -1 -1 -1 -1 -2 -1  1  5
-3 -3 -4 -5 -2 -2 -3 -3 -2 -2 -2 -3 -2  1 -4 -3 -3 10
-2 -2 -2 -3 -2 -2 -2 -3  2 -1 -1 -2 -1  3 -3 -2 -2  2  7
 0 -3 -3 -3 -1 -2 -3 -3 -3  3  1 -2  1 -1 -2 -2  0 -3 -1  4
""",
    'BLOSUM80': """
 5
-2  6
-2 -1  6
-2 -2  1  6
-1 -4 -3 -4  9
-1  1  0 -1 -4  6
-1 -1 -1  1 -5  2  6
 0 -3 -1 -2 -4 -2 -3  6
-2  0  0 -2 -4  1  0 -3  8
-2 -3 -4 -4 -2 -3 -4 -5 -4  5
-2 -3 -4 -5 -2 -3 -4 -4 -3  1  4
-1  2  0 -1 -4  1  1 -2 -1 -3 -3  5
-1 -2 -3 -4 -2  0 -2 -4 -2  1  2 -2  6
-3 -4 -4 -4 -3 -4 -4 -4 -2 -1  0 -4  0  6
-1 -2 -3 -2 -4 -2 -2 -3 -3 -4 -3 -1 -3 -4  8
 1 -1  0 -1 -2  0  0 -1 -1 -3 -3 -1 -2 -3 -1  5
 0 -1  0 -1 -1 -1 -1 -2 -2 -1 -2 -1 -1 -2 -2  1  5
-3 -4 -4 -6 -3 -3 -4 -4 -3 -3 -2 -4 -2  0 -5 -4 -4 11
-2 -3 -3 -4 -3 -2 -3 -4  2 -2 -2 -3 -2  3 -4 -2 -2  2  7
 0 -3 -4 -4 -1 -3 -3 -4 -4  3  1 -3  1 -1 -3 -2  0 -3 -2  4
""",
    'BLOSUM100': """
 8
-3 10
-4 -2 11
-5 -5  1 10
-2 -8 -5 -8 14
-2  0 -1 -2 -7 11
-3 -2 -2  2 -9  2 10
-1 -6 -2 -4 -7 -5 -6  9
-4 -1  0 -3 -8  1 -2 -6 13
-4 -7 -7 -8 -3 -6 -7 -9 -7  8
-4 -6 -7 -8 -5 -5 -7 -8 -6  2  8
-2  3 -1 -3 -8  2  0 -5 -3 -6 -6 10
-3 -4 -5 -8 -4 -2 -5 -7 -5  1  3 -4 12
-5 -6 -7 -8 -4 -6 -7 -7 -4 -2  0 -6 -1 11
-2 -5 -5 -4 -8 -4 -4 -6 -5 -7 -7 -3 -5 -7 12
 1 -3  0 -2 -3 -2 -2 -2 -3 -5 -6 -2 -4 -5 -3  9
-1 -3 -1 -4 -3 -3 -3 -5 -4 -3 -4 -3 -3 -5 -4  1  9
-6 -7 -8 -10 -7 -5 -8 -7 -5 -6 -5 -8 -4  0 -8 -7 -7 17
-5 -4 -5 -7 -6 -4 -7 -8  1 -4 -4 -5 -5  4 -7 -5 -5  2 12
-2 -6 -7 -7 -3 -5 -5 -8 -7  4  0 -4  0 -3 -5 -4 -1 -5 -5  8
""",
    'PAM30': """
  6
 -7   8
 -4  -6   8
 -3 -10   2   8
 -6  -8 -11 -14  10
 -4  -2  -3  -2 -14   8
 -2  -9  -2   2 -14   1   8
 -2  -9  -3  -3  -9  -7  -4   6
 -7  -2   0  -4  -7   1  -5  -9   9
 -5  -5  -5  -7  -6  -8  -5 -11  -9   8
 -6  -8  -7 -12 -15  -5  -9 -10  -6  -1   7
 -7   0  -1  -4 -14  -3  -4  -7  -6  -6  -8   7
 -5  -4  -9 -11 -13  -4  -7  -8 -10  -1   1  -2  11
 -8  -9  -9 -15 -13 -13 -14  -9  -6  -2  -3 -14  -4   9
 -2  -4  -6  -8  -8  -3  -5  -6  -4  -8  -7  -6  -8 -10   8
  0  -3   0  -4  -3  -5  -4  -2  -6  -7  -8  -4  -5  -6  -2   6
 -1  -6  -2  -5  -8  -5  -6  -6  -7  -2  -7  -3  -4  -9  -4   0   7
-13  -2  -8 -15 -15 -13 -17 -15  -7 -14  -6 -12 -13  -4 -14  -5 -13  13
 -8 -10  -4 -11  -4 -12  -8 -14  -3  -6  -7  -9 -11   2 -13  -7  -6  -5  10
 -2  -8  -8  -8  -6  -7  -6  -5  -6   2  -2  -9  -1  -8  -6  -6  -3 -15  -7   7
""",
    'PAM60': """
  5
 -5   8
 -2  -3   6
 -1  -6   3   7
 -5  -6  -8 -10   9
 -3   0  -1   0 -10   7
 -1  -5   0   3 -10   2   7
  0  -6  -1  -1  -7  -5  -2   6
 -5   0   1  -2  -6   2  -3  -6   8
 -3  -4  -4  -5  -4  -5  -4  -7  -6   7
 -4  -6  -5  -9 -11  -3  -6  -7  -4   1   6
 -5   2   0  -2 -10  -1  -3  -5  -4  -4  -5   6
 -3  -2  -6  -7  -9  -3  -5  -6  -6   1   2  -1  10
 -6  -7  -6 -11  -9  -9 -10  -7  -4   0  -1 -10  -2   8
  0  -2  -3  -5  -6  -1  -3  -4  -2  -6  -5  -4  -6  -7   7
  1  -2   1  -2  -1  -3  -2   0  -4  -4  -6  -2  -4  -5   0   5
  1  -4   0  -3  -5  -3  -4  -3  -5  -1  -5  -2  -2  -6  -2   1   6
-10   0  -6 -10 -12  -9 -12 -10  -5  -9  -4  -8  -8  -3  -9  -4  -8  13
 -6  -8  -3  -8  -2  -8  -7  -9  -2  -4  -5  -7  -7   4  -9  -5  -5  -4  10
 -1  -5  -5  -5  -4  -5  -4  -4  -5   3  -1  -6   0  -5  -4  -4  -1 -11  -5   7
""",
    'PAM120': """
 3
-3  6
-1 -1  4
 0 -3  2  5
-3 -4 -5 -7  9
-1  1  0  1 -7  6
 0 -3  1  3 -7  2  5
 1 -4  0  0 -5 -3 -1  5
-3  1  2  0 -4  3 -1 -4  7
-1 -2 -2 -3 -3 -3 -3 -4 -4  6
-3 -4 -4 -5 -7 -2 -4 -5 -3  1  5
-2  2  1 -1 -7  0 -1 -3 -2 -3 -4  5
-2 -1 -3 -4 -6 -1 -3 -4 -4  1  3  0  8
-4 -5 -4 -7 -6 -6 -7 -5 -3  0  0 -7 -1  8
 1 -1 -2 -3 -4  0 -2 -2 -1 -3 -3 -2 -3 -5  6
 1 -1  1  0  0 -2 -1  1 -2 -2 -4 -1 -2 -3  1  3
 1 -2  0 -1 -3 -2 -2 -1 -3  0 -3 -1 -1 -4 -1  2  4
-7  1 -4 -8 -8 -6 -8 -8 -3 -6 -3 -5 -6 -1 -7 -2 -6 12
-4 -5 -2 -5 -1 -5 -5 -6 -1 -2 -2 -5 -4  4 -6 -3 -3 -2  8
 0 -3 -3 -3 -3 -3 -3 -2 -3  3  1 -4  1 -3 -2 -2  0 -8 -3  5
""",
    'PAM250': """
 2
-2  6
 0  0  2
 0 -1  2  4
-2 -4 -4 -5 12
 0  1  1  2 -5  4
 0 -1  1  3 -5  2  4
 1 -3  0  1 -3 -1  0  5
-1  2  2  1 -3  3  1 -2  6
-1 -2 -2 -2 -2 -2 -2 -3 -2  5
-2 -3 -3 -4 -6 -2 -3 -4 -2  2  6
-1  3  1  0 -5  1  0 -2  0 -2 -3  5
-1  0 -2 -3 -5 -1 -2 -3 -2  2  4  0  6
-3 -4 -3 -6 -4 -5 -5 -5 -2  1  2 -5  0  9
 1  0  0 -1 -3  0 -1  0  0 -2 -3 -1 -2 -5  6
 1  0  1  0  0 -1  0  1 -1 -1 -3  0 -2 -3  1  2
 1 -1  0  0 -2 -1  0  0 -1  0 -2  0 -1 -3  0  1  3
-6  2 -4 -7 -8 -5 -7 -7 -3 -5 -2 -3 -4  0 -6 -2 -5 17
-3 -4 -2 -4  0 -4 -4 -5  0 -1 -1 -4 -2  7 -5 -3 -3  0 10
 0 -2 -2 -2 -2 -2 -2 -1 -2  4  2 -2  2 -1 -1 -1  0 -6 -2  4
""",
}

# Published X rows (A..V then X/X). Tables distributed without one keep zeros.
_X_ROWS = {
    'BLOSUM45': [0, -1, -1, -1, -2, -1, -1, -1, -1, -1, -1, -1, -1, -1, -1, 0, 0, -2, -1, -1, -1],
    'BLOSUM62': [0, -1, -1, -1, -2, -1, -1, -1, -1, -1, -1, -1, -1, -1, -2, 0, 0, -2, -1, -1, -1],
    'BLOSUM80': [-1, -1, -1, -2, -3, -1, -1, -2, -2, -2, -2, -1, -1, -2, -2, -1, -1, -3, -2, -1, -1],
    'PAM30': [-3, -6, -3, -5, -9, -5, -5, -5, -5, -5, -6, -5, -5, -8, -5, -3, -4, -11, -7, -5, -5],
    'PAM250': [0, -1, 0, -1, -3, -1, -1, -1, -1, -1, -1, -1, -1, -2, -1, 0, 0, -4, -2, -1, -1],
}


class MatrixFormatError(ValueError):
    """A substitution-matrix table could not be read."""


@dataclass(frozen=True)
class SubstitutionMatrix:
    name: str
    values: np.ndarray      # (21, 21) int, alphabet order
    source: str = 'embedded'

    def row(self, letter: str) -> np.ndarray:
        return self.values[ALPHABET.index(letter)]


# ------------------------------------------------------------------
def _from_lower_triangle(name: str, text: str, x_row=None) -> SubstitutionMatrix:
    rows = [line.split() for line in text.strip().splitlines()]
    if len(rows) != 20 or any(len(r) != i + 1 for i, r in enumerate(rows)):
        raise MatrixFormatError(f"{name}: lower triangle is not 20 rows of 1..20 entries")
    values = np.zeros((21, 21), dtype=np.int64)
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            values[i, j] = values[j, i] = int(v)
    if x_row is not None:
        values[20, :] = values[:, 20] = x_row
    values.setflags(write=False)
    return SubstitutionMatrix(name=name, values=values)


def parse_matrix_text(text: str, name: str, source: str = 'file') -> SubstitutionMatrix:
    """Read an NCBI-style table: '#' comments, header row of letters,
    then one row per letter. Letters outside the alphabet are ignored;
    a missing X row or column stays zero."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith('#')]
    if not lines:
        raise MatrixFormatError(f"{name}: empty matrix text")
    header = lines[0].split()
    values = np.zeros((21, 21), dtype=np.int64)
    seen_rows = set()
    for line in lines[1:]:
        parts = line.split()
        letter, scores = parts[0].upper(), parts[1:]
        if len(scores) != len(header):
            raise MatrixFormatError(f"{name}: row {letter!r} has {len(scores)} scores, "
                                    f"header has {len(header)} letters")
        if letter not in ALPHABET:
            continue
        i = ALPHABET.index(letter)
        for col_letter, raw in zip(header, scores):
            col_letter = col_letter.upper()
            if col_letter not in ALPHABET:
                continue
            try:
                values[i, ALPHABET.index(col_letter)] = int(round(float(raw)))
            except ValueError:
                raise MatrixFormatError(f"{name}: bad score {raw!r} in row {letter!r}") from None
        seen_rows.add(letter)
    missing = set(STANDARD) - seen_rows
    if missing:
        raise MatrixFormatError(f"{name}: missing rows for {''.join(sorted(missing))}")
    values.setflags(write=False)
    return SubstitutionMatrix(name=name.upper(), values=values, source=source)


def load_matrix_file(path_or_text: str, name: str | None = None) -> SubstitutionMatrix:
    """Load a user matrix from a file path, or from the table text itself."""
    if os.path.exists(path_or_text):
        with open(path_or_text, 'r') as fh:
            text = fh.read()
        name = name or os.path.splitext(os.path.basename(path_or_text))[0]
        return parse_matrix_text(text, name, source=path_or_text)
    if name is None:
        raise MatrixFormatError("a name is required when loading a matrix from text")
    return parse_matrix_text(path_or_text, name, source='text')


def to_ncbi_text(matrix: SubstitutionMatrix) -> str:
    lines = ['   ' + '  '.join(f"{c:>2}" for c in ALPHABET)]
    for i, letter in enumerate(ALPHABET):
        lines.append(f"{letter:<2} " + ' '.join(f"{v:>3}" for v in matrix.values[i]))
    return '\n'.join(lines) + '\n'


EMBEDDED_MATRICES: dict[str, SubstitutionMatrix] = {
    name: _from_lower_triangle(name, _LOWER_TRIANGLES[name], _X_ROWS.get(name))
    for name in MATRIX_NAMES
}


def get_matrix(name: str) -> SubstitutionMatrix:
    try:
        return EMBEDDED_MATRICES[name.upper()]
    except KeyError:
        raise KeyError(f"unknown substitution matrix {name!r}; "
                       f"choose from {', '.join(MATRIX_NAMES)}") from None
