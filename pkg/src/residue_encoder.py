"""
Residue Encoding Schemes
========================
Maps residue letters to 21-position vectors: one-hot, or the residue's
full substitution-matrix row (raw integer scores unless normalised).
"""

from dataclasses import dataclass

import numpy as np
from sklearn.preprocessing import minmax_scale

from substitution_matrices import (
    ALPHABET, EMBEDDED_MATRICES, MATRIX_NAMES, SubstitutionMatrix,
)

WIDTH = len(ALPHABET)   # 21
ONE_HOT = 'one-hot'
SCHEME_NAMES = [ONE_HOT] + MATRIX_NAMES

_ONE_HOT_ALIASES = {'one-hot', 'onehot', 'one hot', 'one_hot'}
_LETTER_INDEX = {letter: i for i, letter in enumerate(ALPHABET)}


class InvalidResidueError(ValueError):
    """A character outside the 21-letter residue alphabet."""

    def __init__(self, letter: str, position: int | None = None):
        self.letter = letter
        self.position = position
        where = f" at position {position}" if position is not None else ''
        super().__init__(f"invalid residue letter {letter!r}{where}; "
                         f"expected one of {ALPHABET}")


@dataclass(frozen=True)
class EncodingScheme:
    name: str
    table: np.ndarray          # (21, 21) float64, row i encodes ALPHABET[i]
    width: int = WIDTH


_registry: dict[str, SubstitutionMatrix] = dict(EMBEDDED_MATRICES)
_scheme_cache: dict[tuple[str, bool], EncodingScheme] = {}


# ------------------------------------------------------------------
def _frozen(table: np.ndarray) -> np.ndarray:
    table = np.array(table, dtype=np.float64)
    table.setflags(write=False)
    return table


def canonical_name(name: str) -> str:
    key = name.strip().lower()
    if key in _ONE_HOT_ALIASES:
        return ONE_HOT
    upper = name.strip().upper()
    if upper in _registry:
        return upper
    raise KeyError(f"unknown encoding scheme {name!r}; "
                   f"choose from {', '.join(list_schemes())}")


def list_schemes() -> list[str]:
    extra = [n for n in _registry if n not in MATRIX_NAMES]
    return SCHEME_NAMES + extra


def register_scheme(matrix: SubstitutionMatrix) -> EncodingScheme:
    """Make a user-supplied matrix available by name for this process."""
    _registry[matrix.name.upper()] = matrix
    for key in [k for k in _scheme_cache if k[0] == matrix.name.upper()]:
        del _scheme_cache[key]
    return get_scheme(matrix.name)


def get_scheme(name: str, normalize: bool = False) -> EncodingScheme:
    canonical = canonical_name(name)
    key = (canonical, normalize)
    if key not in _scheme_cache:
        if canonical == ONE_HOT:
            table = np.eye(WIDTH)
        else:
            table = _registry[canonical].values.astype(np.float64)
            if normalize:
                table = minmax_scale(table.ravel()).reshape(table.shape)
        _scheme_cache[key] = EncodingScheme(name=canonical, table=_frozen(table))
    return _scheme_cache[key]


def _as_scheme(scheme) -> EncodingScheme:
    return scheme if isinstance(scheme, EncodingScheme) else get_scheme(scheme)


# ------------------------------------------------------------------
def encode_residue(scheme, letter: str) -> np.ndarray:
    scheme = _as_scheme(scheme)
    index = _LETTER_INDEX.get(letter)
    if index is None:
        raise InvalidResidueError(letter)
    return scheme.table[index].copy()


def sequence_indices(sequence: str) -> np.ndarray:
    indices = np.empty(len(sequence), dtype=np.int64)
    for pos, letter in enumerate(sequence):
        index = _LETTER_INDEX.get(letter)
        if index is None:
            raise InvalidResidueError(letter, pos)
        indices[pos] = index
    return indices


def encode_sequence(scheme, sequence: str) -> np.ndarray:
    """(len(sequence), 21) matrix; row i encodes sequence[i]."""
    scheme = _as_scheme(scheme)
    return scheme.table[sequence_indices(sequence)]
