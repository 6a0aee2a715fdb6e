"""
PDB Fixed-Column Reader
=======================
Extracts polymer ATOM records of the first model from PDB-format text.
HETATM, ANISOU, CONECT and every other record type are ignored.
"""

import math
import os
from dataclasses import dataclass

# -------------------------------------------------------------------
# Configuration
# -------------------------------------------------------------------
KEPT_ALT_LOCS = (' ', 'A')

# 0-based slices of the fixed-column ATOM layout
COL_NAME = slice(12, 16)
COL_ALT_LOC = 16
COL_RES_NAME = slice(17, 20)
COL_CHAIN = 21
COL_RES_SEQ = slice(22, 26)
COL_ICODE = 26
COL_X = slice(30, 38)
COL_Y = slice(38, 46)
COL_Z = slice(46, 54)


class PDBParseError(ValueError):
    """A record could not be read with the fixed-column layout."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


@dataclass(frozen=True)
class Atom:
    name: str
    residue_seq: int
    residue_name: str
    chain_id: str
    coords: tuple[float, float, float]
    model_number: int = 1
    alt_loc: str = ' '
    insertion_code: str = ' '


# ------------------------------------------------------------------
def _read_float(line: str, cols: slice, label: str, line_number: int) -> float:
    raw = line[cols].strip()
    try:
        value = float(raw)
    except ValueError:
        raise PDBParseError(line_number, f"malformed {label} coordinate {raw!r}") from None
    if not math.isfinite(value):
        raise PDBParseError(line_number, f"non-finite {label} coordinate {raw!r}")
    return value


def _parse_atom_line(line: str, line_number: int, model_number: int) -> Atom:
    if len(line.rstrip()) < 54:
        raise PDBParseError(line_number, "ATOM record shorter than 54 columns")
    line = line.ljust(80)

    name = line[COL_NAME].strip()
    if not name:
        raise PDBParseError(line_number, "empty atom name")

    raw_seq = line[COL_RES_SEQ].strip()
    try:
        residue_seq = int(raw_seq)
    except ValueError:
        raise PDBParseError(line_number, f"malformed residue number {raw_seq!r}") from None

    coords = (
        _read_float(line, COL_X, 'x', line_number),
        _read_float(line, COL_Y, 'y', line_number),
        _read_float(line, COL_Z, 'z', line_number),
    )
    return Atom(
        name=name,
        residue_seq=residue_seq,
        residue_name=line[COL_RES_NAME].strip(),
        chain_id=line[COL_CHAIN],
        coords=coords,
        model_number=model_number,
        alt_loc=line[COL_ALT_LOC],
        insertion_code=line[COL_ICODE],
    )


def parse_pdb(text: str) -> list[Atom]:
    """Return the ATOM records of the first model in *text*.

    Records before any MODEL line belong to model 1. Parsing stops at the
    first ENDMDL or at a second MODEL line. Only blank or 'A' alternate
    locations are kept.
    """
    atoms: list[Atom] = []
    models_seen = 0
    model_number = 1

    for line_number, line in enumerate(text.splitlines(), start=1):
        record = line[:6]
        if record.startswith('MODEL'):
            models_seen += 1
            if models_seen > 1:
                break
            try:
                model_number = int(line[10:14])
            except ValueError:
                model_number = 1
        elif record.startswith('ENDMDL'):
            break
        elif record.rstrip() == 'ATOM':
            atom = _parse_atom_line(line, line_number, max(model_number, 1))
            if atom.alt_loc in KEPT_ALT_LOCS:
                atoms.append(atom)
    return atoms


def write_atom_line(atom: Atom, serial: int = 1) -> str:
    """Serialise *atom* back to an 80-column ATOM record."""
    name = atom.name if len(atom.name) >= 4 else f" {atom.name:<3}"
    element = atom.name.lstrip('0123456789')[:1]
    x, y, z = atom.coords
    return (
        f"ATOM  {serial % 100000:5d} {name:<4}{atom.alt_loc:1}{atom.residue_name:>3} "
        f"{atom.chain_id:1}{atom.residue_seq:4d}{atom.insertion_code:1}   "
        f"{x:8.3f}{y:8.3f}{z:8.3f}{1.0:6.2f}{0.0:6.2f}          {element:>2}  "
    )


def write_pdb(atoms: list[Atom], header_id: str | None = None) -> str:
    lines = []
    if header_id:
        lines.append(f"HEADER    {'SYNTHETIC':<40}{'':9}   {header_id[:4]:<4}")
    previous_chain = None
    for serial, atom in enumerate(atoms, start=1):
        if previous_chain is not None and atom.chain_id != previous_chain:
            lines.append('TER')
        lines.append(write_atom_line(atom, serial))
        previous_chain = atom.chain_id
    lines.append('END')
    return '\n'.join(lines) + '\n'


def read_pdb_id(text: str, fallback: str) -> str:
    """HEADER idCode (cols 63-66) when present, otherwise *fallback*."""
    for line in text.splitlines():
        if line.startswith('HEADER'):
            code = line[62:66].strip()
            if code:
                return code.upper()
            break
        if line.startswith('ATOM'):
            break
    return fallback.upper()


def parse_pdb_file(path: str) -> tuple[str, list[Atom]]:
    """Read a PDB file; returns (pdb_id, first-model atoms)."""
    with open(path, 'r') as fh:
        text = fh.read()
    stem = os.path.splitext(os.path.basename(path))[0]
    return read_pdb_id(text, stem), parse_pdb(text)
