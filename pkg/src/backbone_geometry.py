"""
Backbone Dihedral Extraction
============================
Turns parsed ATOM records into per-residue phi / psi / omega angles.

    phi_i   = dihedral(C_{i-1}, N_i,  CA_i, C_i)
    psi_i   = dihedral(N_i,     CA_i, C_i,  N_{i+1})
    omega_i = dihedral(CA_{i-1}, C_{i-1}, N_i, CA_i)

Angles that need a missing neighbour, or that would span a chain break,
are UNDEFINED (None).
"""

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from pdb_parser import Atom, PDBParseError, parse_pdb_file

# -------------------------------------------------------------------
# Configuration
# -------------------------------------------------------------------
CHAIN_BREAK_DISTANCE = 2.0   # Å, peptide C(i-1) -> N(i)
DEGENERATE_NORM = 1e-9

UNDEFINED = None

THREE_TO_ONE = {
    'ALA': 'A', 'ARG': 'R', 'ASN': 'N', 'ASP': 'D', 'CYS': 'C',
    'GLN': 'Q', 'GLU': 'E', 'GLY': 'G', 'HIS': 'H', 'ILE': 'I',
    'LEU': 'L', 'LYS': 'K', 'MET': 'M', 'PHE': 'F', 'PRO': 'P',
    'SER': 'S', 'THR': 'T', 'TRP': 'W', 'TYR': 'Y', 'VAL': 'V',
}
ONE_TO_THREE = {v: k for k, v in THREE_TO_ONE.items()}

CSV_COLUMNS = ['pdb_id', 'chain', 'residue_seq', 'letter', 'phi', 'psi', 'omega']


class DegenerateGeometryError(ValueError):
    """Collinear or coincident points leave the dihedral undefined."""


@dataclass(frozen=True)
class ResidueBackbone:
    residue_seq: int
    residue_name: str
    n: np.ndarray
    ca: np.ndarray
    c: np.ndarray


@dataclass(frozen=True)
class ResidueTorsions:
    residue_seq: int
    one_letter: str
    phi: Optional[float] = UNDEFINED
    psi: Optional[float] = UNDEFINED
    omega: Optional[float] = UNDEFINED


@dataclass
class ChainRecord:
    pdb_id: str
    chain_id: str
    residues: list[ResidueTorsions]
    sequence: str
    breaks: list[int] = field(default_factory=list)

    def __post_init__(self):
        if len(self.sequence) != len(self.residues):
            raise ValueError("sequence length does not match residue count")

    @property
    def protein_id(self) -> str:
        return self.pdb_id

    def segments(self) -> list[tuple[int, int]]:
        """Half-open index ranges of the break-free stretches."""
        bounds = [0] + sorted(self.breaks) + [len(self.residues)]
        return [(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


# ------------------------------------------------------------------
# Geometry
# ------------------------------------------------------------------
def dihedral(p1, p2, p3, p4) -> float:
    """Signed dihedral in degrees, IUPAC convention, range (-180, 180]."""
    p1, p2, p3, p4 = (np.asarray(p, dtype=np.float64) for p in (p1, p2, p3, p4))
    b1 = p2 - p1
    b2 = p3 - p2
    b3 = p4 - p3

    b2_norm = np.linalg.norm(b2)
    n1 = np.cross(b1, b2)
    n2 = np.cross(b2, b3)
    if b2_norm < DEGENERATE_NORM or np.linalg.norm(n1) < DEGENERATE_NORM \
            or np.linalg.norm(n2) < DEGENERATE_NORM:
        raise DegenerateGeometryError("degenerate dihedral: collinear or coincident points")

    x = np.dot(n1, n2)
    y = np.dot(np.cross(n1, n2), b2) / b2_norm
    angle = float(np.degrees(np.arctan2(y, x)))
    return 180.0 if angle <= -180.0 else angle


def _safe_dihedral(p1, p2, p3, p4) -> Optional[float]:
    try:
        return dihedral(p1, p2, p3, p4)
    except DegenerateGeometryError:
        return UNDEFINED


def residue_letter(residue_name: str) -> str:
    return THREE_TO_ONE.get(residue_name.upper(), 'X')


# ------------------------------------------------------------------
# Torsion computation
# ------------------------------------------------------------------
def _collect_backbones(chain_atoms: list[Atom]) -> list[Optional[ResidueBackbone]]:
    """One entry per residue in file order; None marks an unusable residue."""
    grouped: dict[tuple[int, str], dict[str, Atom]] = {}
    for atom in chain_atoms:
        key = (atom.residue_seq, atom.insertion_code)
        slot = grouped.setdefault(key, {})
        slot.setdefault(atom.name, atom)

    residues: list[Optional[ResidueBackbone]] = []
    last_seq = None
    for (seq, icode), named in grouped.items():
        usable = (
            icode == ' '
            and all(k in named for k in ('N', 'CA', 'C'))
            and (last_seq is None or seq > last_seq)
        )
        if not usable:
            residues.append(None)
            continue
        residues.append(ResidueBackbone(
            residue_seq=seq,
            residue_name=named['CA'].residue_name,
            n=np.asarray(named['N'].coords, dtype=np.float64),
            ca=np.asarray(named['CA'].coords, dtype=np.float64),
            c=np.asarray(named['C'].coords, dtype=np.float64),
        ))
        last_seq = seq
    return residues


def _chain_record(pdb_id: str, chain_id: str,
                  entries: list[Optional[ResidueBackbone]]) -> Optional[ChainRecord]:
    backbones: list[ResidueBackbone] = []
    breaks: list[int] = []
    pending_gap = False
    for entry in entries:
        if entry is None:
            pending_gap = True
            continue
        if backbones:
            gap = np.linalg.norm(entry.n - backbones[-1].c) > CHAIN_BREAK_DISTANCE
            if pending_gap or gap:
                breaks.append(len(backbones))
        backbones.append(entry)
        pending_gap = False

    if not backbones:
        return None

    break_set = set(breaks)
    torsions = []
    for i, res in enumerate(backbones):
        joined_prev = i > 0 and i not in break_set
        joined_next = i + 1 < len(backbones) and (i + 1) not in break_set
        phi = omega = psi = UNDEFINED
        if joined_prev:
            prev = backbones[i - 1]
            phi = _safe_dihedral(prev.c, res.n, res.ca, res.c)
            omega = _safe_dihedral(prev.ca, prev.c, res.n, res.ca)
        if joined_next:
            psi = _safe_dihedral(res.n, res.ca, res.c, backbones[i + 1].n)
        torsions.append(ResidueTorsions(
            residue_seq=res.residue_seq,
            one_letter=residue_letter(res.residue_name),
            phi=phi, psi=psi, omega=omega,
        ))

    return ChainRecord(
        pdb_id=pdb_id,
        chain_id=chain_id,
        residues=torsions,
        sequence=''.join(t.one_letter for t in torsions),
        breaks=breaks,
    )


def compute_torsions(atoms: list[Atom], pdb_id: str = 'XXXX') -> list[ChainRecord]:
    """Group *atoms* (one model) by chain and compute backbone torsions."""
    by_chain: dict[str, list[Atom]] = {}
    for atom in atoms:
        by_chain.setdefault(atom.chain_id, []).append(atom)

    records = []
    for chain_id, chain_atoms in by_chain.items():
        record = _chain_record(pdb_id, chain_id, _collect_backbones(chain_atoms))
        if record is not None:
            records.append(record)
    return records


def chains_to_frame(chains: list[ChainRecord]) -> pd.DataFrame:
    rows = []
    for chain in chains:
        for res in chain.residues:
            rows.append({
                'pdb_id': chain.pdb_id,
                'chain': chain.chain_id,
                'residue_seq': res.residue_seq,
                'letter': res.one_letter,
                'phi': np.nan if res.phi is None else res.phi,
                'psi': np.nan if res.psi is None else res.psi,
                'omega': np.nan if res.omega is None else res.omega,
            })
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


# ======================================================================
class DihedralExtractor:
    """Batch extraction of backbone dihedrals from PDB files."""

    def __init__(self, verbose: bool = True):
        self.verbose = verbose
        self.chains: list[ChainRecord] = []
        self.failed: list[str] = []

    def _log(self, message: str) -> None:
        if self.verbose:
            print(message)

    # ------------------------------------------------------------------
    def load_file(self, path: str) -> list[ChainRecord]:
        pdb_id, atoms = parse_pdb_file(path)
        return compute_torsions(atoms, pdb_id=pdb_id)

    # ------------------------------------------------------------------
    def run(self, paths: list[str]) -> pd.DataFrame:
        self._log(f"Extracting dihedrals from {len(paths)} file(s)...")
        self.chains = []
        self.failed = []
        for path in paths:
            try:
                chains = self.load_file(path)
            except (OSError, PDBParseError) as e:
                self._log(f"⚠  Skipping {os.path.basename(path)}: {e}")
                self.failed.append(path)
                continue
            self.chains.extend(chains)
        df = chains_to_frame(self.chains)
        self._log(f"✓ {len(self.chains)} chain(s), {len(df)} residue(s)")
        return df

    # ------------------------------------------------------------------
    def save(self, df: pd.DataFrame, out_path: str) -> str:
        out_dir = os.path.dirname(out_path)
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
        # NaN is written as an empty field
        df.to_csv(out_path, index=False, float_format='%.3f')
        self._log(f"✓ Dihedrals saved to {out_path}")
        return out_path
