"""
Synthetic Helix Corpus
======================
Builds backbone-only chains with ideal bond geometry from prescribed
phi / psi / omega angles and writes them as PDB files plus a manifest.
Used for demos and for the desk-scale learning check.
"""

import os

import numpy as np
from scipy.spatial.transform import Rotation

from backbone_geometry import ONE_TO_THREE
from pdb_parser import Atom, write_pdb

# -------------------------------------------------------------------
# Configuration
# -------------------------------------------------------------------
BOND_N_CA = 1.458
BOND_CA_C = 1.525
BOND_C_N = 1.329
ANGLE_N_CA_C = 111.2
ANGLE_CA_C_N = 116.2
ANGLE_C_N_CA = 121.7

HELIX_PHI = -57.0
HELIX_PSI = -47.0
TRANS_OMEGA = 180.0

RESIDUE_LETTERS = "ARNDCQEGHILKMFPSTWYV"
MANIFEST_NAME = 'manifest.txt'


def place_atom(a, b, c, bond: float, angle: float, torsion: float) -> np.ndarray:
    """Position d so that |cd| = bond, angle(b, c, d) = angle and
    dihedral(a, b, c, d) = torsion (degrees)."""
    a, b, c = (np.asarray(p, dtype=np.float64) for p in (a, b, c))
    bc = c - b
    bc /= np.linalg.norm(bc)
    n = np.cross(b - a, bc)
    n /= np.linalg.norm(n)
    m = np.cross(n, bc)
    theta = np.radians(angle)
    tau = np.radians(torsion)
    return c + bond * (-np.cos(theta) * bc
                       + np.sin(theta) * np.cos(tau) * m
                       + np.sin(theta) * np.sin(tau) * n)


def build_backbone(phi, psi, omega) -> np.ndarray:
    """(L, 3, 3) coordinates of N, CA, C per residue.

    phi[0], psi[-1] and omega[0] have no geometric effect."""
    phi, psi, omega = (np.asarray(v, dtype=np.float64) for v in (phi, psi, omega))
    L = len(phi)
    if not (len(psi) == len(omega) == L) or L == 0:
        raise ValueError("phi, psi and omega must be non-empty and of equal length")

    coords = np.zeros((L, 3, 3))
    theta = np.radians(ANGLE_N_CA_C)
    coords[0, 1] = [BOND_N_CA, 0.0, 0.0]
    coords[0, 2] = coords[0, 1] + BOND_CA_C * np.array([-np.cos(theta), np.sin(theta), 0.0])
    for i in range(L - 1):
        n_i, ca_i, c_i = coords[i]
        n_next = place_atom(n_i, ca_i, c_i, BOND_C_N, ANGLE_CA_C_N, psi[i])
        ca_next = place_atom(ca_i, c_i, n_next, BOND_N_CA, ANGLE_C_N_CA, omega[i + 1])
        c_next = place_atom(c_i, n_next, ca_next, BOND_CA_C, ANGLE_N_CA_C, phi[i + 1])
        coords[i + 1] = (n_next, ca_next, c_next)
    return coords


def backbone_atoms(coords: np.ndarray, sequence: str, chain_id: str = 'A',
                   first_seq: int = 1) -> list[Atom]:
    if len(sequence) != len(coords):
        raise ValueError("sequence length does not match coordinates")
    atoms = []
    for i, (letter, residue) in enumerate(zip(sequence, coords)):
        for name, xyz in zip(('N', 'CA', 'C'), residue):
            atoms.append(Atom(
                name=name,
                residue_seq=first_seq + i,
                residue_name=ONE_TO_THREE[letter],
                chain_id=chain_id,
                coords=tuple(float(v) for v in xyz),
            ))
    return atoms


# ======================================================================
class HelixCorpusGenerator:
    """Alpha-helical chains with Gaussian angle noise and random placement."""

    def __init__(self, n_chains: int = 50, length: int = 30, noise: float = 3.0,
                 phi: float = HELIX_PHI, psi: float = HELIX_PSI,
                 omega: float = TRANS_OMEGA, seed: int = 42, verbose: bool = True):
        self.n_chains = n_chains
        self.length = length
        self.noise = noise
        self.phi = phi
        self.psi = psi
        self.omega = omega
        self.rng = np.random.default_rng(seed)
        self.verbose = verbose

    def _log(self, message: str) -> None:
        if self.verbose:
            print(message)

    # ------------------------------------------------------------------
    def generate_chain(self) -> tuple[str, np.ndarray]:
        L = self.length
        angles = [base + self.rng.normal(0.0, self.noise, size=L)
                  for base in (self.phi, self.psi, self.omega)]
        coords = build_backbone(*angles)
        rotation = Rotation.from_rotvec(self.rng.normal(size=3))
        shift = self.rng.uniform(-20.0, 20.0, size=3)
        coords = rotation.apply(coords.reshape(-1, 3)).reshape(coords.shape) + shift
        sequence = ''.join(self.rng.choice(list(RESIDUE_LETTERS), size=L))
        return sequence, coords

    def generate(self) -> list[tuple[str, list[Atom]]]:
        self._log(f"Generating {self.n_chains} helical chain(s) of length {self.length}...")
        proteins = []
        for i in range(self.n_chains):
            sequence, coords = self.generate_chain()
            proteins.append((f"H{i:03d}", backbone_atoms(coords, sequence)))
        self._log(f"✓ {len(proteins)} chain(s) generated")
        return proteins

    # ------------------------------------------------------------------
    def save(self, proteins: list[tuple[str, list[Atom]]], out_dir: str,
             class_label: str | None = None) -> str:
        os.makedirs(out_dir, exist_ok=True)
        lines = []
        for pdb_id, atoms in proteins:
            filename = f"{pdb_id}.pdb"
            with open(os.path.join(out_dir, filename), 'w') as fh:
                fh.write(write_pdb(atoms, header_id=pdb_id))
            lines.append(f"{filename}\t{class_label}" if class_label else filename)
        manifest_path = os.path.join(out_dir, MANIFEST_NAME)
        with open(manifest_path, 'w') as fh:
            fh.write('\n'.join(lines) + '\n')
        self._log(f"✓ Corpus saved to {out_dir} ({MANIFEST_NAME})")
        return manifest_path
