"""
Windowed Training Data
======================
Builds sliding-window samples (w encoded residues -> sin/cos targets of
the centre residue) and performs the protein-level 70/20/10 split.
Proteins are split before encoding, so every window of a protein lands
in the same partition.
"""

import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd
from pydantic import BaseModel, field_validator, model_validator
from sklearn.utils import shuffle

from angle_codec import decode_angles, encode_angle
from backbone_geometry import ChainRecord, compute_torsions
from pdb_parser import PDBParseError, parse_pdb_file
from residue_encoder import WIDTH, canonical_name, encode_sequence, get_scheme

# -------------------------------------------------------------------
# Configuration
# -------------------------------------------------------------------
WINDOW_SIZES = (3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 23)
SPLIT_PERCENTAGES = (70, 20, 10)   # train / validation / test
PARTITIONS = ('train', 'validation', 'test')


class EmptyInputError(ValueError):
    """An operation that needs at least one item received none."""


class TargetMode(str, Enum):
    PHI = 'phi'
    PSI = 'psi'
    BOTH = 'both'

    @property
    def angle_names(self) -> tuple[str, ...]:
        return ('phi', 'psi') if self is TargetMode.BOTH else (self.value,)

    @property
    def output_width(self) -> int:
        return 2 * len(self.angle_names)


class WindowConfig(BaseModel):
    window_size: int
    scheme: str = 'one-hot'
    target_mode: TargetMode = TargetMode.BOTH
    normalize: bool = False

    @field_validator('window_size')
    @classmethod
    def _odd_window(cls, v: int) -> int:
        if v not in WINDOW_SIZES:
            raise ValueError(f"window_size must be one of {WINDOW_SIZES}, got {v}")
        return v

    @field_validator('scheme')
    @classmethod
    def _known_scheme(cls, v: str) -> str:
        try:
            return canonical_name(v)
        except KeyError as e:
            raise ValueError(str(e)) from None

    def encoding(self):
        return get_scheme(self.scheme, normalize=self.normalize)


@dataclass(frozen=True)
class WindowSample:
    inputs: np.ndarray                   # (window_size, 21)
    target: np.ndarray                   # (2,) or (4,)
    center_residue: tuple[str, str, int]  # (pdb_id, chain, residue_seq)


@dataclass
class WindowSet:
    inputs: np.ndarray      # (N, w, 21)
    targets: np.ndarray     # (N, k)
    angles: np.ndarray      # (N, k // 2) degrees
    centers: list = field(default_factory=list)

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def window_size(self) -> int:
        return self.inputs.shape[1]

    @classmethod
    def empty(cls, window_size: int, output_width: int) -> 'WindowSet':
        return cls(
            inputs=np.zeros((0, window_size, WIDTH)),
            targets=np.zeros((0, output_width)),
            angles=np.zeros((0, output_width // 2)),
        )

    @classmethod
    def from_samples(cls, samples: list[WindowSample], window_size: int,
                     output_width: int) -> 'WindowSet':
        if not samples:
            return cls.empty(window_size, output_width)
        targets = np.stack([s.target for s in samples])
        return cls(
            inputs=np.stack([s.inputs for s in samples]),
            targets=targets,
            angles=decode_angles(targets[:, 0::2], targets[:, 1::2]),
            centers=[s.center_residue for s in samples],
        )


# ------------------------------------------------------------------
# Windowing
# ------------------------------------------------------------------
def make_windows(chain: ChainRecord, config: WindowConfig) -> list[WindowSample]:
    """Full windows only, never across a chain break; centres with an
    UNDEFINED required angle are dropped."""
    w = config.window_size
    half = w // 2
    if len(chain.sequence) < w:
        return []

    encoded = encode_sequence(config.encoding(), chain.sequence)
    names = config.target_mode.angle_names
    samples = []
    for start, end in chain.segments():
        for center in range(start + half, end - half):
            residue = chain.residues[center]
            angles = [getattr(residue, name) for name in names]
            if any(a is None for a in angles):
                continue
            target = np.array([v for a in angles for v in encode_angle(a)])
            samples.append(WindowSample(
                inputs=encoded[center - half:center + half + 1],
                target=target,
                center_residue=(chain.pdb_id, chain.chain_id, residue.residue_seq),
            ))
    return samples


def window_arrays(chains: list[ChainRecord], config: WindowConfig) -> WindowSet:
    samples = [s for chain in chains for s in make_windows(chain, config)]
    return WindowSet.from_samples(samples, config.window_size,
                                  config.target_mode.output_width)


# ------------------------------------------------------------------
# Protein-level split
# ------------------------------------------------------------------
class SplitManifest(BaseModel):
    train: list[str]
    validation: list[str]
    test: list[str]
    seed: int

    @model_validator(mode='after')
    def _disjoint(self) -> 'SplitManifest':
        parts = [set(self.train), set(self.validation), set(self.test)]
        if sum(len(p) for p in parts) != len(set().union(*parts)):
            raise ValueError("split partitions overlap")
        return self

    def partition(self, name: str) -> list[str]:
        return getattr(self, name)

    def save(self, path: str) -> str:
        with open(path, 'w') as fh:
            fh.write(self.model_dump_json(indent=2))
        return path

    @classmethod
    def load(cls, path: str) -> 'SplitManifest':
        with open(path, 'r') as fh:
            return cls.model_validate_json(fh.read())


def split_sizes(n: int, percentages=SPLIT_PERCENTAGES) -> tuple[int, ...]:
    """Largest-remainder apportionment of n items; ties go to the earlier
    partition."""
    quotas = [n * p for p in percentages]
    total = sum(percentages)
    sizes = [q // total for q in quotas]
    remainders = [q % total for q in quotas]
    order = sorted(range(len(quotas)), key=lambda i: (-remainders[i], i))
    for i in order[:n - sum(sizes)]:
        sizes[i] += 1
    return tuple(sizes)


def split_proteins(ids: list[str], seed: int) -> SplitManifest:
    if not ids:
        raise EmptyInputError("cannot split an empty protein list")
    if len(set(ids)) != len(ids):
        raise ValueError("protein ids must be unique before splitting")
    shuffled = list(shuffle(list(ids), random_state=seed))
    n_train, n_val, _ = split_sizes(len(shuffled))
    return SplitManifest(
        train=shuffled[:n_train],
        validation=shuffled[n_train:n_train + n_val],
        test=shuffled[n_train + n_val:],
        seed=seed,
    )


# ------------------------------------------------------------------
# Manifest & corpus
# ------------------------------------------------------------------
@dataclass(frozen=True)
class ManifestEntry:
    path: str
    class_label: str | None = None


def read_manifest(path: str) -> list[ManifestEntry]:
    """One protein file per line, optionally followed by a tab and a
    class label. Relative paths resolve against the manifest directory."""
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    with open(path, 'r') as fh:
        for line in fh:
            line = line.rstrip('\n')
            if not line.strip() or line.lstrip().startswith('#'):
                continue
            file_part, _, label = line.partition('\t')
            file_path = file_part.strip()
            if not os.path.isabs(file_path):
                file_path = os.path.join(base, file_path)
            entries.append(ManifestEntry(file_path, label.strip() or None))
    return entries


@dataclass
class Corpus:
    chains: list[ChainRecord] = field(default_factory=list)
    labels: dict[str, str | None] = field(default_factory=dict)

    def protein_ids(self) -> list[str]:
        return list(dict.fromkeys(c.protein_id for c in self.chains))

    def chains_for(self, ids) -> list[ChainRecord]:
        wanted = set(ids)
        return [c for c in self.chains if c.protein_id in wanted]


def load_corpus(entries: list[ManifestEntry], class_label: str | None = None,
                verbose: bool = False) -> Corpus:
    corpus = Corpus()
    for entry in entries:
        if class_label is not None and entry.class_label != class_label:
            continue
        try:
            pdb_id, atoms = parse_pdb_file(entry.path)
        except (OSError, PDBParseError) as e:
            if verbose:
                print(f"⚠  Skipping {entry.path}: {e}")
            continue
        if pdb_id in corpus.labels:
            if verbose:
                print(f"⚠  Skipping duplicate protein {pdb_id} ({entry.path})")
            continue
        chains = compute_torsions(atoms, pdb_id=pdb_id)
        if not chains:
            continue
        corpus.labels[pdb_id] = entry.class_label
        corpus.chains.extend(chains)
    return corpus


def build_partitions(corpus: Corpus, split: SplitManifest,
                     config: WindowConfig) -> dict[str, WindowSet]:
    return {
        name: window_arrays(corpus.chains_for(split.partition(name)), config)
        for name in PARTITIONS
    }


# ------------------------------------------------------------------
# Columnar text format
# ------------------------------------------------------------------
def write_partition(window_set: WindowSet, path: str) -> str:
    n, w, width = window_set.inputs.shape
    k = window_set.targets.shape[1]
    columns = [f"x{i}" for i in range(w * width)] + [f"t{i}" for i in range(k)]
    data = np.hstack([window_set.inputs.reshape(n, w * width), window_set.targets])
    pd.DataFrame(data, columns=columns).to_csv(path, index=False, float_format='%.17g')
    return path


def read_partition(path: str) -> WindowSet:
    df = pd.read_csv(path, float_precision='round_trip')
    x_cols = [c for c in df.columns if c.startswith('x')]
    t_cols = [c for c in df.columns if c.startswith('t')]
    if len(x_cols) % WIDTH or len(t_cols) not in (2, 4):
        raise ValueError(f"{path}: not a window partition file")
    w = len(x_cols) // WIDTH
    targets = df[t_cols].to_numpy(dtype=np.float64)
    if len(df) == 0:
        return WindowSet.empty(w, len(t_cols))
    return WindowSet(
        inputs=df[x_cols].to_numpy(dtype=np.float64).reshape(len(df), w, WIDTH),
        targets=targets,
        angles=decode_angles(targets[:, 0::2], targets[:, 1::2]),
    )


# ======================================================================
class DatasetBuilder:
    """Manifest -> corpus -> protein split -> windowed partitions on disk."""

    def __init__(self, verbose: bool = True):
        self.verbose = verbose
        self.corpus: Corpus | None = None
        self.split: SplitManifest | None = None
        self.partitions: dict[str, WindowSet] = {}

    def _log(self, message: str) -> None:
        if self.verbose:
            print(message)

    # ------------------------------------------------------------------
    def load(self, manifest_path: str, class_label: str | None = None) -> Corpus:
        self._log("Loading manifest...")
        entries = read_manifest(manifest_path)
        self.corpus = load_corpus(entries, class_label=class_label, verbose=self.verbose)
        self._log(f"✓ {len(self.corpus.protein_ids())} protein(s), "
                  f"{len(self.corpus.chains)} chain(s) loaded")
        return self.corpus

    # ------------------------------------------------------------------
    def build(self, config: WindowConfig, seed: int) -> dict[str, WindowSet]:
        if self.corpus is None or not self.corpus.chains:
            raise EmptyInputError("no usable chains in the corpus")
        self.split = split_proteins(self.corpus.protein_ids(), seed)
        self.partitions = build_partitions(self.corpus, self.split, config)
        sizes = ', '.join(f"{k}={len(v)}" for k, v in self.partitions.items())
        self._log(f"✓ Windows built ({sizes})")
        return self.partitions

    # ------------------------------------------------------------------
    def save(self, out_dir: str) -> dict[str, str]:
        os.makedirs(out_dir, exist_ok=True)
        paths = {name: write_partition(ws, os.path.join(out_dir, f"{name}.csv"))
                 for name, ws in self.partitions.items()}
        paths['split'] = self.split.save(os.path.join(out_dir, 'split.json'))
        self._log(f"✓ Partitions saved to {out_dir}")
        return paths
