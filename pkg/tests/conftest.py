import os
import sys

import hypothesis
import numpy as np
import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)
sys.path.insert(0, os.path.join(ROOT, 'src'))

from backbone_geometry import ChainRecord, ResidueTorsions  # noqa: E402
from synthetic_corpus import HelixCorpusGenerator  # noqa: E402

np.seterr(all="warn")

hypothesis.settings.register_profile("default", max_examples=100, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=1000, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale training and multi-worker sweeps")


def make_chain(length: int, pdb_id: str = 'TEST', chain_id: str = 'A',
               breaks=(), sequence: str | None = None) -> ChainRecord:
    """Break-free helical chain with every angle defined."""
    sequence = sequence or ('ACDEFGHIKLMNPQRSTVWY' * (length // 20 + 1))[:length]
    residues = [ResidueTorsions(residue_seq=i + 1, one_letter=sequence[i],
                                phi=-57.0 + i, psi=-47.0 - i, omega=180.0)
                for i in range(length)]
    return ChainRecord(pdb_id=pdb_id, chain_id=chain_id, residues=residues,
                       sequence=sequence, breaks=list(breaks))


@pytest.fixture
def chain_factory():
    return make_chain


@pytest.fixture
def helix_corpus_dir(tmp_path):
    """Ten small helical proteins on disk with a manifest."""
    generator = HelixCorpusGenerator(n_chains=10, length=20, noise=3.0, seed=7, verbose=False)
    manifest = generator.save(generator.generate(), str(tmp_path / 'corpus'))
    return manifest
