import numpy as np
import pytest

from hiertax.types import SparseDocMatrix


def dense_to_matrix(dense) -> SparseDocMatrix:
    """Dense (docs x features) integer array -> sparse corpus."""
    dense = np.asarray(dense)
    rows = [
        {int(f): int(c) for f, c in enumerate(row) if c > 0} for row in dense
    ]
    return SparseDocMatrix.from_rows(rows, dense.shape[1])


def matrix_to_dense(data: SparseDocMatrix) -> np.ndarray:
    out = np.zeros((data.num_docs, data.num_features), dtype=np.int64)
    for i, row in enumerate(data.rows):
        for f, c in row.items():
            out[i, f] = c
    return out


def random_corpus(rng, docs=20, features=8, mean_tokens=30) -> SparseDocMatrix:
    theta = rng.dirichlet(np.ones(features))
    dense = np.stack([rng.multinomial(mean_tokens, theta) for _ in range(docs)])
    return dense_to_matrix(dense)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
