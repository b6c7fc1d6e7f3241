"""Shared fixtures and helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from partialrom.geometry import Subspace
from partialrom.rng import derived_rng


def random_orthonormal(rng: np.random.Generator, ambient_dim: int, dim: int) -> np.ndarray:
    """A uniformly random (N, d) matrix with orthonormal columns."""
    g = rng.standard_normal((ambient_dim, dim))
    q, _ = np.linalg.qr(g)
    return q[:, :dim]


def random_subspace_pair(
    rng: np.random.Generator, ambient_dim: int, m: int, n: int
) -> tuple[Subspace, Subspace]:
    """An independent random (W, V) observation/prior subspace pair."""
    w = Subspace(random_orthonormal(rng, ambient_dim, m))
    v = Subspace(random_orthonormal(rng, ambient_dim, n))
    return w, v


@pytest.fixture
def rng() -> np.random.Generator:
    """A fresh deterministic generator per test."""
    return derived_rng(987654321)
