"""Core Euclidean geometry: subspaces, degenerate ellipsoids, and prior manifolds.

The ambient space is R^N with the standard inner product.  Vectors are plain
1-D ``numpy`` arrays; a ``Subspace`` wraps an orthonormal basis stored
column-wise.  A *degenerate ellipsoid* is the tube ``{h : dist(h, V) <= w}``
around a subspace ``V``; a prior manifold is a finite intersection of such
tubes.  Discretized PDE states enter this picture after the mass-Cholesky
change of coordinates (see :mod:`partialrom.thermal`), so no weighted inner
products appear anywhere downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation

#: Residual threshold used when orthonormalizing: a candidate vector whose
#: residual after projection falls below DROP_TOL * (1 + ||v||) is discarded
#: as linearly dependent.
DROP_TOL = 1e-10


def as_vector(h, ambient_dim: int | None = None) -> np.ndarray:
    """Validate ``h`` as a finite 1-D float vector, optionally of fixed length."""
    arr = np.asarray(h, dtype=float)
    if arr.ndim != 1:
        raise ContractViolation(f"expected a 1-D vector, got shape {arr.shape}")
    if ambient_dim is not None and arr.shape[0] != ambient_dim:
        raise ContractViolation(
            f"vector has length {arr.shape[0]}, expected ambient dimension {ambient_dim}"
        )
    if not np.all(np.isfinite(arr)):
        raise ContractViolation("vector has non-finite entries")
    return arr


def _mgs(columns: np.ndarray, base: np.ndarray | None = None) -> np.ndarray:
    """Re-orthogonalized (two-pass) modified Gram-Schmidt.

    Orthonormalizes the columns of ``columns`` against ``base`` (assumed
    orthonormal) and against each other, in order, dropping dependent vectors.
    Returns only the newly accepted columns.
    """
    n_ambient = columns.shape[0] if base is None else base.shape[0]
    accepted: list[np.ndarray] = []

    def proj_coeffs(v: np.ndarray) -> np.ndarray:
        out = v.copy()
        if base is not None and base.shape[1]:
            out -= base @ (base.T @ out)
        for u in accepted:
            out -= u * (u @ out)
        return out

    for j in range(columns.shape[1]):
        v = columns[:, j]
        r = proj_coeffs(v)
        r = proj_coeffs(r)  # second pass controls cancellation error
        nrm = np.linalg.norm(r)
        if nrm >= DROP_TOL * (1.0 + np.linalg.norm(v)):
            accepted.append(r / nrm)
    if not accepted:
        return np.zeros((n_ambient, 0))
    return np.column_stack(accepted)


@dataclass(frozen=True)
class Subspace:
    """A linear subspace of R^N held as an orthonormal column basis.

    ``basis`` has shape (N, d); d = 0 encodes the zero subspace.
    """

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        if b.ndim != 2:
            raise ContractViolation(f"basis must be 2-D, got shape {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ContractViolation("basis has non-finite entries")
        if b.shape[1]:
            gram = b.T @ b
            if not np.allclose(gram, np.eye(b.shape[1]), atol=1e-8):
                raise ContractViolation("basis columns are not orthonormal")
        b = np.ascontiguousarray(b)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0)))

    @classmethod
    def from_vectors(cls, vectors, ambient_dim: int | None = None) -> "Subspace":
        """Span of the given vectors (rows of a matrix or a list of 1-D arrays)."""
        return orthonormalize(vectors, ambient_dim=ambient_dim)

    def contains(self, h, tol: float = 1e-10) -> bool:
        return dist(h, self) <= tol * (1.0 + float(np.linalg.norm(h)))


def orthonormalize(vectors, ambient_dim: int | None = None) -> Subspace:
    """Build a :class:`Subspace` spanning ``vectors``, dropping dependent ones.

    ``vectors`` may be a list of 1-D arrays or a 2-D array whose *rows* are the
    vectors.  Order matters: vectors are processed first-to-first, so the
    accepted basis directions follow the input order.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        rows = [vectors[i] for i in range(vectors.shape[0])]
    else:
        rows = list(vectors)
    if not rows:
        if ambient_dim is None:
            raise ContractViolation("cannot infer ambient dimension from an empty vector list")
        return Subspace.zero(ambient_dim)
    cols = np.column_stack([as_vector(v, ambient_dim) for v in rows])
    return Subspace(_mgs(cols))


def project(h, subspace: Subspace) -> np.ndarray:
    """Orthogonal projection of ``h`` onto the subspace."""
    v = as_vector(h, subspace.ambient_dim)
    if subspace.dim == 0:
        return np.zeros_like(v)
    b = subspace.basis
    return b @ (b.T @ v)


def dist(h, subspace: Subspace) -> float:
    """Euclidean distance from ``h`` to the subspace."""
    v = as_vector(h, subspace.ambient_dim)
    return float(np.linalg.norm(v - project(v, subspace)))


def direct_sum(a: Subspace, b: Subspace) -> Subspace:
    """Span of the union of two subspaces (not required to be orthogonal)."""
    if a.ambient_dim != b.ambient_dim:
        raise ContractViolation("subspaces live in different ambient dimensions")
    extra = _mgs(b.basis, base=a.basis if a.dim else None)
    if a.dim == 0:
        return Subspace(extra)
    if extra.shape[1] == 0:
        return a
    return Subspace(np.hstack([a.basis, extra]))


@dataclass(frozen=True)
class DegenerateEllipsoid:
    """The tube ``{h : dist(h, subspace) <= width}`` around a subspace."""

    subspace: Subspace
    width: float

    def __post_init__(self):
        if not np.isfinite(self.width) or self.width < 0:
            raise ContractViolation(f"ellipsoid width must be finite and >= 0, got {self.width}")

    @property
    def ambient_dim(self) -> int:
        return self.subspace.ambient_dim


def ellipsoid_contains(ellipsoid: DegenerateEllipsoid, h, tol: float = 1e-9) -> bool:
    return dist(h, ellipsoid.subspace) <= ellipsoid.width + tol


@dataclass(frozen=True)
class PriorManifold:
    """Intersection of finitely many degenerate ellipsoids (the prior set)."""

    ellipsoids: tuple[DegenerateEllipsoid, ...]

    def __post_init__(self):
        ells = tuple(self.ellipsoids)
        if not ells:
            raise ContractViolation("a prior needs at least one ellipsoid")
        n_amb = ells[0].ambient_dim
        for e in ells[1:]:
            if e.ambient_dim != n_amb:
                raise ContractViolation("prior ellipsoids live in different ambient dimensions")
        object.__setattr__(self, "ellipsoids", ells)

    @property
    def n_factors(self) -> int:
        return len(self.ellipsoids)

    @property
    def ambient_dim(self) -> int:
        return self.ellipsoids[0].ambient_dim

    @classmethod
    def single(cls, subspace: Subspace, width: float) -> "PriorManifold":
        return cls((DegenerateEllipsoid(subspace, width),))


def prior_contains(prior: PriorManifold, h, tol: float = 1e-9) -> bool:
    return all(ellipsoid_contains(e, h, tol) for e in prior.ellipsoids)


def prefix_widths(vectors: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Worst-case distance of row vectors to every basis-prefix span (dims 1..d).

    ``basis`` is an (N, d) orthonormal matrix whose column prefixes define the
    nested spaces.  The squared residual at prefix length j is built as the
    exact residual at the full basis plus the squared coordinates beyond j;
    subtracting cumulative squares from ``||v||^2`` instead would bottom out at
    the cancellation level ``sqrt(eps_machine) * ||v||``, which matters when
    genuine widths sit many orders below the vector norms.
    """
    if basis.shape[1] == 0:
        return np.zeros(0)
    coords = vectors @ basis
    resid = vectors - coords @ basis.T
    resid -= (resid @ basis) @ basis.T  # second pass controls cancellation error
    term_sq = np.einsum("ij,ij->i", resid, resid)
    c_sq = coords**2
    beyond = np.hstack(
        [
            np.cumsum(c_sq[:, ::-1], axis=1)[:, ::-1][:, 1:],
            np.zeros((vectors.shape[0], 1)),
        ]
    )
    per_dim_sq = term_sq[:, None] + beyond
    return np.sqrt(per_dim_sq.max(axis=0))


@dataclass(frozen=True)
class SnapshotSet:
    """A finite cloud of ambient vectors, stored as rows of one matrix."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0:
            raise ContractViolation(f"snapshot matrix must be 2-D and nonempty, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ContractViolation("snapshots contain non-finite entries")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @classmethod
    def from_list(cls, snapshots) -> "SnapshotSet":
        return cls(np.vstack([as_vector(h) for h in snapshots]))

    @property
    def ambient_dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def __iter__(self):
        return iter(self.vectors)

    def concat(self, other: "SnapshotSet") -> "SnapshotSet":
        if other.ambient_dim != self.ambient_dim:
            raise ContractViolation("snapshot sets live in different ambient dimensions")
        return SnapshotSet(np.vstack([self.vectors, other.vectors]))

    def residual_norms(self, subspace: Subspace) -> np.ndarray:
        """Distances of every snapshot to ``subspace`` (vectorized)."""
        if subspace.ambient_dim != self.ambient_dim:
            raise ContractViolation("subspace ambient dimension does not match snapshots")
        v = self.vectors
        if subspace.dim == 0:
            return np.linalg.norm(v, axis=1)
        b = subspace.basis
        resid = v - (v @ b) @ b.T
        return np.linalg.norm(resid, axis=1)
