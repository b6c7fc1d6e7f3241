"""Deterministic point estimation from partial observations.

The estimate for a single-ellipsoid prior is the center of the posterior
slice — the unique observation-consistent state with no deviation along the
unconstrained directions.  It is linear in the observation values, so a zero
observation maps to the exact zero vector.  Reducing the manifold of point
estimates (instead of the full posterior) is the natural baseline against
which the posterior-sampling pipeline is compared.
"""

from __future__ import annotations

import numpy as np

from .bases import SuitableBases, compute_suitable_bases
from .errors import ContractViolation, UnsupportedPriorError
from .geometry import DegenerateEllipsoid, PriorManifold, SnapshotSet, Subspace
from .greedy import GreedyResult, StoppingRule, greedy
from .sampling import Observation, observe_cloud


def _single_factor(prior: PriorManifold | DegenerateEllipsoid) -> DegenerateEllipsoid:
    if isinstance(prior, DegenerateEllipsoid):
        return prior
    if prior.n_factors != 1:
        raise UnsupportedPriorError(
            f"point estimation is defined for a single-ellipsoid prior, got {prior.n_factors} factors"
        )
    return prior.ellipsoids[0]


def point_estimate(
    obs: Observation,
    prior: PriorManifold | DegenerateEllipsoid,
    bases: SuitableBases,
) -> np.ndarray:
    """Slice center for ``obs`` under a single-ellipsoid prior."""
    factor = _single_factor(prior)
    if bases.v_subspace is not factor.subspace and not np.array_equal(
        bases.v_subspace.basis, factor.subspace.basis
    ):
        raise ContractViolation("bases were not computed from the prior subspace")
    a_star = bases.w_star_coefficients(obs.values)
    q = bases.q
    est = bases.v_star[:, :q] @ (a_star[:q] / bases.sigma[:q])
    if bases.m > q:
        est = est + bases.w_star[:, q:] @ a_star[q:]
    return est


def estimate_manifold(
    manifold_samples: SnapshotSet,
    w_subspace: Subspace,
    prior: PriorManifold | DegenerateEllipsoid,
    bases: SuitableBases | None = None,
) -> SnapshotSet:
    """Point estimates of every manifold sample (the estimate manifold)."""
    factor = _single_factor(prior)
    if bases is None:
        bases = compute_suitable_bases(factor.subspace, w_subspace)
    obs_matrix = observe_cloud(manifold_samples, w_subspace)      # (count, m)
    a_star = obs_matrix @ bases.w_rotation                        # rows <w*_j, h_i>
    q = bases.q
    estimates = (a_star[:, :q] / bases.sigma[:q]) @ bases.v_star[:, :q].T
    if bases.m > q:
        estimates = estimates + a_star[:, q:] @ bases.w_star[:, q:].T
    return SnapshotSet(estimates)


def reduce_from_estimates(estimates: SnapshotSet, stop: StoppingRule) -> GreedyResult:
    """Greedy reduction of the estimate manifold."""
    return greedy(estimates, stop)
