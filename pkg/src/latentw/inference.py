"""Estimation of exchangeable weights from multinomial samples.

The plug-in estimator is the exchangeable weight of the empirical
measure.  Being a sum of per-orbit minima it is concave in the cell
probabilities, hence negatively biased in finite samples (Jensen), and we
correct the bias with full-size multinomial bootstrap resampling:

    corrected = clamp(2*lam_hat - mean(lam_hat*), 0, 1)

where ``lam_hat*`` are the weights of resampled empirical measures.  The
module also provides the Gaussian limit of ``sqrt(n)(lam_hat - lam)``:
when every orbit minimum is uniquely achieved ("unique argmin", the
regular case) the limit is normal with a closed-form variance; with ties
the limit is a weighted sum of minima of correlated Gaussians, which we
sample by Monte Carlo instead of evaluating in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptySampleError, TiedArgminError
from .exchangeable import argmin_sets, class_minima, exchangeable_weight_rows
from .space import CountVector, Distribution, SampleSpace

UNIQUE_ARGMIN = "unique_argmin"
TIED_ARGMIN = "tied_argmin"

#: Eigenvalues of the limit covariance below this are a hard error.
EIGEN_FLOOR = -1e-12


def _as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


@dataclass(frozen=True)
class WeightEstimate:
    """Plug-in and bias-corrected exchangeable-weight estimates."""

    lambda_hat: float          # weight of the empirical measure
    lambda_corrected: float    # 2*lambda_hat - mean(replicates), clamped to [0,1]
    se_boot: float             # sample sd of the bootstrap replicates
    bias_boot: float           # mean(replicates) - lambda_hat
    n: int
    n_boot: int
    resample_size: int
    seed: int | None
    regularity_flag: str       # UNIQUE_ARGMIN or TIED_ARGMIN


def _resample_weights(c: CountVector, n_boot: int, resample_size: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Exchangeable weights of ``n_boot`` multinomial resamples."""
    pvals = c.counts / c.n
    draws = rng.multinomial(resample_size, pvals, size=n_boot)
    return exchangeable_weight_rows(c.space, draws / resample_size)


def empirical_regularity(c: CountVector) -> str:
    """Tie diagnosis for the empirical measure.

    Empirical ties are exact count ties, so the tolerance is half a count
    (1/(2n) on probabilities): any orbit whose minimum is achieved by two
    or more cells within that slack is flagged.  Orbits whose minimum is
    zero are skipped; zero cells are inert under resampling and cannot
    perturb the bootstrap regime.
    """
    n = c.n
    if n == 0:
        raise EmptySampleError("empty sample")
    index = c.space.orbit_index()
    p = c.counts / n
    mins = index.class_minima(p)
    tol = 0.5 / n
    for z in range(index.n_classes):
        members = index.members(z)
        if len(members) == 1 or mins[z] == 0.0:
            continue
        hits = np.count_nonzero(p[members] <= mins[z] + tol)
        if hits > 1:
            return TIED_ARGMIN
    return UNIQUE_ARGMIN


def estimate(c: CountVector, n_boot: int = 1000,
             resample_size: int | None = None, seed=0) -> WeightEstimate:
    """Estimate the exchangeable weight of the source behind ``c``.

    Parameters
    ----------
    c : CountVector
        Observed outcome counts (total ``n >= 1``).
    n_boot : int
        Number of bootstrap resamples (>= 2).
    resample_size : int, optional
        Resample size ``n0``; defaults to ``n`` (the full bootstrap).
        ``ceil(2*sqrt(n))`` gives the subsample variant, consistent even
        in the tied-argmin regime.
    seed : int or numpy SeedSequence
        All randomness flows from here; fixed seed gives a bit-identical
        result.
    """
    n = c.n
    if n == 0:
        raise EmptySampleError("cannot estimate from an empty sample")
    if n_boot < 2:
        raise ValueError("n_boot must be >= 2")
    n0 = n if resample_size is None else int(resample_size)
    if n0 < 1:
        raise ValueError("resample_size must be >= 1")

    lam_hat = float(exchangeable_weight_rows(c.space,
                                             (c.counts / n)[None, :])[0])
    rng = np.random.default_rng(_as_seed_sequence(seed))
    reps = _resample_weights(c, n_boot, n0, rng)
    mean_rep = float(reps.mean())
    corrected = float(np.clip(2.0 * lam_hat - mean_rep, 0.0, 1.0))
    se = float(reps.std(ddof=1))
    return WeightEstimate(
        lambda_hat=lam_hat,
        lambda_corrected=corrected,
        se_boot=se,
        bias_boot=mean_rep - lam_hat,
        n=n,
        n_boot=n_boot,
        resample_size=n0,
        seed=seed if isinstance(seed, int) else None,
        regularity_flag=empirical_regularity(c),
    )


def bootstrap_distribution(c: CountVector, n_boot: int = 1000,
                           resample_size: int | None = None,
                           seed=0) -> np.ndarray:
    """Replicates of ``sqrt(n0) * (lam_hat_resample - lam_hat)``.

    With ``resample_size = n`` (default) this is the full bootstrap
    distribution estimator; with ``n0 = o(n)`` the subsample variant.
    """
    n = c.n
    if n == 0:
        raise EmptySampleError("cannot resample an empty sample")
    n0 = n if resample_size is None else int(resample_size)
    lam_hat = float(exchangeable_weight_rows(c.space,
                                             (c.counts / n)[None, :])[0])
    rng = np.random.default_rng(_as_seed_sequence(seed))
    reps = _resample_weights(c, n_boot, n0, rng)
    return np.sqrt(n0) * (reps - lam_hat)


def subsample_size(n: int) -> int:
    """The suggested ``ceil(2*sqrt(n))`` subsample bootstrap size."""
    return int(np.ceil(2.0 * np.sqrt(n)))


# ---------------------------------------------------------------------------
# Limiting law of sqrt(n) * (lam_hat - lam).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitLawSpec:
    """Ingredients of the limiting law for a fixed source ``p``.

    The retained coordinates are the union of the per-orbit argmin sets;
    on them the multinomial CLT covariance is ``diag(m) - m m^T`` with
    ``m`` the per-coordinate orbit minima, and the limit variable is
    ``sum_z |z| * min over the argmin set of z``.
    """

    space: SampleSpace
    class_sizes: np.ndarray            # |z| per orbit
    minima: np.ndarray                 # m_z per orbit
    argmin_sets: tuple[tuple[int, ...], ...]
    coords: np.ndarray                 # retained outcome indices
    covariance: np.ndarray             # (len(coords), len(coords))

    @property
    def is_unique_argmin(self) -> bool:
        """True when no orbit that matters has a tied minimum.

        Ties at minimum 0 are ignored: those coordinates have variance
        ``m(1-m) = 0``, so their minima are deterministic and the
        Gaussian regime survives.
        """
        return all(len(s) == 1 or self.minima[z] == 0.0
                   for z, s in enumerate(self.argmin_sets))


def limit_law_spec(p: Distribution) -> LimitLawSpec:
    """Build the limit-law description (covariance and argmin blocks)."""
    pf = p.as_float()
    index = pf.space.orbit_index()
    mins = np.asarray(class_minima(pf), dtype=np.float64)
    sets = argmin_sets(pf)
    coords = np.array([x for s in sets for x in s], dtype=np.int64)
    m_coord = np.array([mins[z] for z, s in enumerate(sets) for _ in s])
    cov = -np.outer(m_coord, m_coord)
    np.fill_diagonal(cov, m_coord * (1.0 - m_coord))
    return LimitLawSpec(
        space=pf.space,
        class_sizes=index.sizes,
        minima=mins,
        argmin_sets=sets,
        coords=coords,
        covariance=cov,
    )


def asymptotic_variance(p: Distribution) -> float:
    """Closed-form variance of the Gaussian limit, unique-argmin case.

        V = sum_z |z|^2 m_z (1-m_z) - sum_{z1 != z2} |z1||z2| m_z1 m_z2

    (the second sum runs over ordered pairs of distinct orbits).

    Raises
    ------
    TiedArgminError
        If some orbit minimum is tied, where the limit is non-Gaussian;
        use :func:`limit_law_sample` instead.
    """
    spec = limit_law_spec(p)
    if not spec.is_unique_argmin:
        tied = [z for z, s in enumerate(spec.argmin_sets)
                if len(s) > 1 and spec.minima[z] > 0.0]
        raise TiedArgminError(
            f"orbits {tied} have tied minima; the Gaussian formula does "
            "not apply")
    sizes = spec.class_sizes.astype(np.float64)
    m = spec.minima
    diag_term = float(np.sum(sizes**2 * m * (1.0 - m)))
    weighted = sizes * m
    cross = float(np.sum(weighted)**2 - np.sum(weighted**2))
    return diag_term - cross


def limit_law_sample(p: Distribution, n_draws: int, seed=0) -> np.ndarray:
    """Monte Carlo draws from the limiting law of ``sqrt(n)(lam_hat - lam)``.

    Draws a zero-mean Gaussian vector on the retained argmin coordinates
    (multinomial CLT covariance, sampled through its eigendecomposition
    with negative eigenvalues above ``-1e-12`` clipped to zero) and
    returns ``sum_z |z| * min`` over each orbit's argmin block.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be >= 1")
    spec = limit_law_spec(p)
    m = len(spec.coords)
    vals, vecs = np.linalg.eigh(spec.covariance)
    if np.any(vals < EIGEN_FLOOR):
        raise RuntimeError(f"covariance has eigenvalue {vals.min()} < {EIGEN_FLOOR}")
    vals = np.clip(vals, 0.0, None)
    transform = vecs * np.sqrt(vals)
    rng = np.random.default_rng(_as_seed_sequence(seed))
    z = rng.standard_normal(size=(n_draws, m)) @ transform.T

    out = np.zeros(n_draws)
    offset = 0
    for z_id, s in enumerate(spec.argmin_sets):
        block = z[:, offset:offset + len(s)]
        out += spec.class_sizes[z_id] * block.min(axis=1)
        offset += len(s)
    return out


# ---------------------------------------------------------------------------
# Sample-size selection against the worst-case test source.
# ---------------------------------------------------------------------------

def worst_case_source(space: SampleSpace) -> Distribution:
    """Uniform mass on all non-constant outcomes.

    Constant outcomes sit in singleton orbits, so observing them can only
    push the estimate up; this source (which is exchangeable, weight 1)
    empirically maximizes bias and sd of the plug-in estimator.
    """
    n = space.n_outcomes
    p = np.full(n, 1.0 / (n - space.k))
    for a in range(space.k):
        p[space.encode((a,) * space.d)] = 0.0
    return Distribution(space, p)


@dataclass(frozen=True)
class BiasTableRow:
    n: int
    mean_bias: float     # mean(lam_hat) - 1
    sd: float            # sd of lam_hat across repetitions


def sample_size_heuristic(space: SampleSpace, candidate_sizes: Sequence[int],
                          reps: int, seed=0) -> list[BiasTableRow]:
    """Simulate plug-in estimation from the worst-case source.

    For each candidate sample size, draws ``reps`` datasets from
    :func:`worst_case_source` (true weight 1) and tabulates the mean bias
    and standard deviation of the plug-in estimate, for choosing a sample
    size at which both look acceptable.
    """
    if reps < 2:
        raise ValueError("reps must be >= 2")
    sizes = [int(s) for s in candidate_sizes]
    if any(s < 1 for s in sizes):
        raise ValueError("candidate sizes must be >= 1")
    t = worst_case_source(space)
    root = _as_seed_sequence(seed)
    children = root.spawn(len(sizes))
    rows = []
    for n, child in zip(sizes, children):
        rng = np.random.default_rng(child)
        draws = rng.multinomial(n, t.p, size=reps)
        lams = exchangeable_weight_rows(space, draws / n)
        rows.append(BiasTableRow(n=n, mean_bias=float(lams.mean() - 1.0),
                                 sd=float(lams.std(ddof=1))))
    return rows
