"""Latent weights with respect to singleton and product-form model classes.

For a reference class ``Q`` of distributions, the latent weight of ``P``
is ``sup_{Q in class} min_x P(x)/Q(x)`` with any division by zero read as
+infinity.  A singleton class has the closed-form answer (one min).  For
the i.i.d. class (a common marginal on the alphabet, taken to the d-th
power) and the product class (independent, possibly different marginals)
the supremum is found numerically: a coarse grid over the marginal
parameters seeds a handful of derivative-free compass-search refinements,
and the winner is certified by checking ``P >= lam*Q`` pointwise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionTooLargeError
from .space import Distribution


def singleton_weight(p: Distribution, q0: Distribution):
    """Largest ``lam`` with ``p >= lam * q0`` pointwise.

    Equals ``min_x p(x)/q0(x)`` over the support of ``q0`` (ratios with
    ``q0(x) = 0``, including 0/0, count as +infinity and never attain the
    minimum).  The result never exceeds 1 mathematically; the raw ratio is
    returned, exact when both inputs are exact.
    """
    if p.space != q0.space:
        raise ValueError("p and q0 must share a sample space")
    if p.is_exact and q0.is_exact:
        ratios = [pv / qv for pv, qv in zip(p.p, q0.p) if qv > 0]
        return min(ratios)
    pf, qf = p.as_float().p, q0.as_float().p
    mask = qf > 0
    return float(np.min(pf[mask] / qf[mask]))


@dataclass(frozen=True)
class ProductClassSpec:
    """Which reference class to optimize over.

    kind
        ``"singleton"`` (fixed ``q0``), ``"iid"`` (common marginal to the
        d-th power) or ``"product"`` (independent per-coordinate
        marginals).
    """

    kind: str
    q0: Distribution | None = None

    def __post_init__(self):
        if self.kind not in ("singleton", "iid", "product"):
            raise ValueError(f"unknown class kind {self.kind!r}")
        if self.kind == "singleton" and self.q0 is None:
            raise ValueError("singleton class requires q0")
        if self.kind != "singleton" and self.q0 is not None:
            raise ValueError("q0 only applies to the singleton class")


@dataclass(frozen=True)
class OptimizerOptions:
    grid_points: int = 33          # grid resolution per parameter
    n_starts: int = 8              # refinements launched from best grid points
    tol: float = 1e-4              # target accuracy of the weight value
    step_floor: float = 1e-7       # compass search terminates below this step
    max_dim: int = 16              # refuse problems with more parameters
    max_grid_total: int = 60000    # cap on total grid evaluations
    max_evals_per_start: int = 20000


@dataclass(frozen=True)
class SupMinResult:
    """Outcome of a sup-min optimization over a product-form class."""

    lam: float
    argmax_q: Distribution
    certificate_margin: float      # min_x (p(x) - lam*q(x)); >= -1e-9
    multistart_log: tuple          # ((start params, refined value), ...)
    converged: bool = True


def class_weight(p: Distribution, spec: ProductClassSpec,
                 opts: OptimizerOptions | None = None) -> SupMinResult:
    """Latent weight of ``p`` w.r.t. the class described by ``spec``.

    Raises
    ------
    DimensionTooLargeError
        If the free parameter count (``k-1`` for iid, ``d*(k-1)`` for
        product) exceeds ``opts.max_dim``.
    """
    opts = opts or OptimizerOptions()
    if spec.kind == "singleton":
        lam = float(singleton_weight(p.as_float(), spec.q0.as_float()))
        qf = spec.q0.as_float()
        margin = float(np.min(p.as_float().p - lam * qf.p))
        return SupMinResult(lam=lam, argmax_q=qf, certificate_margin=margin,
                            multistart_log=((None, lam),))

    space = p.space
    k, d = space.k, space.d
    dim = (k - 1) if spec.kind == "iid" else d * (k - 1)
    if dim > opts.max_dim:
        raise DimensionTooLargeError(
            f"{spec.kind} class over k={k}, d={d} has {dim} parameters "
            f"(limit {opts.max_dim})")

    pf = p.as_float().p
    mat = space.outcome_matrix().astype(np.int64)
    objective = _Objective(pf, mat, k, d, spec.kind)

    starts = _grid_starts(objective, dim, opts)
    log = []
    converged = True
    for theta0, _ in starts:
        theta, value, ok = _compass_search(objective, theta0, opts)
        converged = converged and ok
        log.append((tuple(float(t) for t in theta0), float(value),
                    tuple(float(t) for t in theta)))
    # Deterministic winner: best value, ties broken by lexicographically
    # smallest refined parameter vector.
    log.sort(key=lambda rec: (-rec[1], rec[2]))
    best_theta = np.array(log[0][2])
    best_val = log[0][1]
    q_vec = objective.q_of(best_theta)
    q = Distribution(space, q_vec / q_vec.sum())
    margin = float(np.min(pf - best_val * q.p))
    return SupMinResult(
        lam=float(best_val),
        argmax_q=q,
        certificate_margin=margin,
        multistart_log=tuple((start, val) for start, val, _ in log),
        converged=converged,
    )


class _Objective:
    """g(theta) = min_x p(x)/Q_theta(x), stick-breaking parameterization.

    Each marginal over the alphabet is parameterized by ``k-1`` numbers in
    [0,1]: mu_0 = t_1, mu_1 = t_2*(1-t_1), ..., with the last symbol
    taking the remainder.  The cube [0,1]^(k-1) maps onto the whole
    simplex including its boundary, so point masses are reachable.
    """

    def __init__(self, p, mat, k, d, kind):
        self.p = p
        self.mat = mat
        self.k = k
        self.d = d
        self.kind = kind
        self.rows = np.arange(d)

    def marginals(self, theta: np.ndarray) -> np.ndarray:
        k, d = self.k, self.d
        if self.kind == "iid":
            mu = _stick_break(theta, k)
            return np.tile(mu, (d, 1))
        return np.stack([
            _stick_break(theta[j * (k - 1):(j + 1) * (k - 1)], k)
            for j in range(d)
        ])

    def q_of(self, theta: np.ndarray) -> np.ndarray:
        margs = self.marginals(theta)
        return np.prod(margs[self.rows[None, :], self.mat], axis=1)

    def __call__(self, theta: np.ndarray) -> float:
        q = self.q_of(theta)
        pos = q > 0.0
        if not np.any(pos):
            return 0.0
        return float(np.min(self.p[pos] / q[pos]))


def _stick_break(theta: np.ndarray, k: int) -> np.ndarray:
    mu = np.empty(k)
    rem = 1.0
    for j in range(k - 1):
        mu[j] = theta[j] * rem
        rem -= mu[j]
    mu[k - 1] = max(rem, 0.0)
    return mu


def _grid_starts(objective, dim, opts):
    """Evaluate a deterministic grid and keep the best starting points."""
    per_param = opts.grid_points
    # Shrink the per-parameter resolution until the full grid fits the
    # evaluation budget (high-dimensional products explode otherwise).
    while per_param > 2 and per_param**dim > opts.max_grid_total:
        per_param -= 1
    axis = np.linspace(0.0, 1.0, per_param)
    scored = []
    for combo in itertools.product(axis, repeat=dim):
        theta = np.array(combo)
        scored.append((theta, objective(theta)))
    scored.sort(key=lambda rec: (-rec[1], tuple(rec[0])))
    return scored[: opts.n_starts]


def _poll_directions(dim: int) -> list[np.ndarray]:
    dirs = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        dirs.append(e.copy())
        dirs.append(-e)
    # Diagonal polls help at kinks where several ratio surfaces tie; only
    # affordable in low dimension.
    if 2 <= dim <= 6:
        for i, j in itertools.combinations(range(dim), 2):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    v = np.zeros(dim)
                    v[i], v[j] = si, sj
                    dirs.append(v)
    return dirs


def _compass_search(objective, theta0, opts):
    """Maximize over the unit cube by coordinate/diagonal polling with an
    expanding-on-success, halving-on-failure step."""
    dim = len(theta0)
    dirs = _poll_directions(dim)
    theta = np.clip(np.asarray(theta0, dtype=np.float64), 0.0, 1.0)
    best = objective(theta)
    step = 1.0 / (opts.grid_points - 1) if opts.grid_points > 1 else 0.1
    evals = 0
    while step >= opts.step_floor:
        if evals >= opts.max_evals_per_start:
            return theta, best, False
        moved = False
        for dvec in dirs:
            cand = np.clip(theta + step * dvec, 0.0, 1.0)
            val = objective(cand)
            evals += 1
            if val > best + 1e-15:
                theta, best = cand, val
                moved = True
                break
        if moved:
            step = min(step * 2.0, 0.25)
        else:
            step *= 0.5
    return theta, best, True
