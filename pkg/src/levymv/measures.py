"""Empirical probability measures on the line and transport distances.

In one dimension the quadratic-cost optimal coupling between two
equal-size empirical measures is the monotone (sorted) pairing, so the
Wasserstein-2 distance is exact and cheap.  For the bounded cost
|x-y|^2 ^ 1 the sorted pairing is no longer provably optimal (the cost
is not convex), so that quantity is shipped as an upper bound; tests
compare it against a brute-force assignment for small n.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EmpiricalMeasure",
    "MetricReport",
    "wasserstein2",
    "truncated_wasserstein2_upper",
    "metric_report",
    "check_empirical_distance_bound",
    "smoothed_density",
    "second_moment",
    "empirical_gap_experiment",
    "GapEstimate",
]


class EmpiricalMeasure:
    """Uniformly weighted sample measure; samples are kept sorted."""

    __slots__ = ("samples",)

    def __init__(self, samples):
        arr = np.asarray(samples, dtype=float).ravel()
        if arr.size == 0:
            raise ValueError("empirical measure needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        self.samples = np.sort(arr)

    def __len__(self):
        return self.samples.size

    def __repr__(self):
        return f"EmpiricalMeasure(n={len(self)})"

    def to_csv(self, path):
        """Single-column CSV dump."""
        np.savetxt(path, self.samples, fmt="%.17g")

    @classmethod
    def from_csv(cls, path):
        return cls(np.loadtxt(path, ndmin=1))


def wasserstein2(mu, nu):
    """Wasserstein-2 distance between equal-size empirical measures.

    sqrt((1/n) sum (x_(i) - y_(i))^2) over sorted samples; the monotone
    coupling is optimal for quadratic cost in one dimension.  Unequal
    sizes are rejected.
    """
    if len(mu) != len(nu):
        raise ValueError(f"sample counts differ: {len(mu)} vs {len(nu)}")
    d = mu.samples - nu.samples
    return math.sqrt(float(np.mean(d * d)))


def truncated_wasserstein2_upper(mu, nu):
    """Upper bound on transport with cost |x-y|^2 ^ 1, in [0, 1].

    Uses the monotone coupling, which is feasible but not provably
    optimal for the truncated (non-convex) cost.
    """
    if len(mu) != len(nu):
        raise ValueError(f"sample counts differ: {len(mu)} vs {len(nu)}")
    d = mu.samples - nu.samples
    return math.sqrt(float(np.mean(np.minimum(d * d, 1.0))))


@dataclass(frozen=True)
class MetricReport:
    """Both transport quantities for one pair of measures."""

    d2: float
    d1_upper: float


def metric_report(mu, nu):
    rep = MetricReport(d2=wasserstein2(mu, nu),
                       d1_upper=truncated_wasserstein2_upper(mu, nu))
    assert rep.d1_upper <= min(rep.d2, 1.0) + 1e-12
    return rep


def check_empirical_distance_bound(xs, ys, tol=1e-12):
    """d(emp(xs), emp(ys)) <= |xs - ys| / sqrt(n) + tol.

    The right side is the cost of the identity pairing, always feasible,
    so the optimal coupling can only do better.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape:
        raise ValueError("configurations must have equal length")
    n = xs.size
    lhs = wasserstein2(EmpiricalMeasure(xs), EmpiricalMeasure(ys))
    rhs = float(np.linalg.norm(xs - ys)) / math.sqrt(n)
    return lhs <= rhs + tol


def gaussian_kernel(u, eps):
    """exp(-u^2 / 2 eps) / sqrt(2 pi eps)."""
    return np.exp(-u * u / (2.0 * eps)) / math.sqrt(2.0 * math.pi * eps)


def smoothed_density(mu, eps, x, block=1 << 22):
    """Gaussian smoothing of the measure: (1/n) sum_i g_eps(x - x_i).

    Strictly positive and smooth in x.  Accepts scalar or array x;
    the pairwise sum is blocked to bound memory.
    """
    if not eps > 0.0:
        raise ValueError("smoothing width eps must be positive")
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    s = mu.samples
    out = np.zeros(xq.shape)
    step = max(1, block // max(1, xq.size))
    for lo in range(0, s.size, step):
        chunk = s[lo:lo + step]
        out += gaussian_kernel(xq[:, None] - chunk[None, :], eps).sum(axis=1)
    out /= s.size
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out[0])
    return out


def second_moment(mu):
    """Mean of squared samples."""
    return float(np.mean(mu.samples ** 2))


def _w2sq_sorted_unequal(x, y):
    """Exact squared W2 between sorted uniform-weight samples of sizes n, m.

    Integrates the squared gap of the two piecewise-constant quantile
    functions over (0, 1) using the merged breakpoints; reduces to the
    block formula when one size divides the other.
    """
    n, m = x.size, y.size
    if n == m:
        d = x - y
        return float(np.mean(d * d))
    if m % n == 0:
        d = y.reshape(n, m // n) - x[:, None]
        return float(np.mean(d * d))
    if n % m == 0:
        d = x.reshape(m, n // m) - y[:, None]
        return float(np.mean(d * d))
    breaks = np.union1d(np.arange(1, n) / n, np.arange(1, m) / m)
    edges = np.concatenate([[0.0], breaks, [1.0]])
    lengths = np.diff(edges)
    mids = 0.5 * (edges[:-1] + edges[1:])
    xi = x[np.minimum((mids * n).astype(int), n - 1)]
    yi = y[np.minimum((mids * m).astype(int), m - 1)]
    return float(np.sum(lengths * (xi - yi) ** 2))


@dataclass(frozen=True)
class GapEstimate:
    """Monte-Carlo estimate of E d^2(nu^n, nu) with its standard error."""

    n: int
    reps: int
    mean_sq_distance: float
    stderr: float


def empirical_gap_experiment(law_sampler, n, reps, rng, n_ref=10 ** 6):
    """Estimate E d^2(nu^n, nu) against a large-sample stand-in for nu.

    ``law_sampler(rng, size)`` draws i.i.d. samples.  The reference law
    is represented by one i.i.d. sample of size ``n_ref`` (frozen across
    repetitions), which biases the estimate at the O(n_ref^-1/2) scale.
    """
    ref = np.sort(law_sampler(rng, n_ref))
    vals = np.empty(reps)
    for r in range(reps):
        xs = np.sort(law_sampler(rng, n))
        vals[r] = _w2sq_sorted_unequal(xs, ref)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.inf
    return GapEstimate(n=n, reps=reps, mean_sq_distance=mean, stderr=stderr)
