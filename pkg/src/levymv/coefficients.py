"""The interaction coefficient sigma(x, measure).

Three families:

* ``Constant`` -- measure-independent control case,
* ``LinearInteraction`` -- averaged pair kernel
  sigma(x, mu) = (1/n) sum_i kernel(x, x_i), the classical linear
  (McKean-Vlasov) structure; built-in kernels are bounded with bounded
  first and second x-derivatives,
* ``SmoothedDensityPower`` -- (g_eps * mu (x))^s, a strictly positive
  nonlocal coefficient built from Gaussian smoothing of the measure.

Each family evaluates against empirical measures and against periodic
grid densities (duck-typed: any object with .values, .nodes, .dx,
.half_width, .m).
"""

import math
from dataclasses import dataclass

import numpy as np

from .measures import EmpiricalMeasure, smoothed_density, wasserstein2

__all__ = [
    "Constant",
    "LinearInteraction",
    "SmoothedDensityPower",
    "SineKernel",
    "CauchyKernel",
    "evaluate",
    "evaluate_on_density",
    "lipschitz_probe",
    "LipschitzEstimate",
    "sigma_on_grid_values",
]


class Constant:
    """sigma = value everywhere.

    A vanishing coefficient freezes the dynamics and breaks the
    nondegeneracy the density results rely on, so value = 0 is rejected
    unless explicitly allowed for degenerate control experiments.
    """

    def __init__(self, value, check_nonzero=True):
        if check_nonzero and value == 0.0:
            raise ValueError("constant coefficient must be nonzero "
                             "(pass check_nonzero=False for degenerate controls)")
        self.value = float(value)
        self.k1_bound = 0.0
        self.k2_bound = 0.0

    def evaluate(self, x, mu):
        return np.broadcast_to(self.value, np.shape(x)).copy() if np.ndim(x) else self.value

    def _on_grid(self, values, nodes, dx, half_width):
        return np.full(values.size, self.value)

    def config_dict(self):
        return {"kind": "constant", "value": self.value}


class SineKernel:
    """kernel(x, y) = c0 + c1 * sin(x - y); bounded, smooth, separable."""

    def __init__(self, c0=1.0, c1=0.5):
        self.c0 = float(c0)
        self.c1 = float(c1)

    def __call__(self, x, y):
        return self.c0 + self.c1 * np.sin(x - y)

    def mean_against(self, x, samples):
        # sin(x - y) = sin x cos y - cos x sin y: one pass over samples
        mc = float(np.mean(np.cos(samples)))
        ms = float(np.mean(np.sin(samples)))
        return self.c0 + self.c1 * (np.sin(x) * mc - np.cos(x) * ms)

    def summary_stats(self, samples):
        """Per-measure reduction reused across many query points."""
        return (float(np.mean(np.cos(samples))), float(np.mean(np.sin(samples))))

    def mean_from_stats(self, x, stats):
        mc, ms = stats
        return self.c0 + self.c1 * (np.sin(x) * mc - np.cos(x) * ms)

    def config_dict(self):
        return {"kind": "sine", "c0": self.c0, "c1": self.c1}


class CauchyKernel:
    """kernel(x, y) = c0 + c1 / (1 + (x - y)^2); bounded with bounded derivatives."""

    def __init__(self, c0=1.0, c1=0.5):
        self.c0 = float(c0)
        self.c1 = float(c1)

    def __call__(self, x, y):
        d = x - y
        return self.c0 + self.c1 / (1.0 + d * d)

    def config_dict(self):
        return {"kind": "cauchy", "c0": self.c0, "c1": self.c1}


class LinearInteraction:
    """sigma(x, mu) = mean of kernel(x, y) over the samples of mu.

    The kernel must be bounded with bounded first and second
    x-derivatives; construction probes those bounds by finite
    differences on an expanding grid and rejects kernels whose probes
    keep growing with the window.
    """

    def __init__(self, kernel, probe_halfwidths=(10.0, 30.0), probe_points=201):
        self.kernel = kernel
        sups = []
        for hw in probe_halfwidths:
            xs = np.linspace(-hw, hw, probe_points)
            xx, yy = np.meshgrid(xs, xs, indexing="ij")
            h = 1e-4 * max(1.0, hw / 10.0)
            v = kernel(xx, yy)
            vp = kernel(xx + h, yy)
            vm = kernel(xx - h, yy)
            d1 = (vp - vm) / (2.0 * h)
            d2 = (vp - 2.0 * v + vm) / (h * h)
            sups.append((float(np.max(np.abs(v))),
                         float(np.max(np.abs(d1))),
                         float(np.max(np.abs(d2)))))
        for small, big in zip(sups[0], sups[-1]):
            if big > 1.5 * small + 1e-9:
                raise ValueError("kernel bound probe grows with the window; "
                                 "interaction kernels must be bounded with "
                                 "bounded x-derivatives")
        self.sup_bound, self.k1_bound, self.k2_bound = sups[-1]

    def evaluate(self, x, mu):
        samples = mu.samples if isinstance(mu, EmpiricalMeasure) else np.asarray(mu)
        if hasattr(self.kernel, "mean_against"):
            return self.kernel.mean_against(x, samples)
        xq = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(xq.shape)
        step = max(1, (1 << 22) // max(1, xq.size))
        for lo in range(0, samples.size, step):
            chunk = samples[lo:lo + step]
            out += self.kernel(xq[:, None], chunk[None, :]).sum(axis=1)
        out /= samples.size
        if np.ndim(x) == 0:
            return float(out[0])
        return out

    def _on_grid(self, values, nodes, dx, half_width):
        if isinstance(self.kernel, SineKernel):
            # separable path: one weighted reduction instead of an m x m matrix
            w = values * dx
            mc = float(np.sum(w * np.cos(nodes)))
            ms = float(np.sum(w * np.sin(nodes)))
            return self.kernel.c0 + self.kernel.c1 * (np.sin(nodes) * mc - np.cos(nodes) * ms)
        mat = self.kernel(nodes[:, None], nodes[None, :])
        return mat @ (values * dx)

    def config_dict(self):
        return {"kind": "linear", "kernel": self.kernel.config_dict()
                if hasattr(self.kernel, "config_dict") else "custom"}


class SmoothedDensityPower:
    """sigma(x, mu) = (g_eps * mu (x))^s, strictly positive by construction."""

    def __init__(self, eps, s):
        if not eps > 0.0:
            raise ValueError("eps must be positive")
        if not s > 0.0:
            raise ValueError("s must be positive")
        self.eps = float(eps)
        self.s = float(s)

    def evaluate(self, x, mu):
        base = smoothed_density(mu, self.eps, x)
        return base ** self.s

    def _on_grid(self, values, nodes, dx, half_width):
        if self.eps < 4.0 * dx ** 2:
            raise ValueError(f"grid too coarse for eps={self.eps}: "
                             f"need eps >= 4 dx^2 = {4.0 * dx ** 2:.3g}")
        conv = _periodic_gaussian_convolution(values, dx, half_width, self.eps)
        # integrator stage vectors may dip slightly negative; never feed a
        # negative base to a fractional power
        return np.maximum(conv, 0.0) ** self.s

    def config_dict(self):
        return {"kind": "smoothed_power", "eps": self.eps, "s": self.s}


def _periodic_gaussian_convolution(values, dx, half_width, eps):
    """g_eps * p on the periodic grid, computed spectrally."""
    m = values.size
    offsets = np.arange(m) * dx
    dist = np.minimum(offsets, 2.0 * half_width - offsets)
    kern = np.exp(-dist * dist / (2.0 * eps)) / math.sqrt(2.0 * math.pi * eps)
    return np.fft.irfft(np.fft.rfft(values) * np.fft.rfft(kern), n=m) * dx


def evaluate(spec, x, mu):
    """sigma(x, mu) for any coefficient family."""
    return spec.evaluate(x, mu)


def evaluate_on_density(spec, grid):
    """sigma(x_j, p dx) on every grid node, density treated as the measure."""
    p = grid.values
    if np.any(p < -1e-8 * max(p.max(), 1e-300)):
        raise ValueError("grid density must be nonnegative")
    if abs(float(np.sum(p)) * grid.dx - 1.0) > 1e-6:
        raise ValueError("grid density must carry unit mass")
    return spec._on_grid(p, grid.nodes, grid.dx, grid.half_width)


def sigma_on_grid_values(spec, values, grid):
    """Like :func:`evaluate_on_density` but without the probability-density
    prechecks, for integrator stages that pass raw vectors."""
    return spec._on_grid(np.asarray(values, dtype=float), grid.nodes,
                         grid.dx, grid.half_width)


@dataclass(frozen=True)
class LipschitzEstimate:
    """Max observed difference ratios; lower bounds on the true constants."""

    in_state: float
    in_measure: float


def lipschitz_probe(spec, trials, rng, measure_size=64):
    """Ratio-maximization estimate of the Lipschitz constants of sigma.

    Random point pairs probe the x-direction; random Gaussian sample
    clouds (equal size, so the transport distance is exact) probe the
    measure direction.  Both are sup-estimates from below.
    """
    best_x = 0.0
    best_m = 0.0
    for _ in range(trials):
        mu = EmpiricalMeasure(rng.normal(rng.normal(0, 1), 0.5 + rng.random(),
                                         measure_size))
        nu = EmpiricalMeasure(rng.normal(rng.normal(0, 1), 0.5 + rng.random(),
                                         measure_size))
        x0, x1 = rng.normal(0.0, 2.0, 2)
        if x0 != x1:
            num = abs(evaluate(spec, x1, mu) - evaluate(spec, x0, mu))
            best_x = max(best_x, num / abs(x1 - x0))
        d = wasserstein2(mu, nu)
        if d > 1e-12:
            num = abs(evaluate(spec, x0, mu) - evaluate(spec, x0, nu))
            best_m = max(best_m, num / d)
    return LipschitzEstimate(in_state=best_x, in_measure=best_m)
