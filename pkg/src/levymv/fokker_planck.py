"""Fourier-spectral solver for the nonlinear fractional Fokker-Planck
equation  d/dt p = Dalpha(|sigma(., p)|^alpha p)  on a periodic grid.

``Dalpha`` is the fractional Laplacian realized as the Fourier
multiplier -diffusivity * |xi_k|^alpha, xi_k = pi k / L.  The sign is
fixed negative semi-definite, matching the singular-integral form that
is negative on peaks; the equivalent singular-integral constant is
``diffusivity / C(alpha)`` with C from drivers.cf_constant_from_levy_constant.

The zero mode is multiplied by exactly zero, so total mass is invariant
under every scheme here; any observed drift signals a bug and aborts.
Positivity is monitored, never enforced by clipping.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from . import coefficients
from .drivers import cf_constant_from_levy_constant

__all__ = [
    "DensityGrid",
    "FractionalParams",
    "FpResult",
    "StabilityError",
    "fractional_laplacian",
    "solve_linear_exact",
    "step_fp",
    "solve_fp",
    "stable_step_limit",
    "adjoint_identity_check",
    "AdjointReport",
    "bump",
    "gaussian_grid",
    "stable_heat_kernel_grid",
]

RK4_REAL_AXIS = 2.7853  # |R(z)| <= 1 on the negative real axis down to -2.7853


class StabilityError(RuntimeError):
    pass


class DensityGrid:
    """Probability density on the uniform periodic grid [-L, L).

    Mass is renormalized to one at construction (and only there);
    evolved densities are handed back with ``renormalize=False`` so a
    mass defect can never be papered over silently.
    """

    def __init__(self, half_width, values, renormalize=True):
        values = np.asarray(values, dtype=float).copy()
        m = values.size
        if m < 4 or (m & (m - 1)) != 0:
            raise ValueError("point count must be a power of two (>= 4)")
        if not half_width > 0.0:
            raise ValueError("half_width must be positive")
        if not np.all(np.isfinite(values)):
            raise ValueError("density values must be finite")
        tol = 1e-8 * max(float(values.max()), 1e-300)
        if float(values.min()) < -tol:
            raise ValueError(f"density has negative values below -{tol:.3g}")
        self.half_width = float(half_width)
        self.m = m
        self.dx = 2.0 * self.half_width / m
        mass = float(values.sum()) * self.dx
        if renormalize:
            if mass <= 0.0:
                raise ValueError("density must have positive mass")
            values /= mass
        elif abs(mass - 1.0) > 1e-6:
            raise ValueError(f"unnormalized density handed in with mass {mass}")
        self.values = values

    @property
    def nodes(self):
        return -self.half_width + self.dx * np.arange(self.m)

    def mass(self):
        return float(self.values.sum()) * self.dx

    def boundary_density(self, fraction=0.05):
        """Max density within the outer ``fraction`` of the domain per side."""
        k = max(1, int(self.m * fraction))
        return float(max(self.values[:k].max(), self.values[-k:].max()))

    def with_values(self, values, renormalize=False):
        return DensityGrid(self.half_width, values, renormalize=renormalize)

    def to_csv(self, path):
        np.savetxt(path, np.column_stack([self.nodes, self.values]),
                   fmt="%.17g", delimiter=",", header="x,p", comments="")

    @classmethod
    def from_csv(cls, path, renormalize=False):
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        x, p = data[:, 0], data[:, 1]
        half_width = float(-x[0])
        return cls(half_width, p, renormalize=renormalize)

    @classmethod
    def from_function(cls, half_width, m, fn, wrap_images=0):
        dx = 2.0 * half_width / m
        x = -half_width + dx * np.arange(m)
        vals = np.asarray(fn(x), dtype=float)
        for j in range(1, wrap_images + 1):
            vals = vals + fn(x + 2.0 * half_width * j) + fn(x - 2.0 * half_width * j)
        return cls(half_width, vals, renormalize=True)


def gaussian_grid(half_width, m, mean=0.0, std=1.0, wrap_images=1):
    """Periodically wrapped Gaussian density."""
    def fn(x):
        return np.exp(-(x - mean) ** 2 / (2.0 * std * std)) / (std * math.sqrt(2.0 * math.pi))
    return DensityGrid.from_function(half_width, m, fn, wrap_images=wrap_images)


@dataclass(frozen=True)
class FractionalParams:
    """Order and multiplier constant of the fractional Laplacian."""

    alpha: float
    diffusivity: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ValueError("alpha must lie in (0, 2]")
        if not self.diffusivity > 0.0:
            raise ValueError("diffusivity must be positive")

    def singular_integral_constant(self):
        """K with Dalpha f = K int (f(x+y)-f(x)-1{|y|<=1} f'(x) y)|y|^(-1-alpha) dy."""
        return self.diffusivity / cf_constant_from_levy_constant(1.0, self.alpha)


def _xi(grid):
    return math.pi * np.arange(grid.m // 2 + 1) / grid.half_width


def fractional_laplacian(values, grid, params):
    """Apply the multiplier -diffusivity |xi_k|^alpha; zero mode -> 0."""
    mult = -params.diffusivity * _xi(grid) ** params.alpha
    return np.fft.irfft(np.fft.rfft(values) * mult, n=grid.m)


def solve_linear_exact(p0, t, params):
    """Exact solution of d/dt p = Dalpha p for the discretized operator."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    decay = np.exp(-params.diffusivity * _xi(p0) ** params.alpha * t)
    vals = np.fft.irfft(np.fft.rfft(p0.values) * decay, n=p0.m)
    return p0.with_values(vals)


def stable_heat_kernel_grid(half_width, m, t, params):
    """Fractional heat kernel at time t on the grid (point mass evolved)."""
    grid = DensityGrid(half_width, np.full(m, 0.5 / half_width), renormalize=True)
    delta = np.zeros(m)
    delta[m // 2] = 1.0 / grid.dx
    return solve_linear_exact(grid.with_values(delta, renormalize=True), t, params)


def stable_step_limit(grid, sigma_max, params, safety=0.5):
    """Largest dt the explicit scheme tolerates, scaled by ``safety``.

    The stiffest mode carries |multiplier| = diffusivity (pi/dx)^alpha
    times the sup of |sigma|^alpha; the classical four-stage explicit
    scheme is stable on the real axis down to -2.7853.
    """
    lam = params.diffusivity * (math.pi / grid.dx) ** params.alpha \
        * abs(sigma_max) ** params.alpha
    if lam <= 0.0:
        return math.inf  # vanishing coefficient: nothing moves at any dt
    return safety * RK4_REAL_AXIS / lam


def _flux(values, grid, sigma, params):
    s = coefficients.sigma_on_grid_values(sigma, values, grid)
    return fractional_laplacian(np.abs(s) ** params.alpha * values, grid, params)


def step_fp(p, dt, sigma, params, safety=0.5, check=True):
    """One explicit RK4 step of the method-of-lines system.

    Raises :class:`StabilityError` when dt exceeds the spectral-radius
    bound, when the step creates negative values beyond the positivity
    monitor, or when mass drifts (the zero mode is invariant, so any
    drift is a bug, not a modeling error).
    """
    v = p.values
    if check:
        s0 = np.abs(coefficients.sigma_on_grid_values(sigma, v, p))
        limit = stable_step_limit(p, float(s0.max()), params, safety)
        if dt > limit * (1.0 + 1e-12):
            raise StabilityError(f"dt={dt:.3g} exceeds stability bound {limit:.3g} "
                                 f"(alpha={params.alpha}, dx={p.dx:.3g})")
    k1 = _flux(v, p, sigma, params)
    k2 = _flux(v + 0.5 * dt * k1, p, sigma, params)
    k3 = _flux(v + 0.5 * dt * k2, p, sigma, params)
    k4 = _flux(v + dt * k3, p, sigma, params)
    new = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if check:
        drift = abs(float(new.sum()) - float(v.sum())) * p.dx
        if drift > 1e-9:
            raise StabilityError(f"mass drifted by {drift:.3g} in one step; "
                                 "zero-mode invariance is broken")
        floor = -1e-8 * max(float(new.max()), 1e-300)
        if float(new.min()) < floor:
            raise StabilityError(f"positivity monitor tripped: min {new.min():.3g} "
                                 f"< {floor:.3g}; reduce dt or refine the grid")
    out = DensityGrid.__new__(DensityGrid)
    out.half_width, out.m, out.dx = p.half_width, p.m, p.dx
    out.values = new
    return out


def _step_lawson(p, dt, sigma, params, c_bar):
    """Integrating-factor RK4 on the linearization with frozen |sigma|^alpha.

    Exact for measure-independent coefficients; removes the stiff step
    limit when alpha is close to 2.
    """
    lam = -params.diffusivity * _xi(p) ** params.alpha * c_bar
    e_half = np.exp(0.5 * dt * lam)
    e_full = e_half * e_half

    def n_hat(v_hat):
        vals = np.fft.irfft(v_hat, n=p.m)
        s = coefficients.sigma_on_grid_values(sigma, vals, p)
        w_hat = np.fft.rfft(np.abs(s) ** params.alpha * vals)
        mult = -params.diffusivity * _xi(p) ** params.alpha
        return mult * w_hat - lam * v_hat

    v = np.fft.rfft(p.values)
    k1 = n_hat(v)
    k2 = n_hat(e_half * (v + 0.5 * dt * k1))
    k3 = n_hat(e_half * v + 0.5 * dt * k2)
    k4 = n_hat(e_full * v + dt * e_half * k3)
    v_new = e_full * v + (dt / 6.0) * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)
    out = DensityGrid.__new__(DensityGrid)
    out.half_width, out.m, out.dx = p.half_width, p.m, p.dx
    out.values = np.fft.irfft(v_new, n=p.m)
    return out


@dataclass
class FpResult:
    """Snapshots plus per-step health traces of one solve."""

    times: list
    grids: list
    mass_trace: np.ndarray
    min_trace: np.ndarray
    boundary_trace: np.ndarray
    dt: float
    scheme: str

    def final(self):
        return self.grids[-1]


def solve_fp(p0, horizon, dt, sigma, params, snapshot_every=None, scheme="rk4",
             safety=0.5, boundary_density_tol=1e-4):
    """March the density to ``horizon`` recording snapshots and health logs.

    Heavy-tailed dynamics push mass toward the periodic seam; the run
    aborts once the boundary density exceeds ``boundary_density_tol``
    rather than silently wrapping significant mass.
    """
    if scheme not in ("rk4", "if-rk4"):
        raise ValueError("scheme must be 'rk4' or 'if-rk4'")
    n_steps = max(1, int(round(horizon / dt)))
    dt = horizon / n_steps
    if snapshot_every is None:
        snapshot_every = n_steps
    times = [0.0]
    grids = [p0]
    mass, mins, bdry = [p0.mass()], [float(p0.values.min())], [p0.boundary_density()]
    p = p0
    for k in range(n_steps):
        if scheme == "rk4":
            p = step_fp(p, dt, sigma, params, safety=safety)
        else:
            s = np.abs(coefficients.sigma_on_grid_values(sigma, p.values, p))
            p = _step_lawson(p, dt, sigma, params, float(s.max()))
        t = (k + 1) * dt
        mass.append(p.mass())
        mins.append(float(p.values.min()))
        bdry.append(p.boundary_density())
        if abs(mass[-1] - 1.0) > 1e-9:
            raise StabilityError(f"mass left unity at t={t:.4g}: {mass[-1]!r}")
        if bdry[-1] > boundary_density_tol:
            raise StabilityError(
                f"boundary density {bdry[-1]:.3g} exceeds {boundary_density_tol:.3g} "
                f"at t={t:.4g}; enlarge the domain for this horizon")
        if (k + 1) % snapshot_every == 0 or k == n_steps - 1:
            if times[-1] != t:
                times.append(t)
                grids.append(p)
    return FpResult(times=times, grids=grids, mass_trace=np.asarray(mass),
                    min_trace=np.asarray(mins), boundary_trace=np.asarray(bdry),
                    dt=dt, scheme=scheme)


def bump(center=0.0, width=1.0):
    """Smooth bump supported on (center-width, center+width), peak value 1."""
    def fn(x):
        t = (np.asarray(x, dtype=float) - center) / width
        out = np.zeros(np.shape(t))
        inside = np.abs(t) < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
        return out if np.ndim(x) else float(out)
    return fn


def _fd_second(fn, x, h):
    return (-fn(x + 2 * h) + 16 * fn(x + h) - 30 * fn(x)
            + 16 * fn(x - h) - fn(x - 2 * h)) / (12.0 * h * h)


@dataclass(frozen=True)
class AdjointReport:
    lhs: float
    rhs: float
    rel_error: float


def _gauss_legendre_panels(breaks, nodes_per_panel):
    """Gauss-Legendre nodes/weights on a sequence of panels (vectorized)."""
    gx, gw = np.polynomial.legendre.leggauss(nodes_per_panel)
    los = breaks[:-1][:, None]
    his = breaks[1:][:, None]
    half = 0.5 * (his - los)
    mid = 0.5 * (his + los)
    return (mid + half * gx[None, :]).ravel(), (half * gw[None, :]).ravel()


def adjoint_identity_check(sigma, nu_grid, phi, psi, params,
                           head_cut=0.01, log_panels=20, nodes_per_panel=24,
                           support_fraction=0.8):
    """Weak-form duality check of the jump generator against the multiplier.

    Left side: the generator applied to ``phi`` by direct singular
    quadrature in the jump variable (Taylor head below ``head_cut``,
    log-graded Gauss-Legendre panels over one period of the wrapped test
    function, with the periodic tail summed exactly through the Hurwitz
    zeta), integrated against ``psi``.  Right side: the same pairing with
    the multiplier form moved onto ``|sigma|^alpha psi`` spectrally.
    Both test functions must be compactly supported away from the seam.
    """
    m, L, dx = nu_grid.m, nu_grid.half_width, nu_grid.dx
    x = nu_grid.nodes
    for name, fn in (("phi", phi), ("psi", psi)):
        edge = np.max(np.abs(fn(np.concatenate(
            [np.linspace(-L, -support_fraction * L, 64),
             np.linspace(support_fraction * L, L, 64)]))))
        if edge > 1e-12:
            raise ValueError(f"{name} must vanish outside |x| <= {support_fraction} L")

    s = np.abs(np.asarray(coefficients.evaluate_on_density(sigma, nu_grid), dtype=float))
    s = np.broadcast_to(s, (m,)).astype(float)
    if float(s.min()) <= 0.0:
        raise ValueError("coefficient must be nonvanishing for the duality check")
    alpha = params.alpha
    k_sing = params.singular_integral_constant()

    def phi_wrapped(u):
        return phi((u + L) % (2.0 * L) - L)

    # Taylor head: G(y) ~ (s y)^2 phi'' + (s y)^4 phi'''' / 12 below head_cut
    h = 0.01
    phi2 = _fd_second(phi, x, h)
    phi2_p = _fd_second(phi, x + 5 * h, h)
    phi2_m = _fd_second(phi, x - 5 * h, h)
    phi4 = (phi2_p - 2.0 * phi2 + phi2_m) / (25.0 * h * h)
    head = (s ** 2 * phi2 * head_cut ** (2.0 - alpha) / (2.0 - alpha)
            + s ** 4 * phi4 * head_cut ** (4.0 - alpha) / (12.0 * (4.0 - alpha)))

    # one full period [head_cut, head_cut + p(x)] with the Hurwitz-zeta
    # weight folding in every later period exactly
    period = 2.0 * L / s
    ratio = (head_cut + period) / head_cut
    tau_breaks = np.linspace(0.0, 1.0, log_panels + 1)
    tau, tau_w = _gauss_legendre_panels(tau_breaks, nodes_per_panel)
    y = head_cut * np.power.outer(ratio, tau)            # (m, nq)
    dy = y * np.log(ratio)[:, None] * tau_w[None, :]
    big_g = (phi_wrapped(x[:, None] + s[:, None] * y)
             + phi_wrapped(x[:, None] - s[:, None] * y)
             - 2.0 * phi(x)[:, None])
    weight = period[:, None] ** (-1.0 - alpha) * hurwitz_zeta(
        1.0 + alpha, y / period[:, None])
    body = np.sum(big_g * weight * dy, axis=1)

    gen_phi = k_sing * (head + body)
    lhs = float(np.sum(gen_phi * psi(x)) * dx)

    w = s ** alpha * psi(x)
    rhs = float(np.sum(phi(x) * fractional_laplacian(w, nu_grid, params)) * dx)
    rel = abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-300)
    return AdjointReport(lhs=lhs, rhs=rhs, rel_error=rel)
