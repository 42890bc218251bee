"""Frequency-domain Popov test for the uncertain plant.

The plant is certified robustly mean-square stable when ``A`` is Hurwitz and,
for some ``theta >= 0``, the Hermitian matrix

    gamma I - (1 + i theta w) G(iw) - (1 - i theta w) G(iw)^dagger

is positive definite for every ``w`` in ``[-inf, inf]``.  The test is run on
a finite frequency grid; the endpoint at infinity is handled analytically
(the matrix tends to ``gamma I`` because ``CB + B^dagger C^dagger = 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleGammaError
from .model import PlantSpec
from .numeric import hermitian_part, is_hurwitz
from .plant import StateSpace, SisoReduction, build_state_space, frequency_response

CERTIFIED = "certified-stable"
NOT_CERTIFIED = "not-certified"
# margins below this (relative to max(1, gamma)) are round-off, not evidence
MARGIN_RTOL = 1e-12


@dataclass(frozen=True)
class FrequencyGrid:
    """Finite frequencies (sorted, symmetric about 0) plus the point at infinity."""

    omegas: np.ndarray
    include_inf: bool = True

    def __post_init__(self):
        w = np.unique(np.asarray(self.omegas, dtype=float))
        if w.size == 0 or not np.all(np.isfinite(w)):
            raise ValueError("grid needs at least one finite frequency")
        w = np.unique(np.concatenate([w, -w]))
        object.__setattr__(self, "omegas", w)

    @property
    def points(self) -> np.ndarray:
        return np.append(self.omegas, np.inf) if self.include_inf else self.omegas

    @property
    def nonnegative(self) -> "FrequencyGrid":
        return FrequencyGrid(self.omegas[self.omegas >= 0], self.include_inf)

    def __len__(self):
        return len(self.points)


def default_grid(plant: PlantSpec, n_points: int = 512, omega_max: float | None = None) -> FrequencyGrid:
    """Frequency grid adapted to the modes of ``A``.

    A linear band covers the resonances, logarithmic tails run out to
    ``omega_max`` (default ``max(1e3, 100 * spectral radius)``) and every
    resonance ``|Im eig(A)|`` gets a dense patch scaled by its damping.
    """
    if n_points < 16:
        raise ValueError("n_points must be at least 16")
    ev = np.linalg.eigvals(build_state_space(plant).A)
    rho = float(np.max(np.abs(ev)))
    if omega_max is None:
        omega_max = max(1e3, 100.0 * rho)
    res = np.abs(ev.imag)
    damp = np.maximum(np.abs(ev.real), 1e-6)
    band = max(1.0, 2.0 * float(np.max(res + 4.0 * damp)))
    band = min(band, omega_max)
    n_lin = max(8, n_points // 2)
    n_log = max(4, n_points // 4)
    parts = [np.linspace(0.0, band, n_lin)]
    if omega_max > band:
        parts.append(np.logspace(math.log10(band), math.log10(omega_max), n_log))
    patch = np.linspace(-4.0, 4.0, 33)
    for r, d in zip(res, damp):
        parts.append(np.abs(r + d * patch))
        parts.append(np.array([r]))
    w = np.concatenate(parts)
    return FrequencyGrid(w[w <= omega_max])


def spr_matrix(G, omega: float, theta: float, gamma: float) -> np.ndarray:
    """Hermitian matrix of the frequency condition at one frequency."""
    G = np.asarray(G, dtype=complex)
    k = G.shape[-1]
    if math.isinf(omega):
        return gamma * np.eye(k, dtype=complex)
    w = 1j * theta * omega
    S = gamma * np.eye(k) - (1 + w) * G - (1 - w) * G.conj().T
    return hermitian_part(S)


@dataclass(frozen=True)
class PopovAnalysis:
    theta: float
    gamma: float
    margin: float
    worst_omega: float
    hurwitz: bool
    abscissa: float

    @property
    def certified(self) -> bool:
        return bool(self.hurwitz and self.margin > MARGIN_RTOL * max(1.0, self.gamma))

    @property
    def verdict(self) -> str:
        return CERTIFIED if self.certified else NOT_CERTIFIED

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "gamma": self.gamma,
            "margin": self.margin,
            "worst_omega": _json_omega(self.worst_omega),
            "hurwitz": self.hurwitz,
            "abscissa": self.abscissa,
            "verdict": self.verdict,
        }


def _json_omega(w):
    return "inf" if math.isinf(w) else float(w)


@dataclass
class FrequencyResponse:
    """``G(i omega)`` cached over a grid so margins for many ``(theta, gamma)`` are cheap."""

    ss: StateSpace
    grid: FrequencyGrid
    G: np.ndarray = field(repr=False)
    hurwitz: bool
    abscissa: float

    @classmethod
    def compute(cls, plant: PlantSpec, grid: FrequencyGrid | None = None) -> "FrequencyResponse":
        ss = build_state_space(plant)
        grid = default_grid(plant) if grid is None else grid
        stable, a = is_hurwitz(ss.A)
        if stable:
            G = frequency_response(ss, grid.omegas)
        else:
            # Off-grid safety: an unstable A cannot be certified anyway.
            G = np.full((len(grid.omegas),) + (ss.C.shape[0],) * 2, np.nan, dtype=complex)
        return cls(ss=ss, grid=grid, G=G, hurwitz=stable, abscissa=a)

    def min_eigs(self, theta: float) -> np.ndarray:
        """Smallest eigenvalue of the frequency matrix at ``gamma = 0`` per finite grid point."""
        w = (1j * theta * self.grid.omegas)[:, None, None]
        S = -(1 + w) * self.G - (1 - w) * self.G.conj().swapaxes(-1, -2)
        return np.linalg.eigvalsh(hermitian_part(S))[:, 0]

    def margin(self, theta: float, gamma: float) -> tuple[float, float]:
        if not self.hurwitz:
            return -math.inf, math.nan
        shifted = gamma + self.min_eigs(theta)
        i = int(np.argmin(shifted))
        # at infinity the matrix is gamma I; a tie keeps the finite frequency
        if self.grid.include_inf and gamma < shifted[i]:
            return float(gamma), math.inf
        return float(shifted[i]), float(self.grid.omegas[i])

    def analysis(self, theta: float, gamma: float) -> PopovAnalysis:
        margin, worst = self.margin(theta, gamma)
        return PopovAnalysis(theta=float(theta), gamma=float(gamma), margin=margin,
                             worst_omega=worst, hurwitz=self.hurwitz, abscissa=self.abscissa)


def spr_margin(plant: PlantSpec, theta: float, gamma: float | None = None,
               grid: FrequencyGrid | None = None) -> PopovAnalysis:
    if theta < 0:
        raise ValueError(f"theta must be nonnegative, got {theta}")
    gamma = plant.gamma if gamma is None else gamma
    return FrequencyResponse.compute(plant, grid).analysis(theta, gamma)


def _golden_max(f, lo, hi, iters=40):
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def search_theta(plant: PlantSpec, gamma: float | None = None, theta_max: float = 10.0,
                 grid: FrequencyGrid | None = None,
                 response: FrequencyResponse | None = None) -> tuple[float, PopovAnalysis]:
    """Popov multiplier maximizing the grid margin.

    Coarse scan of ``{0} U logspace(1e-3, theta_max)`` (25 points), then a
    golden-section refinement between the neighbours of the best point.
    Ties go to the smaller ``theta``.
    """
    if theta_max <= 0:
        raise ValueError("theta_max must be positive")
    gamma = plant.gamma if gamma is None else gamma
    resp = FrequencyResponse.compute(plant, grid) if response is None else response
    coarse = np.concatenate([[0.0], np.logspace(-3, math.log10(theta_max), 24)])
    margins = [resp.margin(t, gamma)[0] for t in coarse]
    best = int(np.argmax(margins))  # first maximum, i.e. smallest theta
    theta, value = float(coarse[best]), margins[best]
    if resp.hurwitz:
        lo = coarse[max(best - 1, 0)]
        hi = coarse[min(best + 1, len(coarse) - 1)]
        if hi > lo:
            t, v = _golden_max(lambda t: resp.margin(t, gamma)[0], lo, hi)
            if v > value:
                theta, value = float(t), v
    return theta, resp.analysis(theta, gamma)


@dataclass(frozen=True)
class GammaResult:
    gamma_star: float
    theta: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"gamma_star": self.gamma_star, "theta": self.theta, "degenerate": self.degenerate}


GAMMA_BRACKET = (1e-6, 2.0 ** 16)


def min_gamma(plant: PlantSpec, theta: float | str = "search", tol: float = 1e-6,
              grid: FrequencyGrid | None = None, theta_max: float = 10.0,
              max_iter: int = 60) -> GammaResult:
    """Smallest sector bound the Popov test certifies, by bisection on ``gamma``.

    A smaller ``gamma`` admits the larger uncertainty set ``Delta <= (4/gamma) I``.
    """
    resp = FrequencyResponse.compute(plant, grid)
    lo, hi = GAMMA_BRACKET
    if theta == "search":
        # margin(theta, gamma) = gamma + m(theta), so the best theta does not depend on gamma
        theta_used, _ = search_theta(plant, hi, theta_max, response=resp)
    else:
        theta_used = float(theta)

    def ok(g):
        return resp.analysis(theta_used, g).certified

    if not ok(hi):
        raise InfeasibleGammaError(
            f"not certified even at gamma = {hi:g} (A Hurwitz: {resp.hurwitz})")
    if ok(lo):
        return GammaResult(gamma_star=0.0, theta=theta_used, degenerate=True)
    for _ in range(max_iter):
        if hi / lo <= (1 + tol) ** 2:
            break
        mid = math.sqrt(lo * hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return GammaResult(gamma_star=math.sqrt(lo * hi), theta=theta_used)


@dataclass(frozen=True)
class SmallGainAnalysis:
    """Norm-bound comparison test ``sup_w ||G(iw)|| < gamma / 2``."""

    gamma: float
    hinf_norm: float
    worst_omega: float
    hurwitz: bool

    @property
    def margin(self) -> float:
        return self.gamma - 2.0 * self.hinf_norm

    @property
    def certified(self) -> bool:
        return bool(self.hurwitz and self.margin > 0)

    @property
    def verdict(self) -> str:
        return CERTIFIED if self.certified else NOT_CERTIFIED


def small_gain_margin(plant: PlantSpec, gamma: float | None = None,
                      grid: FrequencyGrid | None = None) -> SmallGainAnalysis:
    gamma = plant.gamma if gamma is None else gamma
    resp = FrequencyResponse.compute(plant, grid)
    if not resp.hurwitz:
        return SmallGainAnalysis(gamma, math.inf, math.nan, False)
    sv = np.linalg.svd(resp.G, compute_uv=False)[:, 0]
    i = int(np.argmax(sv))
    return SmallGainAnalysis(gamma, float(sv[i]), float(resp.grid.omegas[i]), True)


# -- annihilation-only SISO form -------------------------------------------

def siso_conditions(reduction: SisoReduction, omega: float, theta: float,
                    gamma: float) -> tuple[float, float]:
    """Left-hand sides of the two scalar Popov inequalities at ``omega``."""
    if math.isinf(omega):
        return gamma / 4, gamma / 4
    g = reduction.G1(1j * omega)
    y = omega * g.imag
    return gamma / 4 + g.real - theta * y, gamma / 4 - g.real + theta * y


@dataclass(frozen=True)
class PopovPlot:
    omegas: np.ndarray
    x: np.ndarray
    y: np.ndarray
    lhs_a: np.ndarray
    lhs_b: np.ndarray
    theta: float
    gamma: float

    @property
    def inside(self) -> bool:
        return bool(np.all(self.lhs_a > 0) and np.all(self.lhs_b > 0))

    def region_lines(self, x_range) -> list[tuple[np.ndarray, np.ndarray]]:
        """Boundary lines of the allowable region, sampled over ``x_range``.

        Slope ``1/theta`` through ``x = -gamma/4`` and ``x = +gamma/4``; for
        ``theta = 0`` they degenerate into the vertical lines ``x = +-gamma/4``.
        """
        q = self.gamma / 4
        if self.theta == 0:
            y_lo, y_hi = float(np.min(self.y)), float(np.max(self.y))
            span = max(y_hi - y_lo, 1e-3)
            ys = np.array([y_lo - 0.1 * span, y_hi + 0.1 * span])
            return [(np.full(2, -q), ys), (np.full(2, q), ys)]
        xs = np.asarray(x_range, dtype=float)
        return [(xs, (xs + q) / self.theta), (xs, (xs - q) / self.theta)]


def popov_plot(reduction: SisoReduction, grid: FrequencyGrid, theta: float, gamma: float) -> PopovPlot:
    """Popov plot ``(Re G1(iw), w Im G1(iw))`` over the finite grid."""
    w = grid.omegas
    g = reduction.G1_grid(w)
    x = g.real
    y = w * g.imag
    return PopovPlot(omegas=w, x=x, y=y,
                     lhs_a=gamma / 4 + x - theta * y,
                     lhs_b=gamma / 4 - x + theta * y,
                     theta=float(theta), gamma=float(gamma))
