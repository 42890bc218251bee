"""Brute-force cross-check of Popov verdicts by sampling admissible Delta.

For a fixed ``Delta`` the closed loop is linear, so mean-square stability
is the Hurwitz property of ``A_cl``.  Second moments ``Sigma = <x x^dagger>``
obey ``dSigma/dt = A_cl Sigma + Sigma A_cl^dagger + D`` with
``D = J N^dagger [[I_c, 0], [0, 0]] N J``; those trajectories corroborate
the decay constants of a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (PlantSpec, delta_bounds, encode_matrix, make_structure, random_admissible_delta,
                    split_blocks)
from .numeric import hermitian_part, is_hurwitz, solve_lyapunov
from .plant import closed_loop_A
from .popov import FrequencyGrid, PopovAnalysis, spr_margin

DIVERGENCE_LIMIT = 1e12


def noise_matrix(plant: PlantSpec) -> np.ndarray:
    J = make_structure(plant.n).J
    c = plant.c
    Pi = np.zeros((2 * c, 2 * c))
    Pi[:c, :c] = np.eye(c)
    N = plant.N
    return hermitian_part(J @ N.conj().T @ Pi @ N @ J)


def mss_check(plant: PlantSpec, delta) -> tuple[bool, float]:
    """Closed-loop Hurwitz test for one uncertainty; returns ``(hurwitz, abscissa)``."""
    return is_hurwitz(closed_loop_A(plant, delta))


def steady_covariance(plant: PlantSpec, delta) -> np.ndarray:
    return solve_lyapunov(closed_loop_A(plant, delta), noise_matrix(plant))


@dataclass
class Trajectory:
    times: np.ndarray
    traces: np.ndarray
    sigmas: np.ndarray | None = field(default=None, repr=False)
    diverged: bool = False


def default_dt(A_cl) -> float:
    return min(0.01, 0.1 / max(np.linalg.norm(A_cl, 2), 1e-12))


def covariance_trajectory(plant: PlantSpec, delta, sigma0=None, t_final: float = 20.0,
                          dt: float | None = None, store_sigmas: bool = True) -> Trajectory:
    """Fixed-step RK4 integration of the second-moment equation.

    ``dt=None`` picks ``min(0.01, 0.1/||A_cl||)``; the final step is
    shortened so the trajectory ends exactly at ``t_final``.
    """
    A = closed_loop_A(plant, delta)
    D = noise_matrix(plant)
    k = A.shape[0]
    S = np.eye(k, dtype=complex) if sigma0 is None else np.array(sigma0, dtype=complex)
    dt = default_dt(A) if dt is None else float(dt)
    if dt <= 0 or t_final < dt:
        raise ValueError("need dt > 0 and t_final >= dt")
    steps = int(math.ceil(t_final / dt - 1e-9))
    times = np.minimum(np.arange(steps + 1) * dt, t_final)
    Ah = A.conj().T

    def f(X):
        return A @ X + X @ Ah + D

    traces = np.empty(steps + 1)
    sigmas = np.empty((steps + 1, k, k), dtype=complex) if store_sigmas else None
    traces[0] = np.trace(S).real
    if store_sigmas:
        sigmas[0] = S
    for i in range(steps):
        h = times[i + 1] - times[i]
        k1 = f(S)
        k2 = f(S + 0.5 * h * k1)
        k3 = f(S + 0.5 * h * k2)
        k4 = f(S + h * k3)
        S = S + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        S = 0.5 * (S + S.conj().T)
        traces[i + 1] = np.trace(S).real
        if store_sigmas:
            sigmas[i + 1] = S
        if not np.isfinite(traces[i + 1]) or abs(traces[i + 1]) > DIVERGENCE_LIMIT:
            end = i + 2
            return Trajectory(times[:end], traces[:end],
                              None if sigmas is None else sigmas[:end], diverged=True)
    return Trajectory(times, traces, sigmas)


def sample_deltas(m: int, gamma: float, n_samples: int, seed: int) -> list[tuple[str, np.ndarray]]:
    """Zero, the full bound ``(4/gamma) I``, then alternating boundary/interior draws."""
    out = [("zero", np.zeros((2 * m, 2 * m), dtype=complex))]
    if n_samples > 1:
        out.append(("extreme", random_admissible_delta(m, gamma, seed, "extreme")))
    seeds = np.random.default_rng(seed).integers(0, 2 ** 63 - 1, size=max(n_samples - 2, 0))
    for i, s in enumerate(seeds):
        strategy = "boundary" if i % 2 == 0 else "interior"
        out.append((strategy, random_admissible_delta(m, gamma, int(s), strategy)))
    return out[:n_samples]


@dataclass
class Sample:
    index: int
    strategy: str
    delta: np.ndarray = field(repr=False)
    abscissa: float
    hurwitz: bool

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "strategy": self.strategy,
            "delta_eigs": [float(v) for v in np.linalg.eigvalsh(hermitian_part(self.delta))],
            "abscissa": self.abscissa,
            "hurwitz": self.hurwitz,
        }


@dataclass
class OracleReport:
    analysis: PopovAnalysis
    samples: list[Sample]
    trajectories: list[Trajectory] | None = None

    @property
    def consistent(self) -> bool:
        return all(s.hurwitz for s in self.samples)

    @property
    def counterexample(self) -> Sample | None:
        return next((s for s in self.samples if not s.hurwitz), None)

    @property
    def violation(self) -> bool:
        """A certified plant with an unstable admissible sample: must never happen."""
        return self.analysis.certified and not self.consistent

    def to_dict(self) -> dict:
        ce = self.counterexample
        doc = {
            "certified": self.analysis.certified,
            "consistent": self.consistent,
            "violation": self.violation,
            "analysis": self.analysis.to_dict(),
            "samples": [s.to_dict() for s in self.samples],
            "counterexample": None,
        }
        if ce is not None:
            D1, D2 = split_blocks(ce.delta)
            doc["counterexample"] = {"index": ce.index, "Delta1": encode_matrix(D1),
                                     "Delta2": encode_matrix(D2)}
        return doc


def consistency_sweep(plant: PlantSpec, theta: float, gamma: float | None = None,
                      n_samples: int = 200, seed: int = 0, grid: FrequencyGrid | None = None,
                      analysis: PopovAnalysis | None = None, trajectories: bool = False,
                      t_final: float = 20.0) -> OracleReport:
    """Sample admissible uncertainties and test each closed loop.

    The samples are only required to be stable when the Popov test certified
    the plant; otherwise the report is informational.
    """
    gamma = plant.gamma if gamma is None else gamma
    if analysis is None:
        analysis = spr_margin(plant, theta, gamma, grid)
    samples = []
    trajs = [] if trajectories else None
    for i, (strategy, delta) in enumerate(sample_deltas(plant.m, gamma, n_samples, seed)):
        lo, hi = delta_bounds(delta)
        assert lo >= -1e-9 and hi <= 4.0 / gamma * (1 + 1e-9), "sampler left the admissible set"
        hurwitz, a = mss_check(plant, delta)
        samples.append(Sample(i, strategy, delta, a, hurwitz))
        if trajectories:
            trajs.append(covariance_trajectory(plant, delta, t_final=t_final, store_sigmas=False))
    return OracleReport(analysis=analysis, samples=samples, trajectories=trajs)
