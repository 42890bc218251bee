"""State-space matrices of the linear plant and its uncertainty loop.

With ``x = [a; a#]`` the nominal dynamics, the uncertainty channel and the
closed loop for a fixed admissible ``Delta`` are::

    A    = -i J M - 1/2 J N^dagger J N
    B    = -2i J E^dagger,    C = E
    G(s) = C (sI - A)^{-1} B = -2i E (sI - A)^{-1} J E^dagger
    A_cl = -i J (M + E^dagger Delta E) - 1/2 J N^dagger J N
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, SingularMatrixError
from .model import PlantSpec, make_structure
from .numeric import solve_linear


@dataclass(frozen=True)
class StateSpace:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def order(self) -> int:
        return self.A.shape[0]


def _drift(plant: PlantSpec, M: np.ndarray) -> np.ndarray:
    J = make_structure(plant.n).J
    Jc = make_structure(plant.c).J
    N = plant.N
    return -1j * J @ M - 0.5 * J @ N.conj().T @ Jc @ N


def build_state_space(plant: PlantSpec) -> StateSpace:
    if plant.E.shape[1] != plant.M.shape[0]:
        raise InvalidDimensionError(f"E has {plant.E.shape[1]} columns, plant order is {plant.M.shape[0]}")
    J = make_structure(plant.n).J
    A = _drift(plant, plant.M)
    B = -2j * J @ plant.E.conj().T
    C = plant.E.copy()
    return StateSpace(A=A, B=B, C=C)


def eval_G(ss: StateSpace, omega: float) -> np.ndarray:
    """Transfer matrix ``G(i omega)`` (2m x 2m) via one linear solve."""
    k = ss.order
    X = solve_linear(1j * omega * np.eye(k) - ss.A, ss.B)
    return ss.C @ X


def frequency_response(ss: StateSpace, omegas) -> np.ndarray:
    """``G(i omega)`` for every finite frequency in ``omegas``; shape (K, 2m, 2m)."""
    omegas = np.asarray(omegas, dtype=float)
    k = ss.order
    lhs = 1j * omegas[:, None, None] * np.eye(k) - ss.A
    try:
        X = np.linalg.solve(lhs, np.broadcast_to(ss.B, (len(omegas),) + ss.B.shape))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("i omega I - A is singular on the grid") from exc
    if not np.all(np.isfinite(X)):
        raise SingularMatrixError("i omega I - A is singular on the grid")
    return ss.C @ X


def closed_loop_A(plant: PlantSpec, delta) -> np.ndarray:
    """Drift matrix with the perturbation Hamiltonian ``H2 = 1/2 z^dagger Delta z`` switched on."""
    delta = np.asarray(delta, dtype=complex)
    if delta.shape != (2 * plant.m, 2 * plant.m):
        raise InvalidDimensionError(f"Delta must be {2 * plant.m}x{2 * plant.m}, got {delta.shape}")
    E = plant.E
    return _drift(plant, plant.M + E.conj().T @ delta @ E)


def commutator_zL(plant: PlantSpec) -> np.ndarray:
    """Constant commutators ``[z, L]`` and ``[z, L#]`` as ``E J Sigma N^T`` (2m x 2c).

    The first ``c`` columns are ``[z, L_k]``; the last ``c`` are ``[z, L_k^*]``.
    """
    s = make_structure(plant.n)
    return plant.E @ s.J @ s.Sigma @ plant.N.T


@dataclass(frozen=True)
class SisoReduction:
    """Annihilation-only SISO plant, ``G1(s) = i E1 (sI - A1)^{-1} E1^dagger``."""

    A1: np.ndarray
    E1: np.ndarray

    def G1(self, s) -> complex:
        n = self.A1.shape[0]
        return complex(1j * (self.E1 @ solve_linear(s * np.eye(n) - self.A1, self.E1.conj().T))[0, 0])

    def G1_grid(self, omegas) -> np.ndarray:
        omegas = np.asarray(omegas, dtype=float)
        n = self.A1.shape[0]
        lhs = 1j * omegas[:, None, None] * np.eye(n) - self.A1
        x = np.linalg.solve(lhs, np.broadcast_to(self.E1.conj().T, (len(omegas), n, 1)))
        return 1j * (self.E1 @ x)[:, 0, 0]


def reduce_annihilation_only(plant: PlantSpec, tol: float = 1e-12) -> SisoReduction | None:
    """Return the SISO reduction, or ``None`` when the plant mixes in creation operators."""
    b = plant.blocks
    if plant.m != 1:
        return None
    if any(np.max(np.abs(b[key]), initial=0.0) > tol for key in ("M2", "Ntilde2", "E2")):
        return None
    N1 = b["Ntilde1"]
    A1 = -1j * b["M1"] - 0.5 * N1.conj().T @ N1
    return SisoReduction(A1=A1, E1=b["E1"])
