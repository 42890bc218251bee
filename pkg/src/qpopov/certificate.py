"""Lyapunov certificate for the Popov test.

When the frequency condition holds, the linear matrix inequality

    [[P A + A^dagger P,  P B + K^dagger],
     [B^dagger P + K,    -gamma I      ]] < 0,      K = C + theta C A,

has a doubled-up solution ``P > 0``.  (The (2,2) block is
``-gamma I + theta (CB + B^dagger C^dagger)`` and the bracket vanishes.)
We never call an SDP solver: the Schur complement turns the LMI into a
Riccati equation, solved with a small ``eps I`` added for strictness, and
the result is checked by eigenvalues of the assembled block matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificateInfeasibleError, NumericFailure, QPopovError
from .model import PlantSpec, doubled_residual, encode_matrix, make_structure, project_doubled, split_blocks
from .numeric import hermitian_part, max_eig_hermitian, min_eig_hermitian, solve_riccati
from .plant import StateSpace, build_state_space, commutator_zL

EPS_LADDER_START = 1e-2
EPS_LADDER_STEPS = 6
STRUCTURE_TOL = 1e-10


def popov_output(ss: StateSpace, theta: float) -> np.ndarray:
    return ss.C + theta * ss.C @ ss.A


def lmi_matrix(P, ss: StateSpace, theta: float, gamma: float) -> np.ndarray:
    A, B, C = ss.A, ss.B, ss.C
    K = popov_output(ss, theta)
    top = np.hstack([P @ A + A.conj().T @ P, P @ B + K.conj().T])
    m2 = C.shape[0]
    corner = -gamma * np.eye(m2) + theta * (C @ B + B.conj().T @ C.conj().T)
    bottom = np.hstack([B.conj().T @ P + K, corner])
    return np.vstack([top, bottom])


def mtilde(P, ss: StateSpace, theta: float, gamma: float) -> np.ndarray:
    """Schur complement of the LMI: ``PA + A^dagger P + (PB + K^dagger)(B^dagger P + K)/gamma``."""
    K = popov_output(ss, theta)
    L = P @ ss.B + K.conj().T
    return hermitian_part(P @ ss.A + ss.A.conj().T @ P + L @ L.conj().T / gamma)


@dataclass(frozen=True)
class Verification:
    lmi_margin: float
    mtilde_max_eig: float
    structure_residual: float
    pos_def_min_eig: float

    @property
    def valid(self) -> bool:
        return (self.pos_def_min_eig > 0 and self.lmi_margin < 0 and self.mtilde_max_eig < 0
                and self.structure_residual <= STRUCTURE_TOL)


def verify_certificate(P, ss: StateSpace, theta: float, gamma: float) -> Verification:
    """Eigenvalue check of a candidate ``P``; independent of how ``P`` was found."""
    P = np.asarray(P, dtype=complex)
    return Verification(
        lmi_margin=max_eig_hermitian(lmi_matrix(P, ss, theta, gamma)),
        mtilde_max_eig=max_eig_hermitian(mtilde(P, ss, theta, gamma)),
        structure_residual=doubled_residual(P),
        pos_def_min_eig=min_eig_hermitian(P),
    )


def riccati_data(ss: StateSpace, theta: float, gamma: float, eps: float):
    """``(Ahat, R, Q)`` with ``P Ahat + Ahat^dagger P + P R P + Q = 0`` equivalent to ``Mtilde = -eps I``."""
    K = popov_output(ss, theta)
    B = ss.B
    Ahat = ss.A + B @ K / gamma
    R = B @ B.conj().T / gamma
    Q = K.conj().T @ K / gamma + eps * np.eye(ss.order)
    return Ahat, R, Q


def synthesize_P(ss: StateSpace, theta: float, gamma: float, eps: float | None = None,
                 steps: int = EPS_LADDER_STEPS) -> np.ndarray:
    """Solve for a certificate ``P``, shrinking ``eps`` tenfold on each failure.

    The ladder starts at ``eps = 1e-2 * ||A||`` unless ``eps`` is given.
    Raises :class:`CertificateInfeasibleError` once the ladder is exhausted.
    """
    if theta < 0 or gamma <= 0:
        raise ValueError("need theta >= 0 and gamma > 0")
    if eps is None:
        eps = EPS_LADDER_START * max(np.linalg.norm(ss.A, 2), 1e-12)
    attempts = []
    for _ in range(steps + 1):
        try:
            P = solve_riccati(*riccati_data(ss, theta, gamma, eps))
        except NumericFailure as exc:
            attempts.append((eps, str(exc)))
        else:
            P = hermitian_part(project_doubled(P))
            check = verify_certificate(P, ss, theta, gamma)
            if check.valid:
                return P
            attempts.append((eps, f"candidate rejected: {check}"))
        eps /= 10.0
    raise CertificateInfeasibleError(
        f"no certificate for theta={theta:g}, gamma={gamma:g} after {len(attempts)} eps values",
        attempts)


@dataclass(frozen=True)
class DecayConstants:
    lam: float
    c: float
    c1: float
    c2: float
    c3: float


def noise_trace(P, plant: PlantSpec) -> float:
    """``tr(P J N^dagger [[I_c, 0], [0, 0]] N J)``."""
    J = make_structure(plant.n).J
    N = plant.N
    c = plant.c
    Pi = np.zeros((2 * c, 2 * c))
    Pi[:c, :c] = np.eye(c)
    return float(np.trace(P @ J @ N.conj().T @ Pi @ N @ J).real)


def stability_constants(P, plant: PlantSpec, ss: StateSpace, theta: float, gamma: float,
                        iters: int = 40) -> DecayConstants:
    """Offset ``lambda`` and the decay constants ``c, c1, c2, c3``.

    ``c`` is the largest value (found by bisection) with
    ``Mtilde + c (P + (4 theta/gamma) E^dagger E) <= 0``.
    """
    P = np.asarray(P, dtype=complex)
    Mt = mtilde(P, ss, theta, gamma)
    top = max_eig_hermitian(Mt)
    if not top < 0:
        raise QPopovError(f"Mtilde must be negative definite (max eigenvalue {top:.3e})")
    E = plant.E
    envelope = hermitian_part(P + (4 * theta / gamma) * E.conj().T @ E)
    pmin = min_eig_hermitian(P)

    zl = commutator_zL(plant)[:, :plant.c]
    lam = noise_trace(P, plant) + (4 * theta / gamma) * float(np.sum(np.abs(zl) ** 2))
    if not lam >= -1e-12 * max(1.0, np.linalg.norm(P, 2)):
        raise QPopovError(f"lambda came out negative ({lam:.3e})")
    lam = max(lam, 0.0)

    lo, hi = 0.0, 10.0 * abs(top) / pmin
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if max_eig_hermitian(Mt + mid * envelope) <= 0:
            lo = mid
        else:
            hi = mid
    c = lo
    if not c > 0:
        raise QPopovError("decay rate bisection collapsed to zero")
    c1 = max_eig_hermitian(envelope) / pmin
    return DecayConstants(lam=lam, c=c, c1=c1, c2=c, c3=lam / (c * pmin))


@dataclass(frozen=True)
class Certificate:
    P: np.ndarray = field(repr=False)
    theta: float
    gamma: float
    lmi_margin: float
    mtilde_max_eig: float
    structure_residual: float
    pos_def_min_eig: float
    lam: float
    c: float
    c1: float
    c2: float
    c3: float

    def to_dict(self) -> dict:
        P1, P2 = split_blocks(self.P)
        return {
            "theta": self.theta,
            "gamma": self.gamma,
            "P1": encode_matrix(P1),
            "P2": encode_matrix(P2),
            "lmi_margin": self.lmi_margin,
            "mtilde_max_eig": self.mtilde_max_eig,
            "lambda": self.lam,
            "c": self.c,
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
        }


def certify(plant: PlantSpec, theta: float, gamma: float | None = None) -> Certificate:
    """Synthesize, verify and summarize a certificate for ``plant``."""
    gamma = plant.gamma if gamma is None else gamma
    ss = build_state_space(plant)
    P = synthesize_P(ss, theta, gamma)
    check = verify_certificate(P, ss, theta, gamma)
    k = stability_constants(P, plant, ss, theta, gamma)
    for name, value in (("c1", k.c1), ("c3", k.c3), ("lambda", k.lam)):
        if not math.isfinite(value):
            raise QPopovError(f"{name} is not finite")
    return Certificate(P=P, theta=float(theta), gamma=float(gamma),
                       lmi_margin=check.lmi_margin, mtilde_max_eig=check.mtilde_max_eig,
                       structure_residual=check.structure_residual,
                       pos_def_min_eig=check.pos_def_min_eig,
                       lam=k.lam, c=k.c, c1=k.c1, c2=k.c2, c3=k.c3)
