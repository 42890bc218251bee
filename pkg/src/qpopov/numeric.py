"""Dense complex linear algebra used by the analysis modules.

All inputs are small (2n <= 12 or so), so we favour simple, verifiable
methods: Kronecker systems for Lyapunov equations and the ordered Schur
form of the Hamiltonian-structured matrix for Riccati equations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (
    InvalidDimensionError,
    NoSolutionError,
    NumericFailure,
    RiccatiInfeasibleError,
    SingularMatrixError,
)

SINGULAR_RCOND = 1e-14
HURWITZ_RTOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    values: np.ndarray

    @property
    def abscissa(self) -> float:
        return float(np.max(self.values.real))


def _square(X, name="matrix") -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise InvalidDimensionError(f"{name} must be square, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NumericFailure(f"{name} has non-finite entries")
    return X


def hermitian_part(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    return 0.5 * (X + X.conj().swapaxes(-1, -2))


def eigenvalues(X) -> Spectrum:
    X = _square(X)
    try:
        w = np.linalg.eigvals(X)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK non-convergence
        raise NumericFailure(f"eigenvalue iteration failed: {exc}") from exc
    return Spectrum(values=w)


def spectral_abscissa(X) -> float:
    return eigenvalues(X).abscissa


def is_hurwitz(X, margin: float | None = None) -> tuple[bool, float]:
    """Return ``(abscissa < -margin, abscissa)``.

    The default margin ``1e-12 * max(1, ||X||)`` keeps round-off on a
    marginal spectrum from reading as stable.
    """
    X = _square(X)
    a = spectral_abscissa(X)
    if margin is None:
        margin = HURWITZ_RTOL * max(1.0, float(np.linalg.norm(X, 2)))
    return a < -margin, a


def min_eig_hermitian(X) -> float:
    X = _square(X)
    try:
        return float(np.linalg.eigvalsh(hermitian_part(X))[0])
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericFailure(f"Hermitian eigenvalue iteration failed: {exc}") from exc


def max_eig_hermitian(X) -> float:
    X = _square(X)
    return float(np.linalg.eigvalsh(hermitian_part(X))[-1])


def solve_linear(A, B) -> np.ndarray:
    """Solve ``A X = B``; raises :class:`SingularMatrixError` when ``A`` is singular."""
    A = _square(A, "A")
    B = np.asarray(B, dtype=complex)
    vector = B.ndim == 1
    if vector:
        B = B[:, None]
    if B.shape[0] != A.shape[0]:
        raise InvalidDimensionError(f"shapes {A.shape} and {B.shape} do not conform")
    s = np.linalg.svd(A, compute_uv=False)
    cond = np.inf if s[-1] == 0 else s[0] / s[-1]
    if s[0] == 0 or s[-1] <= SINGULAR_RCOND * s[0]:
        raise SingularMatrixError("matrix is singular to working precision", cond)
    X = np.linalg.solve(A, B)
    return X[:, 0] if vector else X


def solve_lyapunov(A, D) -> np.ndarray:
    """Solve ``A X + X A^dagger + D = 0`` for Hurwitz ``A``.

    Uses the Kronecker form ``(I kron A + conj(A) kron I) vec(X) = -vec(D)``
    with column-major ``vec``.
    """
    A = _square(A, "A")
    D = _square(D, "D")
    if D.shape != A.shape:
        raise InvalidDimensionError(f"D shape {D.shape} does not match A shape {A.shape}")
    stable, a = is_hurwitz(A)
    if not stable:
        raise NoSolutionError(f"A is not Hurwitz (spectral abscissa {a:.3e})")
    k = A.shape[0]
    eye = np.eye(k)
    K = np.kron(eye, A) + np.kron(A.conj(), eye)
    x = np.linalg.solve(K, -D.reshape(-1, order="F"))
    X = x.reshape((k, k), order="F")
    return hermitian_part(X) if np.allclose(D, D.conj().T) else X


def riccati_residual(P, Ahat, R, Q) -> np.ndarray:
    P, Ahat, R, Q = (np.asarray(X, dtype=complex) for X in (P, Ahat, R, Q))
    return P @ Ahat + Ahat.conj().T @ P + P @ R @ P + Q


def solve_riccati(Ahat, R, Q, axis_tol: float = 1e-9) -> np.ndarray:
    """Stabilizing solution of ``P Ahat + Ahat^dagger P + P R P + Q = 0``.

    The graph ``[I; P]`` of the solution spans the stable invariant subspace
    of ``H = [[Ahat, R], [-Q, -Ahat^dagger]]``, so ``Ahat + R P`` is Hurwitz.
    """
    Ahat = _square(Ahat, "Ahat")
    R = hermitian_part(_square(R, "R"))
    Q = hermitian_part(_square(Q, "Q"))
    k = Ahat.shape[0]
    if R.shape != (k, k) or Q.shape != (k, k):
        raise InvalidDimensionError("Ahat, R and Q must share one square shape")
    H = np.block([[Ahat, R], [-Q, -Ahat.conj().T]])
    scale = max(1.0, np.linalg.norm(H, 2))
    ev = np.linalg.eigvals(H)
    closest = float(np.min(np.abs(ev.real)))
    if closest <= axis_tol * scale:
        raise RiccatiInfeasibleError(
            f"Hamiltonian matrix has an eigenvalue within {closest:.3e} of the imaginary axis")
    T, Z, sdim = scipy.linalg.schur(H, output="complex", sort="lhp")
    if sdim != k:
        raise RiccatiInfeasibleError(f"stable subspace has dimension {sdim}, expected {k}")
    U11 = Z[:k, :k]
    U21 = Z[k:, :k]
    s = np.linalg.svd(U11, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise NumericFailure(
            f"stable invariant subspace is not a graph (cond(U11) = {s[0] / max(s[-1], 1e-300):.3e})")
    P = np.linalg.solve(U11.T, U21.T).T
    P = hermitian_part(P)
    pn = np.linalg.norm(P, 2)
    defect = np.max(np.abs(riccati_residual(P, Ahat, R, Q)))
    bound = 1e-7 * max(1.0, np.linalg.norm(Ahat, 2) * pn + np.linalg.norm(R, 2) * pn ** 2
                       + np.linalg.norm(Q, 2))
    if not defect <= bound:
        raise NumericFailure(f"Riccati defect {defect:.3e} exceeds {bound:.3e} "
                             f"(cond(U11) = {s[0] / s[-1]:.3e})")
    return P
