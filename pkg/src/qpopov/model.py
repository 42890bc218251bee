"""Doubled-up matrix model of a linear quantum plant.

A doubled-up matrix has the block form ``[[X1, X2], [X2#, X1#]]`` where ``#``
is entrywise complex conjugation.  Matrices acting on ``x = [a; a#]`` (the
mode annihilation operators stacked on their adjoints) inherit this
structure, which is equivalent to ``Sigma X# Sigma = X`` for the block-swap
matrix ``Sigma``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import InvalidDimensionError, PlantValidationError

DEFAULT_TOL = 1e-10

STRATEGIES = ("extreme", "interior", "boundary")


@dataclass(frozen=True)
class StructureMatrices:
    J: np.ndarray
    Sigma: np.ndarray


def make_structure(k: int) -> StructureMatrices:
    """Return ``J = diag(I_k, -I_k)`` and ``Sigma = [[0, I_k], [I_k, 0]]``."""
    if int(k) != k or k < 1:
        raise InvalidDimensionError(f"structure size must be a positive integer, got {k!r}")
    k = int(k)
    eye = np.eye(k)
    zero = np.zeros((k, k))
    J = np.block([[eye, zero], [zero, -eye]]).astype(complex)
    Sigma = np.block([[zero, eye], [eye, zero]]).astype(complex)
    return StructureMatrices(J=J, Sigma=Sigma)


def swap(k: int) -> np.ndarray:
    return make_structure(k).Sigma


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    if X.ndim != 2:
        raise InvalidDimensionError(f"expected a matrix, got array of shape {X.shape}")
    return X


def doubled_residual(X) -> float:
    """Max-norm of ``Sigma X# Sigma - X``; zero for a doubled-up matrix."""
    X = _as_matrix(X)
    r, c = X.shape
    if r % 2 or c % 2:
        raise InvalidDimensionError(f"doubled-up matrices have even dimensions, got {X.shape}")
    # Sigma_{2k} X# Sigma_{2l} is a block rotation, so no products are needed.
    k, l = r // 2, c // 2
    Xc = X.conj()
    swapped = np.block([[Xc[k:, l:], Xc[k:, :l]], [Xc[:k, l:], Xc[:k, :l]]])
    return float(np.max(np.abs(swapped - X), initial=0.0))


def validate_doubled(X, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Check the doubled-up block symmetry of ``X``.

    Returns ``(valid, residual)`` where ``residual = max|Sigma X# Sigma - X|``.
    """
    res = doubled_residual(X)
    return res <= tol, res


def embed_blocks(X1, X2) -> np.ndarray:
    """Build ``[[X1, X2], [X2#, X1#]]`` from its upper half-blocks."""
    X1 = _as_matrix(X1)
    X2 = _as_matrix(X2)
    if X1.shape != X2.shape:
        raise InvalidDimensionError(f"block shapes differ: {X1.shape} vs {X2.shape}")
    return np.block([[X1, X2], [X2.conj(), X1.conj()]])


def split_blocks(X) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`embed_blocks` (upper half-blocks only)."""
    X = _as_matrix(X)
    k, l = X.shape[0] // 2, X.shape[1] // 2
    return X[:k, :l].copy(), X[:k, l:].copy()


def project_doubled(X) -> np.ndarray:
    """Nearest doubled-up matrix in the Frobenius sense: ``(X + Sigma X# Sigma)/2``."""
    X = _as_matrix(X)
    k, l = X.shape[0] // 2, X.shape[1] // 2
    Xc = X.conj()
    swapped = np.block([[Xc[k:, l:], Xc[k:, :l]], [Xc[:k, l:], Xc[:k, :l]]])
    return 0.5 * (X + swapped)


def _rel_tol(X, tol):
    return tol * max(1.0, float(np.max(np.abs(X), initial=0.0)))


@dataclass(frozen=True)
class PlantSpec:
    """Nominal linear quantum plant with a quadratic uncertainty channel.

    ``M`` (2n x 2n) is the nominal Hamiltonian matrix, ``Ntilde`` (c x 2n)
    stacks the coupling rows ``[N1 N2]``, ``E`` (2m x 2n) maps ``x`` to the
    uncertainty channel ``z = E x`` and ``gamma`` is the sector bound.
    """

    n: int
    M: np.ndarray
    Ntilde: np.ndarray
    E: np.ndarray
    gamma: float

    def __post_init__(self):
        M = _as_matrix(self.M)
        Nt = _as_matrix(self.Ntilde)
        E = _as_matrix(self.E)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "Ntilde", Nt)
        object.__setattr__(self, "E", E)
        object.__setattr__(self, "gamma", float(self.gamma))
        validate_plant(self)

    @property
    def c(self) -> int:
        return self.Ntilde.shape[0]

    @property
    def m(self) -> int:
        return self.E.shape[0] // 2

    @property
    def N(self) -> np.ndarray:
        """Doubled coupling matrix ``[[N1, N2], [N2#, N1#]]`` (2c x 2n)."""
        n = self.n
        return embed_blocks(self.Ntilde[:, :n], self.Ntilde[:, n:])

    @property
    def blocks(self) -> dict[str, np.ndarray]:
        n = self.n
        M1, M2 = split_blocks(self.M)
        E1, E2 = split_blocks(self.E)
        return {
            "M1": M1,
            "M2": M2,
            "Ntilde1": self.Ntilde[:, :n],
            "Ntilde2": self.Ntilde[:, n:],
            "E1": E1,
            "E2": E2,
        }

    def replace(self, **changes) -> "PlantSpec":
        fields = dict(n=self.n, M=self.M, Ntilde=self.Ntilde, E=self.E, gamma=self.gamma)
        fields.update(changes)
        return PlantSpec(**fields)


def validate_plant(plant: PlantSpec, tol: float = DEFAULT_TOL) -> None:
    n = plant.n
    if int(n) != n or n < 1:
        raise PlantValidationError("n", f"mode count must be a positive integer, got {n!r}")
    checks = [("M", plant.M, (2 * n, 2 * n)), ("Ntilde", plant.Ntilde, (None, 2 * n)),
              ("E", plant.E, (None, 2 * n))]
    for name, X, (rows, cols) in checks:
        if not np.all(np.isfinite(X)):
            raise PlantValidationError(name, "entries must be finite")
        if X.shape[1] != cols or (rows is not None and X.shape[0] != rows):
            want = f"{rows if rows else 'k'}x{cols}"
            raise PlantValidationError(name, f"expected shape {want}, got {X.shape[0]}x{X.shape[1]}")
    if plant.Ntilde.shape[0] < 1:
        raise PlantValidationError("Ntilde", "need at least one coupling channel")
    if plant.E.shape[0] < 2 or plant.E.shape[0] % 2:
        raise PlantValidationError("E", f"row count must be 2m with m >= 1, got {plant.E.shape[0]}")
    herm = float(np.max(np.abs(plant.M - plant.M.conj().T)))
    if herm > _rel_tol(plant.M, tol):
        raise PlantValidationError("M", f"not Hermitian (residual {herm:.3e})")
    ok, res = validate_doubled(plant.M, _rel_tol(plant.M, tol))
    if not ok:
        raise PlantValidationError("M", f"doubled-up symmetry broken (residual {res:.3e})")
    ok, res = validate_doubled(plant.E, _rel_tol(plant.E, tol))
    if not ok:
        raise PlantValidationError("E", f"doubled-up symmetry broken (residual {res:.3e})")
    if not np.isfinite(plant.gamma) or plant.gamma <= 0:
        raise PlantValidationError("gamma", f"sector bound must be positive, got {plant.gamma!r}")


# -- serialization ----------------------------------------------------------

def _parse_scalar(value, path):
    if isinstance(value, bool):
        raise PlantValidationError(path, "expected a [re, im] pair")
    if isinstance(value, (int, float)):
        return complex(value)
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(value[0], value[1])
    raise PlantValidationError(path, f"expected a [re, im] pair, got {value!r}")


def _parse_matrix(doc, key, shape):
    if key not in doc:
        raise PlantValidationError(key, "missing field")
    rows = doc[key]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise PlantValidationError(key, "expected a nested array of [re, im] pairs")
    out = np.array([[_parse_scalar(v, f"{key}[{i}][{j}]") for j, v in enumerate(row)]
                    for i, row in enumerate(rows)], dtype=complex)
    if out.ndim != 2 or (out.size == 0 and shape[0] != 0):
        raise PlantValidationError(key, "ragged or empty matrix")
    rows_want, cols_want = shape
    if (rows_want is not None and out.shape[0] != rows_want) or out.shape[1] != cols_want:
        raise PlantValidationError(key, f"expected {rows_want or 'k'}x{cols_want}, got {out.shape[0]}x{out.shape[1]}")
    if not np.all(np.isfinite(out)):
        raise PlantValidationError(key, "entries must be finite")
    return out


def plant_from_dict(doc: Mapping[str, Any], tol: float = DEFAULT_TOL) -> PlantSpec:
    if not isinstance(doc, Mapping):
        raise PlantValidationError("<root>", "expected a JSON object")
    n = doc.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise PlantValidationError("n", f"mode count must be a positive integer, got {n!r}")
    M1 = _parse_matrix(doc, "M1", (n, n))
    M2 = _parse_matrix(doc, "M2", (n, n))
    N1 = _parse_matrix(doc, "Ntilde1", (None, n))
    N2 = _parse_matrix(doc, "Ntilde2", (N1.shape[0], n))
    E1 = _parse_matrix(doc, "E1", (None, n))
    E2 = _parse_matrix(doc, "E2", (E1.shape[0], n))
    gamma = doc.get("gamma")
    if isinstance(gamma, bool) or not isinstance(gamma, (int, float)):
        raise PlantValidationError("gamma", f"expected a real number, got {gamma!r}")
    if not np.isfinite(gamma) or gamma <= 0:
        raise PlantValidationError("gamma", f"sector bound must be positive, got {gamma!r}")
    herm = float(np.max(np.abs(M1 - M1.conj().T)))
    if herm > _rel_tol(M1, tol):
        raise PlantValidationError("M1", f"must be Hermitian (residual {herm:.3e})")
    sym = float(np.max(np.abs(M2 - M2.T)))
    if sym > _rel_tol(M2, tol):
        raise PlantValidationError("M2", f"must be symmetric (residual {sym:.3e})")
    return PlantSpec(
        n=n,
        M=embed_blocks(M1, M2),
        Ntilde=np.hstack([N1, N2]),
        E=embed_blocks(E1, E2),
        gamma=float(gamma),
    )


def parse_plant(text: str) -> PlantSpec:
    """Parse a plant JSON document (see README for the schema)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlantValidationError("<root>", f"invalid JSON: {exc}") from exc
    return plant_from_dict(doc)


def load_plant(path) -> PlantSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_plant(fh.read())


def encode_matrix(X) -> list:
    X = _as_matrix(X)
    return [[[float(v.real), float(v.imag)] for v in row] for row in X]


def decode_matrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def plant_to_dict(plant: PlantSpec) -> dict:
    doc = {"n": plant.n}
    doc.update({key: encode_matrix(val) for key, val in plant.blocks.items()})
    doc["gamma"] = plant.gamma
    return doc


def dump_plant(plant: PlantSpec) -> str:
    return json.dumps(plant_to_dict(plant), indent=2)


# -- uncertainty class ------------------------------------------------------

def delta_bounds(delta) -> tuple[float, float]:
    """Extreme eigenvalues of the Hermitian part of ``delta``."""
    delta = _as_matrix(delta)
    w = np.linalg.eigvalsh(0.5 * (delta + delta.conj().T))
    return float(w[0]), float(w[-1])


def is_admissible(delta, gamma: float, tol: float = DEFAULT_TOL) -> bool:
    """True when ``delta`` is doubled-up Hermitian with ``0 <= delta <= (4/gamma) I``."""
    delta = _as_matrix(delta)
    if delta.shape[0] != delta.shape[1]:
        return False
    scale = max(1.0, 4.0 / gamma)
    if np.max(np.abs(delta - delta.conj().T)) > tol * scale:
        return False
    if doubled_residual(delta) > tol * scale:
        return False
    lo, hi = delta_bounds(delta)
    return lo >= -tol * scale and hi <= 4.0 / gamma + tol * scale


def random_doubled(rng: np.random.Generator, k: int, l: int | None = None, scale: float = 1.0) -> np.ndarray:
    l = k if l is None else l
    X1 = rng.standard_normal((k, l)) + 1j * rng.standard_normal((k, l))
    X2 = rng.standard_normal((k, l)) + 1j * rng.standard_normal((k, l))
    return scale * embed_blocks(X1, X2) / np.sqrt(2)


def random_doubled_hermitian(rng: np.random.Generator, k: int, scale: float = 1.0) -> np.ndarray:
    X = random_doubled(rng, k, k, scale)
    # Hermitian part of a doubled matrix is still doubled.
    return 0.5 * (X + X.conj().T)


def _spectral_map(G, fn):
    w, Q = np.linalg.eigh(G)
    out = (Q * fn(w)) @ Q.conj().T
    return project_doubled(0.5 * (out + out.conj().T))


def random_admissible_delta(m: int, gamma: float, seed: int, strategy: str = "interior") -> np.ndarray:
    """Draw an admissible uncertainty ``0 <= Delta <= (4/gamma) I`` (2m x 2m).

    ``extreme`` is the top of the bound, ``(4/gamma) I``.  ``boundary`` is a
    scaled orthogonal projection (eigenvalues in ``{0, 4/gamma}``) and
    ``interior`` has its spectrum spread over ``[0, 4/gamma]``.  Both are
    spectral functions of a random doubled Hermitian matrix, which keeps
    the doubled-up structure intact.
    """
    if int(m) != m or m < 1:
        raise InvalidDimensionError(f"channel count must be a positive integer, got {m!r}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    top = 4.0 / gamma
    if strategy == "extreme":
        return top * np.eye(2 * m, dtype=complex)
    rng = np.random.default_rng(seed)
    G = random_doubled_hermitian(rng, m)
    if strategy == "boundary":
        # eigenvalues of a doubled Hermitian matrix pair up as (v, Sigma v#),
        # so a sign threshold is structure-preserving; shift for variety.
        shift = rng.uniform(-1.0, 1.0) * np.max(np.abs(np.linalg.eigvalsh(G)))
        return top * _spectral_map(G - shift * np.eye(2 * m), lambda w: (w > 0).astype(float))
    spread = rng.uniform(0.5, 3.0)
    return top * _spectral_map(G, lambda w: 0.5 * (1.0 + np.tanh(spread * w)))
