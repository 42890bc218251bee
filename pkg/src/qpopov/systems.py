"""Reference plants: the optical parametric amplifier and random doubled-up plants."""

from __future__ import annotations

import math

import numpy as np

from .model import PlantSpec, embed_blocks, random_doubled, random_doubled_hermitian
from .numeric import spectral_abscissa
from .plant import build_state_space

# Perturbation that restores the amplifier's squeezing Hamiltonian
# 1/2 i((a*)^2 - a^2) on top of the nominal M = -I.
OPA_DELTA = np.array([[1, 1j], [-1j, 1]], dtype=complex)


def opa_plant(kappa: float = 2.1, gamma: float = 2.0) -> PlantSpec:
    """Single-mode amplifier with M1 = -1, N1 = sqrt(kappa), E1 = 1."""
    return PlantSpec(
        n=1,
        M=embed_blocks([[-1.0]], [[0.0]]),
        Ntilde=np.array([[math.sqrt(kappa), 0.0]], dtype=complex),
        E=embed_blocks([[1.0]], [[0.0]]),
        gamma=gamma,
    )


def random_plant(rng: np.random.Generator, n: int, m: int, c: int, gamma: float = 1.0,
                 annihilation_only: bool = False, min_decay: float = 0.05,
                 max_tries: int = 200) -> PlantSpec:
    """Random plant with Hurwitz ``A`` (abscissa below ``-min_decay``).

    ``annihilation_only`` zeros ``M2``, ``N2`` and ``E2``.
    """
    for _ in range(max_tries):
        H = random_doubled_hermitian(rng, n)
        # squeezing terms are kept small so parametric gain rarely beats the loss
        M = embed_blocks(H[:n, :n], H[:n, n:] * rng.uniform(0.0, 0.3))
        N1 = (rng.standard_normal((c, n)) + 1j * rng.standard_normal((c, n))) * rng.uniform(0.7, 2.0)
        N2 = (rng.standard_normal((c, n)) + 1j * rng.standard_normal((c, n))) * rng.uniform(0.0, 0.3)
        E = random_doubled(rng, m, n, scale=rng.uniform(0.3, 1.5))
        if annihilation_only:
            M = embed_blocks(M[:n, :n], np.zeros((n, n)))
            N2 = np.zeros_like(N2)
            E = embed_blocks(E[:m, :n], np.zeros((m, n)))
        plant = PlantSpec(n=n, M=M, Ntilde=np.hstack([N1, N2]), E=E, gamma=gamma)
        if spectral_abscissa(build_state_space(plant).A) < -min_decay:
            return plant
    raise RuntimeError("could not draw a Hurwitz plant; relax min_decay")
