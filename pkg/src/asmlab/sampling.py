"""Seeded random operators, measures, and kernels for sweeps.

Every generator takes a numpy Generator so sweeps are reproducible from a
single integer seed.
"""

from __future__ import annotations

import numpy as np

from .measures import Atom, DensityOperator, Povm, Pvm, SampleSpace
from .operators import DEFAULT_TOL, Tolerance, dagger, fun_calc
from .smearing import ConfidenceKernel
from .spin import BallPoint


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (g + dagger(g)) / 2.0


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_density(rng: np.random.Generator, dim: int) -> DensityOperator:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ dagger(g)
    return DensityOperator(rho / np.trace(rho).real)


def random_povm(
    rng: np.random.Generator, dim: int, n_atoms: int, tol: Tolerance = DEFAULT_TOL
) -> Povm:
    """Normalized POVM: Gram blocks sandwiched by the inverse square root of their sum."""
    grams = []
    for _ in range(n_atoms):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        grams.append(g @ dagger(g))
    total = np.zeros((dim, dim), dtype=complex)
    for g in grams:
        total = total + g
    inv_root = fun_calc(total, lambda w: 1.0 / np.sqrt(w.real), tol)
    effects = tuple(inv_root @ g @ inv_root for g in grams)
    space = SampleSpace.from_labels(tuple(str(i) for i in range(n_atoms)))
    return Povm(space, effects, tol)


def random_pvm(
    rng: np.random.Generator, dim: int, n_atoms: int, tol: Tolerance = DEFAULT_TOL
) -> Pvm:
    """Projective measure from a random unitary's columns split into blocks."""
    if n_atoms > dim:
        raise ValueError("a PVM needs at least one dimension per atom")
    u = random_unitary(rng, dim)
    cuts = sorted(rng.choice(np.arange(1, dim), size=n_atoms - 1, replace=False)) if n_atoms > 1 else []
    bounds = [0, *cuts, dim]
    effects = []
    for lo, hi in zip(bounds, bounds[1:]):
        cols = u[:, lo:hi]
        effects.append(cols @ dagger(cols))
    space = SampleSpace.from_labels(tuple(str(i) for i in range(n_atoms)))
    return Pvm(space, tuple(effects), tol)


def random_ball_point(rng: np.random.Generator) -> BallPoint:
    """Uniform point of the closed unit ball."""
    v = rng.standard_normal(3)
    v /= np.linalg.norm(v)
    radius = rng.uniform() ** (1.0 / 3.0)
    return BallPoint(tuple(radius * v))


def random_kernel(
    rng: np.random.Generator, space_in: SampleSpace, space_out: SampleSpace
) -> ConfidenceKernel:
    """Kernel interpolating from a random sharp readout at hbar=0 to random noise.

    p_hbar = (1 - hbar) D + hbar R with D deterministic and R row-stochastic,
    so the kernel defect vanishes linearly as hbar -> 0.
    """
    n1, n2 = space_in.n_atoms, space_out.n_atoms
    det = np.zeros((n1, n2))
    det[np.arange(n1), rng.integers(0, n2, size=n1)] = 1.0
    noise = rng.uniform(size=(n1, n2))
    noise /= noise.sum(axis=1, keepdims=True)

    def gen(hbar: float) -> np.ndarray:
        return (1.0 - hbar) * det + hbar * noise

    return ConfidenceKernel(space_in, space_out, gen, "random")


def random_quasiprojector(rng: np.random.Generator, dim: int, margin: float = 0.01) -> np.ndarray:
    """Hermitian contraction with spectrum outside (1/4, 3/4), so eps <= 3/16."""
    u = random_unitary(rng, dim)
    low = rng.uniform(0.0, 0.25 - margin, size=dim)
    high = rng.uniform(0.75 + margin, 1.0, size=dim)
    pick = rng.uniform(size=dim) < 0.5
    w = np.where(pick, low, high)
    return (u * w) @ dagger(u)
