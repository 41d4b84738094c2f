"""Build asymptotic families from a fixed PVM through confidence kernels.

A confidence kernel models readout noise: for each source outcome ``omega``
and each hbar it gives a probability row over target outcomes.  Smearing a PVM
through such a kernel produces an hbar-family whose projectivity defect is
dominated by the kernel's own scalar defect, so sharp kernels in the limit
yield asymptotically projective families.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .asymptotics import AsmFamily, proj_defect
from .errors import InvalidInputError
from .measures import EventSet, Povm, Pvm, SampleSpace
from .operators import DEFAULT_TOL, Tolerance

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ConfidenceKernel:
    """hbar-indexed row-stochastic table p[omega][delta] between two spaces.

    Rows are probability measures over the target atoms for every hbar
    (condition a).  Continuity in hbar (condition b) is inherited from the
    closed-form builders and only spot-checked by finite differences; the
    vanishing of the kernel defect (condition c) is what the defect
    functionals sample.
    """

    source_space: SampleSpace
    target_space: SampleSpace
    generator: Callable[[float], np.ndarray]
    label: str = "kernel"

    def table(self, hbar: float) -> np.ndarray:
        if not (0.0 < hbar <= 1.0):
            raise InvalidInputError(f"hbar must lie in (0, 1], got {hbar}")
        p = np.asarray(self.generator(hbar), dtype=float)
        n1, n2 = self.source_space.n_atoms, self.target_space.n_atoms
        if p.shape != (n1, n2):
            raise InvalidInputError(f"kernel table must have shape ({n1}, {n2})")
        if np.any(p < -ROW_SUM_TOL) or np.any(p > 1.0 + ROW_SUM_TOL):
            raise InvalidInputError("kernel entries must lie in [0, 1]")
        if np.any(np.abs(p.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            raise InvalidInputError("kernel rows must sum to one")
        return p

    def event_prob(self, event: EventSet, hbar: float) -> np.ndarray:
        """Vector over source atoms of p(event, omega)."""
        if event.space != self.target_space:
            raise InvalidInputError("event must live on the kernel's target space")
        p = self.table(hbar)
        idx = list(event.sorted_members)
        return p[:, idx].sum(axis=1) if idx else np.zeros(p.shape[0])


def kernel_defect(kernel: ConfidenceKernel, e1: EventSet, e2: EventSet, hbar: float) -> float:
    """Sup over source outcomes of |p(e1,.) p(e2,.) - p(e1 ∩ e2,.)|."""
    p1 = kernel.event_prob(e1, hbar)
    p2 = kernel.event_prob(e2, hbar)
    p12 = kernel.event_prob(e1.intersection(e2), hbar)
    return float(np.max(np.abs(p1 * p2 - p12)))


def smear(pvm: Pvm, kernel: ConfidenceKernel, label: str | None = None) -> AsmFamily:
    """Family hbar -> sum_omega p_hbar({delta}, omega) E({omega}) per target atom.

    The source measure must be projective: the defect bound transported to the
    smeared family rests on multiplicativity of PVM integration.  A normalized
    source yields a normalized family.
    """
    if not isinstance(pvm, Pvm):
        raise InvalidInputError("smearing requires a PVM source")
    if kernel.source_space != pvm.space:
        raise InvalidInputError("kernel source space must match the PVM's space")
    if not pvm.normalized:
        raise InvalidInputError("smearing requires a normalized PVM")

    target = kernel.target_space

    def generate(hbar: float) -> Povm:
        p = kernel.table(hbar)
        effects = []
        for delta in range(target.n_atoms):
            b = np.zeros((pvm.dim, pvm.dim), dtype=complex)
            for omega in range(pvm.space.n_atoms):
                b = b + p[omega, delta] * pvm.effects[omega]
            effects.append(b)
        return Povm(target, tuple(effects), pvm.tol)

    return AsmFamily(target, generate, None, label or f"smear[{kernel.label}]")


def smear_defect_bound_residual(
    pvm: Pvm,
    kernel: ConfidenceKernel,
    e1: EventSet,
    e2: EventSet,
    hbar: float,
) -> float:
    """Excess of the smeared family's projectivity defect over the kernel defect.

    The transported bound says the operator defect never exceeds the scalar
    kernel defect; the residual is therefore expected to be ~0 up to rounding.
    """
    family = smear(pvm, kernel)
    return max(0.0, proj_defect(family, e1, e2, hbar) - kernel_defect(kernel, e1, e2, hbar))


# --- kernel builders (addressable from CLI configs by name) ---------------


def stochastic2(space: SampleSpace | None = None) -> ConfidenceKernel:
    """Symmetric binary readout-error kernel with flip probability hbar/2.

    Table rows are (1 - hbar/2, hbar/2) / (hbar/2, 1 - hbar/2); the kernel
    defect is (hbar/2)(1 - hbar/2), vanishing linearly.
    """
    if space is None:
        space = SampleSpace.from_labels(("+1/2", "-1/2"))
    if space.n_atoms != 2:
        raise InvalidInputError("stochastic2 needs a two-atom space")

    def gen(hbar: float) -> np.ndarray:
        flip = hbar / 2.0
        return np.array([[1.0 - flip, flip], [flip, 1.0 - flip]])

    return ConfidenceKernel(space, space, gen, "stochastic2")


def gaussian_grid(space: SampleSpace, sigma_scale: float = 1.0) -> ConfidenceKernel:
    """Gaussian blur between the coordinates of an embedded space.

    Row weights are cell_weight * exp(-d^2 / (2 sigma^2)) with sigma =
    sigma_scale * hbar, renormalized per row; as hbar -> 0 rows concentrate on
    the nearest atom, so the kernel defect vanishes.
    """
    if any(a.coordinate is None for a in space.atoms):
        raise InvalidInputError("gaussian_grid needs coordinates on every atom")
    if not sigma_scale > 0:
        raise InvalidInputError("sigma_scale must be positive")
    coords = np.array([a.coordinate for a in space.atoms], dtype=float)
    weights = np.array([a.weight if a.weight is not None else 1.0 for a in space.atoms])
    d2 = ((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2)

    def gen(hbar: float) -> np.ndarray:
        sigma = sigma_scale * hbar
        table = weights[None, :] * np.exp(-d2 / (2.0 * sigma * sigma))
        return table / table.sum(axis=1, keepdims=True)

    return ConfidenceKernel(space, space, gen, "gaussian_grid")


def deterministic_kernel(space_in: SampleSpace, space_out: SampleSpace, assignment: dict[int, int]) -> ConfidenceKernel:
    """Sharp kernel: every source atom reads out as one fixed target atom."""
    n1, n2 = space_in.n_atoms, space_out.n_atoms
    if set(assignment) != set(range(n1)) or any(not 0 <= v < n2 for v in assignment.values()):
        raise InvalidInputError("assignment must map every source atom to a target atom")
    table = np.zeros((n1, n2))
    for omega, delta in assignment.items():
        table[omega, delta] = 1.0

    return ConfidenceKernel(space_in, space_out, lambda hbar: table, "deterministic")

KERNEL_BUILDERS = {
    "stochastic2": stochastic2,
    "gaussian_grid": gaussian_grid,
}
