"""Straightening quasiprojectors and semiclassical state counting.

A quasiprojector is a positive contraction whose idempotency defect
eps = ||a - a^2|| is small.  Once eps <= 3/16 the spectrum avoids the band
(1/4, 3/4), so thresholding the spectrum at 1/2 yields a genuine projection
within (1 - sqrt(1 - 4 eps)) / 2 of the original.  Applied across the grid
tail of an asymptotic family this produces nearby projection families, whose
ranks give the integer semiclassical state count of an event.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .asymptotics import AsmFamily, HbarGrid
from .errors import GapViolationError, NonConvergentError
from .measures import EventSet
from .operators import (
    DEFAULT_TOL,
    Tolerance,
    as_operator,
    is_positive,
    numerical_rank,
    op_norm,
    spectral_projector,
)

GAP_EPS = 3.0 / 16.0  # largest defect leaving (1/4, 3/4) free of spectrum


def straighten_bound(eps: float) -> float:
    """Distance bound (1 - sqrt(1 - 4 eps)) / 2 from a quasiprojector to its projection."""
    return (1.0 - np.sqrt(max(0.0, 1.0 - 4.0 * eps))) / 2.0


def straighten(a: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Replace a quasiprojector by the nearby spectral projection.

    Requires 0 <= a <= 1 within psd_tol and eps = ||a - a^2|| <= 3/16;
    raises GapViolationError when the defect is too large for the spectral
    gap, and DegenerateSpectrumError if an eigenvalue sits at the 1/2 cut.
    """
    arr = as_operator(a)
    if not is_positive(arr, tol):
        raise GapViolationError("input is not a positive contraction")
    w = np.linalg.eigvalsh(arr)
    if w[-1] > 1.0 + tol.psd_tol:
        raise GapViolationError("input exceeds the identity")
    eps = op_norm(arr - arr @ arr)
    if eps > GAP_EPS:
        raise GapViolationError(
            f"idempotency defect {eps:.6g} > 3/16; spectral gap not guaranteed"
        )
    return spectral_projector(arr, 0.5, tol)


@dataclass(frozen=True)
class StraightenedFamily:
    """Projections straightened from A(event) across the grid tail."""

    source: AsmFamily
    event: EventSet
    hbars: tuple[float, ...]
    projections: tuple[np.ndarray, ...]
    errors: tuple[float, ...]  # ||A_h(event) - E_h(event)|| per tail hbar

    def projection_at(self, hbar: float) -> np.ndarray:
        for h, p in zip(self.hbars, self.projections):
            if h == hbar:
                return p
        raise NonConvergentError(f"no straightened projection at hbar={hbar}")


def straighten_family(
    family: AsmFamily,
    event: EventSet,
    grid: HbarGrid,
    tol: Tolerance = DEFAULT_TOL,
) -> StraightenedFamily:
    """Straighten A(event) at every grid-tail hbar.

    Propagates GapViolationError with the offending hbar when the defect has
    not yet fallen below 3/16 somewhere on the tail.
    """
    hbars, projections, errors = [], [], []
    for h in grid.tail:
        a = family.at(h).apply(event)
        try:
            e = straighten(a, tol)
        except GapViolationError as exc:
            raise GapViolationError(f"at hbar={h}: {exc}") from exc
        hbars.append(h)
        projections.append(e)
        errors.append(op_norm(a - e))
    return StraightenedFamily(family, event, tuple(hbars), tuple(projections), tuple(errors))


def trace_defect(family: AsmFamily, event: EventSet, hbar: float) -> float:
    """trace(A(event) - A(event)^2), real within 1e-10.

    Nonnegative whenever 0 <= A(event) <= 1; vanishes exactly on projections.
    """
    a = family.at(hbar).apply(event)
    val = complex(np.trace(a - a @ a))
    if abs(val.imag) > 1e-10:
        raise NonConvergentError(f"trace defect not real: imag={val.imag:.3e}")
    return float(val.real)


def count_states(
    family: AsmFamily,
    event: EventSet,
    grid: HbarGrid,
    tol: Tolerance = DEFAULT_TOL,
) -> int:
    """Semiclassical state count: the rank of the straightened projection.

    The rank must be constant across the grid tail (the rank of a projection
    is a continuous invariant); a varying rank means the grid is too coarse
    and raises NonConvergentError.
    """
    straightened = straighten_family(family, event, grid, tol)
    ranks = [numerical_rank(p, tol) for p in straightened.projections]
    if len(set(ranks)) != 1:
        raise NonConvergentError(
            f"straightened rank varies across the tail: {ranks} (grid too coarse)"
        )
    return ranks[0]
