"""hbar-indexed families of POVMs and their defect functionals.

A family maps each hbar in (0, 1] to a POVM on a fixed finite sample space.
The limits appearing in the underlying theory cannot be evaluated, only
sampled: "hbar -> 0" is operationalized as the value at the smallest grid
point together with the trend over the grid tail.  Defect evaluations at
distinct hbar are independent pure computations; aggregation order is always
deterministic (grid-major, subject-minor).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidInputError
from .measures import EventSet, Povm, SampleSpace, _coefficients, indicator
from .operators import DEFAULT_TOL, Tolerance, op_norm


@dataclass(frozen=True)
class HbarGrid:
    """Strictly decreasing sample of (0, 1]; the last tail_len points form the limit tail."""

    values: tuple[float, ...]
    tail_len: int = 2

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise InvalidInputError("grid must be nonempty")
        if any(not (0.0 < v <= 1.0) for v in vals):
            raise InvalidInputError("grid values must lie in (0, 1]")
        if any(b >= a for a, b in zip(vals, vals[1:])):
            raise InvalidInputError("grid values must be strictly decreasing")
        if not (2 <= self.tail_len <= len(vals)):
            raise InvalidInputError("tail_len must satisfy 2 <= tail_len <= len(values)")

    @staticmethod
    def geometric(start: float = 1.0, ratio: float = 0.5, count: int = 8, tail_len: int = 2) -> HbarGrid:
        if not (0 < ratio < 1):
            raise InvalidInputError("geometric grid needs 0 < ratio < 1")
        return HbarGrid(tuple(start * ratio**k for k in range(count)), tail_len)

    @property
    def tail(self) -> tuple[float, ...]:
        return self.values[-self.tail_len :]

    @property
    def smallest(self) -> float:
        return self.values[-1]


def _check_hbar(hbar: float) -> float:
    if not (0.0 < hbar <= 1.0):
        raise InvalidInputError(f"hbar must lie in (0, 1], got {hbar}")
    return float(hbar)


@dataclass(frozen=True)
class AsmFamily:
    """Generator hbar -> Povm on a fixed space, plus the designated carrier events.

    ``carrier=None`` means the full power set (every event qualifies), which is
    the natural reading on a finite space; an explicit tuple restricts the
    events on which projectivity defects are required to vanish.  Generators
    are closed-form callables; use :meth:`from_table` for values tabulated on a
    grid (no interpolation is ever invented).
    """

    space: SampleSpace
    generator: Callable[[float], Povm]
    carrier: tuple[EventSet, ...] | None = None
    label: str = "family"

    def at(self, hbar: float) -> Povm:
        povm = self.generator(_check_hbar(hbar))
        if povm.space != self.space:
            raise InvalidInputError("generator returned a POVM on the wrong space")
        return povm

    def in_carrier(self, event: EventSet) -> bool:
        if self.carrier is None:
            return True
        return any(event.members == c.members for c in self.carrier)

    def validate(self, grid: HbarGrid, tol: Tolerance = DEFAULT_TOL) -> None:
        """Check the family on a grid: valid POVMs everywhere, mild bound on the tail.

        The mild bound sup ||A(X)|| <= 1 + psd_tol is enforced on the grid tail
        only; individual members at large hbar may exceed it, which is weaker
        than requiring normalization on the whole grid.
        """
        for h in grid.values:
            self.at(h)  # Povm construction re-validates the invariants
        for h in grid.tail:
            total_norm = op_norm(self.at(h).total())
            if total_norm > 1.0 + tol.psd_tol:
                raise InvalidInputError(
                    f"||A(X)|| = {total_norm:.6g} exceeds 1 + psd_tol at tail hbar={h}"
                )

    def is_normalized_on(self, grid: HbarGrid) -> bool:
        return all(self.at(h).normalized for h in grid.values)

    @staticmethod
    def from_table(
        space: SampleSpace,
        table: Mapping[float, Povm],
        carrier: tuple[EventSet, ...] | None = None,
        label: str = "tabulated",
    ) -> AsmFamily:
        frozen = dict(table)

        def lookup(hbar: float) -> Povm:
            if hbar not in frozen:
                raise InvalidInputError(
                    f"tabulated family has no entry at hbar={hbar} (no interpolation)"
                )
            return frozen[hbar]

        return AsmFamily(space, lookup, carrier, label)


def constant_family(povm: Povm, label: str = "constant") -> AsmFamily:
    """The constant family of a fixed POVM (a *-homomorphism when projective)."""
    return AsmFamily(povm.space, lambda hbar: povm, None, label)


# --- defect functionals ---------------------------------------------------


def proj_defect(family: AsmFamily, e1: EventSet, e2: EventSet, hbar: float) -> float:
    """Projectivity defect ||A(e1 ∩ e2) - A(e1) A(e2)|| at one hbar."""
    _check_hbar(hbar)
    for e in (e1, e2):
        if not family.in_carrier(e):
            raise InvalidInputError(f"event {e.describe()} is not in the carrier")
    povm = family.at(hbar)
    inter = povm.apply(e1.intersection(e2))
    return op_norm(inter - povm.apply(e1) @ povm.apply(e2))


def mult_defect(family: AsmFamily, f, g, hbar: float) -> float:
    """Multiplicativity defect ||Q(fg) - Q(f) Q(g)|| of the integration map."""
    _check_hbar(hbar)
    povm = family.at(hbar)
    cf = _coefficients(family.space, f)
    cg = _coefficients(family.space, g)
    lhs = povm.integrate(cf * cg)
    return op_norm(lhs - povm.integrate(cf) @ povm.integrate(cg))


def equiv_defect(family: AsmFamily, other: AsmFamily, event: EventSet, hbar: float) -> float:
    """Equivalence defect ||A(e) - B(e)|| between two families on one space."""
    _check_hbar(hbar)
    if family.space != other.space:
        raise InvalidInputError("families live on different sample spaces")
    return op_norm(family.at(hbar).apply(event) - other.at(hbar).apply(event))


@dataclass(frozen=True)
class InjectivityProfile:
    minima: tuple[tuple[EventSet, float], ...]
    injective: bool

    def minimum(self, event: EventSet) -> float:
        for e, v in self.minima:
            if e.members == event.members:
                return v
        raise InvalidInputError("event not part of this profile")


def injectivity_profile(
    family: AsmFamily,
    events: Sequence[EventSet],
    grid: HbarGrid,
    tol: Tolerance = DEFAULT_TOL,
) -> InjectivityProfile:
    """Tail minima of ||A(e)|| per event; injective iff all exceed rank_tol.

    The minimum over the grid tail is the finite proxy for the liminf that
    defines injectivity of the family.
    """
    if not events:
        raise InvalidInputError("need at least one event")
    minima = []
    for e in events:
        if len(e) == 0:
            raise InvalidInputError("injectivity profile is over nonempty events")
        m = min(op_norm(family.at(h).apply(e)) for h in grid.tail)
        minima.append((e, float(m)))
    injective = all(v > tol.rank_tol for _, v in minima)
    return InjectivityProfile(tuple(minima), injective)


@dataclass(frozen=True)
class NormRecovery:
    residual: float
    sup: float
    tail: tuple[tuple[float, float], ...]  # (hbar, ||Q_hbar(f)||) over the tail

    @property
    def trend_decreasing(self) -> bool:
        resids = [abs(self.sup - v) for _, v in self.tail]
        return all(b <= a + 1e-12 for a, b in zip(resids, resids[1:]))


def norm_recovery_residual(family: AsmFamily, f, grid: HbarGrid) -> NormRecovery:
    """| ||f||_inf - ||Q_hbar_min(f)|| | plus the norm trend over the tail."""
    coeffs = _coefficients(family.space, f)
    sup = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    tail = tuple(
        (h, float(op_norm(family.at(h).integrate(coeffs)))) for h in grid.tail
    )
    residual = abs(sup - tail[-1][1])
    return NormRecovery(residual=residual, sup=sup, tail=tail)


def continuity_profile(family: AsmFamily, event: EventSet, grid: HbarGrid) -> float:
    """Max finite-difference ||A_h(e) - A_h'(e)|| over adjacent grid pairs.

    Reported, never asserted: the theory requires continuity in hbar but
    provides no modulus.
    """
    diffs = [
        op_norm(family.at(a).apply(event) - family.at(b).apply(event))
        for a, b in zip(grid.values, grid.values[1:])
    ]
    return float(max(diffs)) if diffs else 0.0


# --- defect reports -------------------------------------------------------

KIND_ORDER = ("proj", "mult", "equiv")


@dataclass(frozen=True)
class DefectRow:
    hbar: float
    kind: str
    subject: str
    value: float

    def __post_init__(self) -> None:
        if not (self.value >= 0.0 and math.isfinite(self.value)):
            raise InvalidInputError("defect values must be nonnegative and finite")


@dataclass(frozen=True)
class DefectReport:
    """Table of (hbar, kind, subject, value) rows in deterministic order."""

    rows: tuple[DefectRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["hbar", "kind", "subject", "value"])
        for r in self.rows:
            writer.writerow([f"{r.hbar:.17g}", r.kind, r.subject, f"{r.value:.17g}"])
        return buf.getvalue()

    def to_json_obj(self) -> list[dict]:
        return [
            {"hbar": r.hbar, "kind": r.kind, "subject": r.subject, "value": r.value}
            for r in self.rows
        ]

    @staticmethod
    def from_json_obj(obj: Sequence[Mapping]) -> DefectReport:
        return DefectReport(
            tuple(
                DefectRow(float(r["hbar"]), str(r["kind"]), str(r["subject"]), float(r["value"]))
                for r in obj
            )
        )

    def values_for(self, kind: str, subject: str) -> list[tuple[float, float]]:
        return [(r.hbar, r.value) for r in self.rows if r.kind == kind and r.subject == subject]


def defect_report(
    family: AsmFamily,
    grid: HbarGrid,
    set_pairs: Sequence[tuple[str, EventSet, EventSet]] = (),
    fn_pairs: Sequence[tuple[str, object, object]] = (),
    relatives: Sequence[tuple[str, AsmFamily, EventSet]] = (),
) -> DefectReport:
    """Evaluate proj/mult/equiv defects over a grid.

    Row order is grid-major, then kind in (proj, mult, equiv) order, then
    subjects in input order, so reports are reproducible run to run.
    """
    rows: list[DefectRow] = []
    for h in grid.values:
        for subject, e1, e2 in set_pairs:
            rows.append(DefectRow(h, "proj", subject, proj_defect(family, e1, e2, h)))
        for subject, f, g in fn_pairs:
            rows.append(DefectRow(h, "mult", subject, mult_defect(family, f, g, h)))
        for subject, other, e in relatives:
            rows.append(DefectRow(h, "equiv", subject, equiv_defect(family, other, e, h)))
    return DefectReport(tuple(rows))
