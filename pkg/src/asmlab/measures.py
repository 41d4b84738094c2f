"""Atomic POVMs and PVMs on finite sample spaces.

Measures here are atomic: the event algebra is the full power set of a finite
atom list, so sigma-additivity collapses to finite additivity and every
measure-theoretic operation becomes exact matrix arithmetic.  Continuous
outcome spaces enter only through atom coordinates (a discretization) or
through closed-form symbols elsewhere in the package.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidInputError
from .operators import (
    DEFAULT_TOL,
    Tolerance,
    as_operator,
    dagger,
    fun_calc,
    hermitian_eig,
    is_hermitian,
    is_positive,
    op_norm,
)

PVM_ORTHO_TOL = 1e-9  # projectivity / mutual-orthogonality budget for PVMs


@dataclass(frozen=True)
class Atom:
    """One outcome: a label, an optional point in R^d, an optional cell weight."""

    label: str
    coordinate: tuple[float, ...] | None = None
    weight: float | None = None

    def __post_init__(self) -> None:
        if self.weight is not None and not self.weight > 0:
            raise InvalidInputError(f"atom {self.label!r}: cell weight must be > 0")
        if self.coordinate is not None:
            object.__setattr__(self, "coordinate", tuple(float(c) for c in self.coordinate))


@dataclass(frozen=True)
class SampleSpace:
    """Finite outcome space with optional geometric embedding."""

    atoms: tuple[Atom, ...]
    dim_d: int | None = None

    def __post_init__(self) -> None:
        if len(self.atoms) == 0:
            raise InvalidInputError("sample space needs at least one atom")
        labels = [a.label for a in self.atoms]
        if len(set(labels)) != len(labels):
            raise InvalidInputError("atom labels must be unique")
        if self.dim_d is not None:
            for a in self.atoms:
                if a.coordinate is not None and len(a.coordinate) != self.dim_d:
                    raise InvalidInputError(
                        f"atom {a.label!r} coordinate does not match dim_d={self.dim_d}"
                    )

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    def index_of(self, label: str) -> int:
        for i, a in enumerate(self.atoms):
            if a.label == label:
                return i
        raise InvalidInputError(f"no atom labelled {label!r}")

    def event(self, members: Iterable[int | str]) -> EventSet:
        idx = frozenset(
            m if isinstance(m, int) else self.index_of(m) for m in members
        )
        return EventSet(self, idx)

    def full_event(self) -> EventSet:
        return EventSet(self, frozenset(range(self.n_atoms)))

    def empty_event(self) -> EventSet:
        return EventSet(self, frozenset())

    @staticmethod
    def from_labels(labels: Sequence[str]) -> SampleSpace:
        return SampleSpace(tuple(Atom(lbl) for lbl in labels))

    @staticmethod
    def from_points(points: Sequence[Sequence[float]], weights: Sequence[float] | None = None) -> SampleSpace:
        """Embedded space with one atom per point, labelled by index."""
        atoms = []
        for i, p in enumerate(points):
            w = None if weights is None else float(weights[i])
            atoms.append(Atom(str(i), tuple(float(c) for c in p), w))
        dim_d = len(atoms[0].coordinate) if atoms and atoms[0].coordinate else None
        return SampleSpace(tuple(atoms), dim_d)


@dataclass(frozen=True)
class EventSet:
    """A subset of atoms of a sample space."""

    space: SampleSpace
    members: frozenset[int]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", frozenset(int(i) for i in self.members))
        if any(i < 0 or i >= self.space.n_atoms for i in self.members):
            raise InvalidInputError("event member index out of range")

    def _require_same_space(self, other: EventSet) -> None:
        if self.space != other.space:
            raise InvalidInputError("events live on different sample spaces")

    def union(self, other: EventSet) -> EventSet:
        self._require_same_space(other)
        return EventSet(self.space, self.members | other.members)

    def intersection(self, other: EventSet) -> EventSet:
        self._require_same_space(other)
        return EventSet(self.space, self.members & other.members)

    def complement(self) -> EventSet:
        return EventSet(self.space, frozenset(range(self.space.n_atoms)) - self.members)

    def is_disjoint(self, other: EventSet) -> bool:
        self._require_same_space(other)
        return not (self.members & other.members)

    @property
    def sorted_members(self) -> tuple[int, ...]:
        return tuple(sorted(self.members))

    def describe(self) -> str:
        return "{" + ",".join(self.space.atoms[i].label for i in self.sorted_members) + "}"

    def carrier_eligible(self) -> bool:
        """True iff every member atom carries a coordinate (embedded discretizations)."""
        return all(self.space.atoms[i].coordinate is not None for i in self.members)

    def __len__(self) -> int:
        return len(self.members)


def _coefficients(space: SampleSpace, f) -> np.ndarray:
    """Evaluate an atom function (or accept a per-atom value sequence)."""
    if callable(f):
        vals = [f(a) for a in space.atoms]
    else:
        vals = list(f)
        if len(vals) != space.n_atoms:
            raise InvalidInputError(
                f"need {space.n_atoms} per-atom values, got {len(vals)}"
            )
    return np.asarray(vals, dtype=complex)


def indicator(event: EventSet) -> np.ndarray:
    """Per-atom 0/1 coefficient vector of an event."""
    c = np.zeros(event.space.n_atoms, dtype=complex)
    for i in event.members:
        c[i] = 1.0
    return c


@dataclass(frozen=True)
class Povm:
    """Positive-operator assignment, one effect per atom.

    Invariants (checked on construction): every effect is positive within
    psd_tol, and the total sum is dominated by (1 + psd_tol) * I.  The
    ``normalized`` property tells whether the total is the identity within
    psd_tol.
    """

    space: SampleSpace
    effects: tuple[np.ndarray, ...]
    tol: Tolerance = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self) -> None:
        if len(self.effects) != self.space.n_atoms:
            raise InvalidInputError("need exactly one effect per atom")
        frozen = []
        dim = None
        for i, e in enumerate(self.effects):
            arr = as_operator(e).copy()
            if dim is None:
                dim = arr.shape[0]
            elif arr.shape[0] != dim:
                raise InvalidInputError("all effects must share one dimension")
            if not is_positive(arr, self.tol):
                raise InvalidInputError(
                    f"effect {self.space.atoms[i].label!r} is not positive within psd_tol"
                )
            arr.setflags(write=False)
            frozen.append(arr)
        object.__setattr__(self, "effects", tuple(frozen))
        top = float(np.max(np.linalg.eigvalsh(self.total())))
        if top > 1.0 + self.tol.psd_tol:
            raise InvalidInputError(
                f"total effect exceeds identity: max eigenvalue {top:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def total(self) -> np.ndarray:
        """Sum of all effects, in atom order."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for e in self.effects:
            out = out + e
        return out

    @property
    def normalized(self) -> bool:
        return op_norm(self.total() - np.eye(self.dim)) <= self.tol.psd_tol

    def apply(self, event: EventSet) -> np.ndarray:
        """Operator assigned to an event: the effect sum over its atoms.

        Summation runs in ascending atom order so that additivity over
        disjoint events holds exactly.
        """
        if event.space != self.space:
            raise InvalidInputError("event does not belong to this measure's space")
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i in event.sorted_members:
            out = out + self.effects[i]
        return out

    def integrate(self, f) -> np.ndarray:
        """Operator integral of an atom function against this measure.

        ``f`` is a callable on atoms or a sequence of per-atom values.  Linear
        in f, positive for nonnegative f, and reproduces ``apply`` on
        indicator coefficients.
        """
        coeffs = _coefficients(self.space, f)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, e in zip(coeffs, self.effects):
            out = out + c * e
        return out


class Pvm(Povm):
    """Projection-valued measure: mutually orthogonal projection effects."""

    def __post_init__(self) -> None:
        super().__post_init__()
        for i, ei in enumerate(self.effects):
            for j in range(i, len(self.effects)):
                target = ei if i == j else np.zeros_like(ei)
                if op_norm(ei @ self.effects[j] - target) > PVM_ORTHO_TOL:
                    raise InvalidInputError(
                        "effects are not mutually orthogonal projections"
                    )


@dataclass(frozen=True)
class DensityOperator:
    """Positive matrix with unit trace."""

    matrix: np.ndarray
    tol: Tolerance = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self) -> None:
        arr = as_operator(self.matrix).copy()
        if not is_positive(arr, self.tol):
            raise InvalidInputError("density operator must be positive")
        if abs(np.trace(arr).real - 1.0) > 1e-9 or abs(np.trace(arr).imag) > 1e-9:
            raise InvalidInputError("density operator must have trace one")
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def pure(vector: Sequence[complex]) -> DensityOperator:
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return DensityOperator(np.outer(v, v.conj()))

    @staticmethod
    def maximally_mixed(dim: int) -> DensityOperator:
        return DensityOperator(np.eye(dim) / dim)


def riesz_bound_residual(povm: Povm, f) -> float:
    """Excess of ||integrate(f)|| over the 2 ||f||_inf ||A(X)|| bound.

    The factor 2 comes from general operator-measure integration; for atomic
    finite sums the sharp factor is 1, so the residual is expected to be ~0
    always.  We keep the stated factor-2 bound as the tested contract.
    """
    coeffs = _coefficients(povm.space, f)
    sup = float(np.max(np.abs(coeffs))) if coeffs.size else 0.0
    lhs = op_norm(povm.integrate(coeffs))
    rhs = 2.0 * sup * op_norm(povm.total())
    return max(0.0, lhs - rhs)


def pvm_from_selfadjoint(t: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> Pvm:
    """Spectral measure of a Hermitian matrix.

    The sample space gets one atom per eigenvalue cluster (eigenvalues chained
    together whenever adjacent gaps are <= eig_tol, which keeps the atoms
    deterministic under floating point); atom coordinates are the cluster
    means and effects the corresponding spectral projections.
    """
    w, u = hermitian_eig(t, tol)
    clusters: list[list[int]] = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] <= tol.eig_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    atoms = []
    effects = []
    for idx in clusters:
        mean = float(np.mean(w[idx]))
        atoms.append(Atom(f"{mean:.12g}", (mean,)))
        cols = u[:, idx]
        effects.append(cols @ dagger(cols))
    space = SampleSpace(tuple(atoms), dim_d=1)
    return Pvm(space, tuple(effects), tol)


def naimark_dilate(povm: Povm) -> tuple[Pvm, np.ndarray]:
    """Dilate a normalized POVM to a PVM on a stacked space.

    Uses the canonical square-root construction: V stacks sqrt(effect_i)
    blocks into an isometry C^dim -> C^(dim * n_atoms), and the dilated PVM's
    i-th effect selects block i.  Then V* E(atom i) V reproduces the original
    effects.  The dilation is not minimal; minimality is irrelevant to the
    compression identity, and the enlarged space carries no physical
    interpretation.
    """
    if not povm.normalized:
        raise InvalidInputError("Naimark dilation requires a normalized POVM")
    dim, n = povm.dim, povm.space.n_atoms
    blocks = []
    for e in povm.effects:
        root = fun_calc(e, lambda w: np.sqrt(np.maximum(w.real, 0.0)), povm.tol)
        blocks.append(root)
    v = np.vstack(blocks)  # shape (n*dim, dim)
    effects = []
    for i in range(n):
        sel = np.zeros((n * dim, n * dim), dtype=complex)
        sel[i * dim : (i + 1) * dim, i * dim : (i + 1) * dim] = np.eye(dim)
        effects.append(sel)
    dilated = Pvm(povm.space, tuple(effects), povm.tol)
    return dilated, v


def naimark_residual(povm: Povm) -> float:
    """Max compression error ||V* E_i V - A_i|| over atoms of the dilation."""
    dilated, v = naimark_dilate(povm)
    worst = 0.0
    for e_big, e in zip(dilated.effects, povm.effects):
        worst = max(worst, op_norm(dagger(v) @ e_big @ v - e))
    return worst


def spectrum(povm: Povm, tol: Tolerance = DEFAULT_TOL) -> EventSet:
    """Atoms carrying a non-negligible effect; the complement is the cospectrum."""
    members = [i for i, e in enumerate(povm.effects) if op_norm(e) > tol.rank_tol]
    return EventSet(povm.space, frozenset(members))


def born_prob(povm: Povm, event: EventSet, rho: DensityOperator) -> float:
    """Probability trace(rho * A(event)).

    The trace is checked to be real within 1e-10; for a normalized measure the
    value lies in [-psd_tol, 1 + psd_tol] and is additive over disjoint events.
    """
    if rho.dim != povm.dim:
        raise InvalidInputError("state and measure dimensions differ")
    val = complex(np.trace(rho.matrix @ povm.apply(event)))
    if abs(val.imag) > 1e-10:
        raise InvalidInputError(f"Born probability not real: imag={val.imag:.3e}")
    return float(val.real)


def is_projective(povm: Povm) -> bool:
    """True iff the effects satisfy the PVM invariants within tolerance."""
    for i, ei in enumerate(povm.effects):
        for j in range(i, len(povm.effects)):
            target = ei if i == j else np.zeros_like(ei)
            if op_norm(ei @ povm.effects[j] - target) > PVM_ORTHO_TOL:
                return False
    return True


# --- JSON serialization -------------------------------------------------
#
# Schema: {"dim": d, "atoms": [{"label", "coord"?, "weight"?}],
#          "effects": [[ [re, im], ... row-major ... ]]}
# Floats round-trip bit-exactly through json's repr-based encoding.


def povm_to_dict(povm: Povm) -> dict:
    atoms = []
    for a in povm.space.atoms:
        rec: dict = {"label": a.label}
        if a.coordinate is not None:
            rec["coord"] = list(a.coordinate)
        if a.weight is not None:
            rec["weight"] = a.weight
        atoms.append(rec)
    effects = [
        [[float(z.real), float(z.imag)] for z in e.ravel(order="C")]
        for e in povm.effects
    ]
    return {"dim": povm.dim, "atoms": atoms, "effects": effects}


def povm_from_dict(data: Mapping, tol: Tolerance = DEFAULT_TOL, projective: bool | None = None) -> Povm:
    dim = int(data["dim"])
    atoms = tuple(
        Atom(
            rec["label"],
            tuple(rec["coord"]) if "coord" in rec else None,
            rec.get("weight"),
        )
        for rec in data["atoms"]
    )
    space = SampleSpace(atoms)
    effects = []
    for flat in data["effects"]:
        z = np.array([complex(re, im) for re, im in flat], dtype=complex)
        effects.append(z.reshape(dim, dim))
    cls = Pvm if projective else Povm
    return cls(space, tuple(effects), tol)


def povm_to_json(povm: Povm) -> str:
    return json.dumps(povm_to_dict(povm))


def povm_from_json(text: str, tol: Tolerance = DEFAULT_TOL, projective: bool | None = None) -> Povm:
    return povm_from_dict(json.loads(text), tol, projective)
