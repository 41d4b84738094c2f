"""Unsharp spin-1/2 measurements: ball geometry, paths, and CHSH experiments.

Two-outcome spin POVMs are in bijection with points of the closed unit ball in
R^3 via A± = (I ± x.sigma)/2; sharp (projective) measurements sit exactly on
the unit sphere.  hbar-families therefore correspond to continuous ball paths
approaching the sphere.  The Roy-Kar family follows the straight ray
(1 - hbar) n and doubles as the smearing of a sharp measurement through the
symmetric binary kernel.

Sign convention: direct evaluation on antipodal points fixes the determinant
distance identity as ||x - y||^2 = -4 det(A_x+ - A_y+), and that is the form
asserted here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .asymptotics import AsmFamily, HbarGrid
from .errors import InvalidInputError
from .measures import DensityOperator, Povm, SampleSpace
from .operators import DEFAULT_TOL, Tolerance, op_norm

SIGMA_1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI = (SIGMA_1, SIGMA_2, SIGMA_3)

BALL_TOL = 1e-12

SPIN_SPACE = SampleSpace.from_labels(("+1/2", "-1/2"))
PLUS = SPIN_SPACE.event(("+1/2",))
MINUS = SPIN_SPACE.event(("-1/2",))


def pauli_dot(x: np.ndarray) -> np.ndarray:
    """x . sigma for a real 3-vector."""
    x = np.asarray(x, dtype=float)
    return x[0] * SIGMA_1 + x[1] * SIGMA_2 + x[2] * SIGMA_3


@dataclass(frozen=True)
class BallPoint:
    """Point of the closed unit ball in R^3."""

    x: tuple[float, float, float]

    def __post_init__(self) -> None:
        vec = tuple(float(c) for c in self.x)
        if len(vec) != 3:
            raise InvalidInputError("ball point needs three coordinates")
        object.__setattr__(self, "x", vec)
        if self.norm > 1.0 + BALL_TOL:
            raise InvalidInputError(f"||x|| = {self.norm:.6g} exceeds 1")

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.x, dtype=float)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.x))


@dataclass(frozen=True)
class SpinPovm:
    """Two-outcome POVM with unit-trace effects summing to the identity."""

    a_plus: np.ndarray
    a_minus: np.ndarray

    def __post_init__(self) -> None:
        plus = np.asarray(self.a_plus, dtype=complex).copy()
        minus = np.asarray(self.a_minus, dtype=complex).copy()
        if plus.shape != (2, 2) or minus.shape != (2, 2):
            raise InvalidInputError("spin effects must be 2x2")
        if op_norm(plus + minus - np.eye(2)) > 1e-12:
            raise InvalidInputError("spin effects must sum to the identity")
        for name, e in (("plus", plus), ("minus", minus)):
            if abs(np.trace(e) - 1.0) > 1e-12:
                raise InvalidInputError(f"spin effect {name} must have unit trace")
            w = np.linalg.eigvalsh((e + e.conj().T) / 2)
            if w[0] < -DEFAULT_TOL.psd_tol or op_norm(e - e.conj().T) > 1e-12:
                raise InvalidInputError(f"spin effect {name} is not positive")
        plus.setflags(write=False)
        minus.setflags(write=False)
        object.__setattr__(self, "a_plus", plus)
        object.__setattr__(self, "a_minus", minus)

    def to_povm(self, tol: Tolerance = DEFAULT_TOL) -> Povm:
        """Two-atom POVM on the spin outcome space, plus outcome first."""
        return Povm(SPIN_SPACE, (self.a_plus, self.a_minus), tol)

    def difference(self) -> np.ndarray:
        """The +/- contrast observable A+ - A-."""
        return self.a_plus - self.a_minus


def povm_from_point(x: BallPoint) -> SpinPovm:
    """Spin POVM (I ± x.sigma)/2; projective exactly on the unit sphere."""
    v = pauli_dot(x.vector)
    eye = np.eye(2, dtype=complex)
    return SpinPovm(0.5 * (eye + v), 0.5 * (eye - v))


def point_from_povm(povm: SpinPovm) -> BallPoint:
    """Inverse of :func:`povm_from_point` via x_i = trace(A+ sigma_i)."""
    coords = []
    for s in PAULI:
        val = complex(np.trace(povm.a_plus @ s))
        if abs(val.imag) > 1e-10:
            raise InvalidInputError("effect trace against Pauli basis is not real")
        coords.append(val.real)
    return BallPoint(tuple(coords))


def reality_unsharpness(x: BallPoint) -> tuple[float, float]:
    """Degree of reality (1+|x|)/2 and unsharpness (1-|x|)/2."""
    lam = x.norm
    return (1.0 + lam) / 2.0, (1.0 - lam) / 2.0


def projectivity_identity_residual(x: BallPoint) -> float:
    """|| 4 (A+^2 - A+) + (1 - |x|^2) I ||, which vanishes identically."""
    a = povm_from_point(x).a_plus
    lam2 = float(np.dot(x.vector, x.vector))
    return op_norm(4.0 * (a @ a - a) + (1.0 - lam2) * np.eye(2))


def det_distance_residual(x: BallPoint, y: BallPoint) -> float:
    """| ||x-y||^2 + 4 Re det(A_x+ - A_y+) |.

    The plus sign is the numerically verified convention (antipodal points
    give 4 det = -4 against squared distance 4).
    """
    d = povm_from_point(x).a_plus - povm_from_point(y).a_plus
    dist2 = float(np.dot(x.vector - y.vector, x.vector - y.vector))
    return abs(dist2 + 4.0 * np.linalg.det(d).real)


@dataclass(frozen=True)
class SpinPath:
    """Closed-form ball path hbar -> x(hbar), asymptotically approaching the sphere."""

    path: Callable[[float], BallPoint]
    label: str = "path"

    def __call__(self, hbar: float) -> BallPoint:
        if not (0.0 < hbar <= 1.0):
            raise InvalidInputError(f"hbar must lie in (0, 1], got {hbar}")
        return self.path(hbar)

    def sharpness_gap(self, grid: HbarGrid) -> tuple[float, ...]:
        """1 - |x(hbar)| on the grid tail (should be small and decreasing)."""
        return tuple(1.0 - self(h).norm for h in grid.tail)


def constant_path(x: BallPoint, label: str | None = None) -> SpinPath:
    return SpinPath(lambda hbar: x, label or "constant")


def roy_kar_path(n: np.ndarray) -> SpinPath:
    """The straight unsharp path (1 - hbar) n for a unit direction n."""
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise InvalidInputError("direction must be a unit vector")
    return SpinPath(lambda hbar: BallPoint(tuple((1.0 - hbar) * n)), "roy-kar")


def spin_asm(path: SpinPath, tol: Tolerance = DEFAULT_TOL) -> AsmFamily:
    """Two-atom family hbar -> {(I ± x(hbar).sigma)/2} on the spin space."""

    def generate(hbar: float) -> Povm:
        return povm_from_point(path(hbar)).to_povm(tol)

    return AsmFamily(SPIN_SPACE, generate, None, f"spin[{path.label}]")


# --- CHSH -----------------------------------------------------------------

def singlet_state() -> DensityOperator:
    """The two-qubit singlet (I⊗I - sum_i sigma_i⊗sigma_i) / 4."""
    rho = np.eye(4, dtype=complex)
    for s in PAULI:
        rho = rho - np.kron(s, s)
    return DensityOperator(rho / 4.0)


def _unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > 1e-6:
        raise InvalidInputError(f"setting must be a unit vector, ||v|| = {norm:.6g}")
    return v / norm


def correlation(path_a: SpinPath, path_b: SpinPath, a: np.ndarray, b: np.ndarray, hbar: float) -> float:
    """E(a, b) = trace(rho (A+ - A-) ⊗ (B+ - B-)) in the singlet state.

    Each side measures along its unit direction with the sharpness |path(hbar)|
    inherited from its path.
    """
    a = _unit(a)
    b = _unit(b)
    xa = BallPoint(tuple(path_a(hbar).norm * a))
    xb = BallPoint(tuple(path_b(hbar).norm * b))
    obs = np.kron(povm_from_point(xa).difference(), povm_from_point(xb).difference())
    val = complex(np.trace(singlet_state().matrix @ obs))
    return float(val.real)


def chsh_value(
    path_a: SpinPath,
    path_b: SpinPath,
    settings: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray],
    hbar: float,
) -> float:
    """CHSH functional S = E(a,b) + E(a,b') + E(a',b) - E(a',b')."""
    a, a2, b, b2 = settings
    return (
        correlation(path_a, path_b, a, b, hbar)
        + correlation(path_a, path_b, a, b2, hbar)
        + correlation(path_a, path_b, a2, b, hbar)
        - correlation(path_a, path_b, a2, b2, hbar)
    )


def _correlation_matrix(path_a: SpinPath, path_b: SpinPath, hbar: float) -> np.ndarray:
    """3x3 matrix M with E(a, b) = a^T M b, computed by the tensor arithmetic."""
    la = path_a(hbar).norm
    lb = path_b(hbar).norm
    rho = singlet_state().matrix
    m = np.empty((3, 3))
    for i, si in enumerate(PAULI):
        for j, sj in enumerate(PAULI):
            m[i, j] = np.trace(rho @ np.kron(la * si, lb * sj)).real
    return m


def _coplanar(theta: np.ndarray) -> np.ndarray:
    """Unit vectors in the x-z plane; output shape is theta.shape + (3,)."""
    return np.stack([np.sin(theta), np.zeros_like(theta), np.cos(theta)], axis=-1)


def max_chsh(
    path_a: SpinPath,
    path_b: SpinPath,
    hbar: float,
    coarse_points: int = 60,
    refine_rounds: int = 14,
) -> tuple[float, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Maximum of |S| over coplanar settings: coarse grid plus local zoom.

    For the (isotropic) singlet the optimum is attained by coplanar settings,
    and S only depends on angle differences, so the first setting is pinned at
    angle 0.  The search is deterministic.
    """
    m = _correlation_matrix(path_a, path_b, hbar)

    def s_of(alpha2: np.ndarray, beta: np.ndarray, beta2: np.ndarray) -> np.ndarray:
        ua = _coplanar(np.zeros_like(alpha2))
        ua2 = _coplanar(alpha2)
        ub = _coplanar(beta)
        ub2 = _coplanar(beta2)
        e = lambda u, v: np.einsum("...i,ij,...j->...", u, m, v)
        return e(ua, ub) + e(ua, ub2) + e(ua2, ub) - e(ua2, ub2)

    grid = np.linspace(0.0, 2.0 * np.pi, coarse_points, endpoint=False)
    a2, b, b2 = np.meshgrid(grid, grid, grid, indexing="ij")
    s = np.abs(s_of(a2, b, b2))
    best = np.unravel_index(int(np.argmax(s)), s.shape)
    center = np.array([grid[best[0]], grid[best[1]], grid[best[2]]])
    step = grid[1] - grid[0]

    offsets = np.linspace(-1.0, 1.0, 9)
    for _ in range(refine_rounds):
        axes = [center[k] + step * offsets for k in range(3)]
        a2, b, b2 = np.meshgrid(*axes, indexing="ij")
        s = np.abs(s_of(a2, b, b2))
        best = np.unravel_index(int(np.argmax(s)), s.shape)
        center = np.array([axes[0][best[0]], axes[1][best[1]], axes[2][best[2]]])
        step *= 0.35

    settings = (
        _coplanar(np.array(0.0)),
        _coplanar(np.array(center[0])),
        _coplanar(np.array(center[1])),
        _coplanar(np.array(center[2])),
    )
    return float(np.abs(chsh_value(path_a, path_b, settings, hbar))), settings


def bell_threshold_scan(path_a: SpinPath, path_b: SpinPath, grid: HbarGrid) -> float:
    """Largest hbar (refined to 1e-4) with max-over-settings S > 2.

    If the whole grid violates the classical bound the largest grid value is
    returned; if no grid point violates it the scan returns 0.0.  Between the
    boundary grid points the crossing is bisection-refined.
    """
    values = [(h, max_chsh(path_a, path_b, h)[0]) for h in grid.values]
    violating = [h for h, s in values if s > 2.0]
    if not violating:
        return 0.0
    h_lo = max(violating)  # largest violating hbar on the grid
    larger = [h for h, _ in values if h > h_lo]
    if not larger:
        return h_lo
    h_hi = min(larger)  # smallest non-violating grid point above
    while h_hi - h_lo > 1e-4:
        mid = 0.5 * (h_lo + h_hi)
        if max_chsh(path_a, path_b, mid)[0] > 2.0:
            h_lo = mid
        else:
            h_hi = mid
    return 0.5 * (h_lo + h_hi)


def symmetric_bell_threshold() -> float:
    """Closed-form crossing 1 - 2^(-1/4) of 2 sqrt(2) (1 - hbar)^2 = 2."""
    return 1.0 - 2.0 ** (-0.25)


def roy_kar_bell_constant() -> float:
    """The eavesdropping-analysis threshold constant 1 - sqrt(2) (sqrt(2)-1)^(1/2).

    Reported alongside the scan result for comparison; the generic symmetric
    scan crosses at :func:`symmetric_bell_threshold` instead, and no claim is
    made about which scenario the constant describes.
    """
    return 1.0 - np.sqrt(2.0) * (np.sqrt(2.0) - 1.0) ** 0.5
