import numpy as np
import pytest

from asmlab.errors import DegenerateSpectrumError, InvalidInputError
from asmlab.operators import (
    DEFAULT_TOL,
    Tolerance,
    as_operator,
    fun_calc,
    hermitian_eig,
    is_positive,
    max_dim,
    numerical_rank,
    op_norm,
    spectral_projector,
)
from asmlab.sampling import random_hermitian, random_unitary
from asmlab.spin import SIGMA_1, SIGMA_3


def test_op_norm_identity_and_zero():
    assert op_norm(np.eye(2)) == 1.0
    assert op_norm(np.zeros((3, 3))) == 0.0


def test_op_norm_sigma1():
    # 2x2 eigensolve by hand: eigenvalues of [[0,1],[1,0]] are +-1
    assert abs(op_norm(SIGMA_1) - 1.0) <= 1e-15


def test_op_norm_rejects_nonfinite():
    bad = np.array([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(InvalidInputError):
        op_norm(bad)
    with pytest.raises(InvalidInputError):
        op_norm(np.array([[np.inf]]))


def test_as_operator_shape_checks():
    with pytest.raises(InvalidInputError):
        as_operator(np.zeros((2, 3)))
    with pytest.raises(InvalidInputError):
        as_operator(np.zeros((0, 0)))


def test_max_dim_env_override(monkeypatch):
    monkeypatch.setenv("ASMLAB_MAX_DIM", "4")
    assert max_dim() == 4
    with pytest.raises(InvalidInputError):
        as_operator(np.eye(5))
    monkeypatch.setenv("ASMLAB_MAX_DIM", "zero")
    with pytest.raises(InvalidInputError):
        max_dim()


def test_hermitian_eig_sigma3():
    w, u = hermitian_eig(SIGMA_3)
    assert np.allclose(w, [-1.0, 1.0])
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-10)


def test_hermitian_eig_degenerate():
    w, u = hermitian_eig(np.diag([2.0, 2.0]).astype(complex))
    assert np.allclose(w, [2.0, 2.0])
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-10)


def test_hermitian_eig_sigma1_hand_solution():
    # hand eigensolve: vectors (1, -1)/sqrt 2 and (1, 1)/sqrt 2
    w, u = hermitian_eig(SIGMA_1)
    assert np.allclose(w, [-1.0, 1.0])
    minus = u[:, 0] / u[0, 0]
    plus = u[:, 1] / u[0, 1]
    assert np.allclose(minus, [1.0, -1.0], atol=1e-12)
    assert np.allclose(plus, [1.0, 1.0], atol=1e-12)


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_reconstruction_random_hermitian():
    rng = np.random.default_rng(11)
    for _ in range(25):
        dim = int(rng.integers(2, 33))
        m = random_hermitian(rng, dim, scale=rng.uniform(0.1, 5.0))
        w, u = hermitian_eig(m)
        err = op_norm((u * w) @ u.conj().T - m)
        assert err <= 1e-9 * max(op_norm(m), 1e-30)


def test_fun_calc_threshold_and_identity():
    proj = fun_calc(SIGMA_3, lambda w: (w > 0).astype(float))
    assert np.allclose(proj, np.diag([1.0, 0.0]), atol=1e-12)
    rng = np.random.default_rng(3)
    m = random_hermitian(rng, 6)
    assert op_norm(fun_calc(m, lambda w: w) - m) <= 1e-9 * op_norm(m)


def test_fun_calc_sqrt():
    assert np.allclose(fun_calc(np.diag([4.0, 9.0]), np.sqrt), np.diag([2.0, 3.0]), atol=1e-12)


def test_fun_calc_scalar_callable():
    out = fun_calc(np.diag([1.0, 4.0]), lambda x: float(x) ** 2)
    assert np.allclose(out, np.diag([1.0, 16.0]), atol=1e-12)


def test_fun_calc_composition():
    rng = np.random.default_rng(7)
    f = lambda w: 2.0 * w**3 - w + 0.5
    g = lambda w: w**2 - 3.0 * w
    for _ in range(10):
        m = random_hermitian(rng, 8)
        direct = fun_calc(m, lambda w: f(g(w)))
        nested = fun_calc(fun_calc(m, g), f)
        assert op_norm(direct - nested) <= 1e-8 * max(op_norm(m), 1.0)


def test_op_norm_submultiplicative():
    rng = np.random.default_rng(5)
    for _ in range(30):
        a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        b = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        assert op_norm(a @ b) <= op_norm(a) * op_norm(b) + 1e-9


def test_spectral_projector_idempotent():
    rng = np.random.default_rng(9)
    for _ in range(20):
        m = random_hermitian(rng, 10)
        c = float(rng.uniform(-1.0, 1.0))
        w = np.linalg.eigvalsh(m)
        if np.min(np.abs(w - c)) <= DEFAULT_TOL.eig_tol:
            continue
        p = spectral_projector(m, c)
        assert op_norm(p @ p - p) <= 1e-9


def test_spectral_projector_degenerate_cut():
    with pytest.raises(DegenerateSpectrumError):
        spectral_projector(np.diag([0.5, 1.0]), 0.5)


def test_is_positive():
    assert is_positive(np.eye(3))
    assert not is_positive(SIGMA_3)
    assert is_positive(np.diag([0.75, 0.25]))
    assert not is_positive(np.array([[0.0, 1.0], [0.0, 0.0]]))  # non-Hermitian


def test_numerical_rank():
    assert numerical_rank(np.diag([1.0, 1e-14])) == 1
    assert numerical_rank(np.zeros((4, 4))) == 0
    rng = np.random.default_rng(2)
    for dim in (2, 5, 9):
        assert numerical_rank(random_unitary(rng, dim)) == dim


def test_tolerance_validation():
    with pytest.raises(InvalidInputError):
        Tolerance(eig_tol=0.0)
    with pytest.raises(InvalidInputError):
        Tolerance(rank_tol=-1e-3)
