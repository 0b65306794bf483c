import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from pdregion.hermlin import (
    distance_to_range,
    herm_eig,
    hermitian,
    is_psd,
    lambda_min,
    numerical_radius,
    numerical_range,
    pencil_eigs,
)


def cmat(p, seed):
    r = np.random.default_rng(seed)
    return r.normal(size=(p, p)) + 1j * r.normal(size=(p, p))


@pytest.mark.parametrize("M,expected", [
    ([[2, 0.1], [0.1, 2]], [1.9, 2.1]),
    (np.eye(3), [1, 1, 1]),
    ([[0, 1j], [-1j, 0]], [-1, 1]),
])
def test_herm_eig_examples(M, expected):
    w, V = herm_eig(M)
    assert np.allclose(w, expected, atol=1e-12)


def test_hermitian_symmetrizes():
    H = hermitian([[1, 2 + 1e-13], [2, 1]])
    assert np.allclose(H, np.conj(H.T), atol=0)


@given(st.integers(1, 8), st.integers(0, 10_000))
def test_herm_eig_residual_and_oracle(p, seed):
    A = cmat(p, seed)
    H = (A + A.conj().T) / 2
    w, V = herm_eig(H)
    nrm = np.linalg.norm(H, 2)
    assert np.all(np.linalg.norm(H @ V - V * w, axis=0) <= 1e-9 * max(nrm, 1))
    assert np.allclose(V.conj().T @ V, np.eye(p), atol=1e-9)
    assert abs(w.sum() - np.trace(H).real) <= 1e-9 * max(1, np.abs(w).sum())
    # independent oracle: LAPACK
    assert np.allclose(w, np.linalg.eigvalsh(H), atol=1e-9 * max(nrm, 1))
    assert lambda_min(H) == pytest.approx(w[0])


def test_is_psd_examples():
    assert is_psd([[2, 0.1], [0.1, 2]], 1e-12)
    assert not is_psd([[-1.0]], 1e-12)
    assert is_psd(np.zeros((2, 2)), 0.0)
    with pytest.raises(ValueError):
        is_psd(np.eye(2), -1.0)


def test_pencil_examples():
    r = pencil_eigs(2 * np.eye(2), np.eye(2))
    assert np.allclose(r.eigenvalues, [2, 2]) and r.kernel_dim == 0
    g, s = 2.0, 1 / 3
    r = pencil_eigs([[2 * g]], [[s * g * g]])
    assert r.eigenvalues == pytest.approx([3.0])
    A = np.array([[1.0, 0.2], [0.2, -0.5]])
    r = pencil_eigs(A, np.zeros((2, 2)))
    assert r.eigenvalues.size == 0 and r.kernel_psd == is_psd(A)
    with pytest.raises(ValueError):
        pencil_eigs(np.eye(2), -np.eye(2))


@given(st.integers(1, 6), st.integers(0, 10_000))
def test_pencil_matches_whitened_oracle(p, seed):
    A = cmat(p, seed)
    A = A + A.conj().T
    Bh = cmat(p, seed + 1)
    B = Bh @ Bh.conj().T + 0.5 * np.eye(p)
    wb, Ub = np.linalg.eigh(B)
    Bm = Ub @ np.diag(wb ** -0.5) @ Ub.conj().T
    ref = np.linalg.eigvalsh(Bm @ A @ Bm)
    assert np.allclose(pencil_eigs(A, B).eigenvalues, ref, atol=1e-8 * (1 + np.abs(ref).max()))


def test_numerical_range_examples():
    nr = numerical_range(np.eye(2), 64)
    assert np.allclose(nr.boundary_points, 1.0)
    nr = numerical_range(np.diag([0.0, 2.0]), 64)
    z = nr.boundary_points
    assert np.all(np.abs(z.imag) <= 1e-9) and np.all((z.real >= -1e-9) & (z.real <= 2 + 1e-9))
    nr = numerical_range([[0, 2], [0, 0]], 128)
    assert np.allclose(np.abs(nr.boundary_points), 1.0, atol=1e-9)
    with pytest.raises(ValueError):
        numerical_range(np.eye(2), 4)


@given(st.integers(2, 5), st.integers(0, 10_000))
def test_numerical_range_rayleigh_and_convexity(p, seed):
    Mx = cmat(p, seed)
    nr = numerical_range(Mx, 96)
    for k, z in enumerate(nr.boundary_points):
        v = nr.vectors[:, k]
        assert abs(np.linalg.norm(v) - 1) <= 1e-9
        assert abs(np.vdot(v, Mx @ v) - z) <= 1e-9 * (1 + np.abs(Mx).max())
    z = nr.boundary_points
    n = len(z)
    for k in range(n):
        o, a, b = z[k - 1], z[k], z[(k + 1) % n]
        cross = (a.real - o.real) * (b.imag - o.imag) - (a.imag - o.imag) * (b.real - o.real)
        assert cross >= -1e-9 * max(1.0, np.abs(Mx).max()) ** 2


@pytest.mark.parametrize("M,r", [(np.eye(2), 1.0), ([[0, 2], [0, 0]], 1.0), (np.zeros((2, 2)), 0.0)])
def test_numerical_radius_examples(M, r):
    assert numerical_radius(M) == pytest.approx(r, abs=1e-9)


@given(st.integers(1, 6), st.integers(0, 10_000))
def test_numerical_radius_sandwich(p, seed):
    Mx = cmat(p, seed)
    r = numerical_radius(Mx)
    assert r >= np.max(np.abs(np.linalg.eigvals(Mx))) - 1e-9
    assert r <= np.linalg.norm(Mx, 2) + 1e-9
    assert r >= np.linalg.norm(Mx, 2) / 2 - 1e-9


def test_numerical_radius_monotone_in_grid():
    Mx = cmat(4, 7)
    assert numerical_radius(Mx, 2880) >= numerical_radius(Mx, 90) - 1e-12


def test_distance_to_range():
    assert distance_to_range(np.eye(2), 3.0) == pytest.approx(2.0)
    assert distance_to_range(np.diag([0.0, 2.0]), 1.0) == pytest.approx(0.0, abs=1e-12)
    assert distance_to_range(np.diag([0.0, 2.0]), 1 + 1j) == pytest.approx(1.0)


def test_batched_lambda_min():
    H = np.stack([np.diag([1.0, 2.0]), np.diag([-3.0, 0.5])])
    assert np.allclose(lambda_min(H), [1.0, -3.0])
