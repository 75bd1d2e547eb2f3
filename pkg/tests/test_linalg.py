import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellbench import linalg
from bellbench.errors import CapacityError, ConvergenceError, ValidationError
from bellbench.linalg import SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z, CounterDiagonalMatrix

from conftest import SQRT2, TSIRELSON, cdiag


def kron_oracle(a, b):
    """Entry ((i1, i2), (j1, j2)) = a[i1, j1] * b[i2, j2], by explicit loops."""
    da, db = len(a), len(b)
    out = np.zeros((da * db, da * db), dtype=complex)
    for i1 in range(da):
        for j1 in range(da):
            for i2 in range(db):
                for j2 in range(db):
                    out[i1 * db + i2, j1 * db + j2] = a[i1, j1] * b[i2, j2]
    return out


def random_hermitian(rng, dim):
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (x + x.conj().T) / 2


def test_kron_identities():
    assert np.array_equal(linalg.kron(SIGMA_I, SIGMA_I), np.eye(4))
    assert np.array_equal(linalg.kron(SIGMA_X, SIGMA_X), np.fliplr(np.eye(4)))


def test_kron_x_y_is_counterdiagonal():
    # Hand expansion of sigma_x (x) sigma_y, read row by row.
    assert np.array_equal(linalg.kron(SIGMA_X, SIGMA_Y), cdiag([-1j, 1j, -1j, 1j]))


def test_kron_matches_loop_oracle(rng):
    for da, db in [(2, 2), (2, 4), (4, 2), (8, 2)]:
        a = rng.standard_normal((da, da)) + 1j * rng.standard_normal((da, da))
        b = rng.standard_normal((db, db)) + 1j * rng.standard_normal((db, db))
        assert np.allclose(linalg.kron(a, b), kron_oracle(a, b), rtol=0, atol=1e-14)
    # Gaussian-integer entries multiply exactly, so equality is exact there.
    a = rng.integers(-5, 6, (4, 4)) + 1j * rng.integers(-5, 6, (4, 4))
    b = rng.integers(-5, 6, (2, 2)) + 1j * rng.integers(-5, 6, (2, 2))
    assert np.array_equal(linalg.kron(a, b), kron_oracle(a, b))


def test_kron_associative_and_trace(rng):
    a, b, c = (rng.integers(-9, 10, (2, 2)) + 1j * rng.integers(-9, 10, (2, 2)) for _ in range(3))
    assert np.array_equal(linalg.kron(linalg.kron(a, b), c), linalg.kron(a, linalg.kron(b, c)))
    for pauli in ([SIGMA_X, SIGMA_Y, SIGMA_Z], [SIGMA_Y, SIGMA_Y, SIGMA_X]):
        a, b, c = pauli
        assert np.array_equal(linalg.kron(linalg.kron(a, b), c), linalg.kron(a, linalg.kron(b, c)))
    for _ in range(20):
        a, b = random_hermitian(rng, 4), random_hermitian(rng, 8)
        assert abs(linalg.trace(linalg.kron(a, b)) - linalg.trace(a) * linalg.trace(b)) <= 1e-12 * max(
            1, abs(linalg.trace(a) * linalg.trace(b))
        )


def test_kron_preserves_hermiticity(rng):
    a, b = random_hermitian(rng, 4), random_hermitian(rng, 2)
    assert linalg.is_hermitian(linalg.kron(a, b))


def test_capacity_limit(monkeypatch):
    monkeypatch.setenv("BELLBENCH_MAX_DIM", "8")
    with pytest.raises(CapacityError):
        linalg.kron(np.eye(4), np.eye(4))
    monkeypatch.delenv("BELLBENCH_MAX_DIM")
    assert linalg.max_dim() == 2**13
    with pytest.raises(CapacityError):
        linalg.kron(np.eye(2**7), np.eye(2**7))


def test_capacity_env_must_be_integer(monkeypatch):
    monkeypatch.setenv("BELLBENCH_MAX_DIM", "lots")
    with pytest.raises(ValidationError):
        linalg.max_dim()


def test_mat_ops():
    assert linalg.trace(np.eye(4)) == 4
    assert linalg.operator_norm(SIGMA_Y) == pytest.approx(1, abs=1e-12)
    assert linalg.frobenius_norm(np.eye(4)) == pytest.approx(2)
    assert np.array_equal(linalg.add(SIGMA_X, SIGMA_Z), SIGMA_X + SIGMA_Z)
    assert np.array_equal(linalg.scale(SIGMA_X, 2j), 2j * SIGMA_X)
    assert np.array_equal(linalg.matmul(SIGMA_X, SIGMA_Y), 1j * SIGMA_Z)
    with pytest.raises(ValidationError):
        linalg.add(np.eye(2), np.eye(4))
    with pytest.raises(ValidationError):
        linalg.matmul(np.eye(2), np.eye(4))


def test_operator_norm_is_spectral_radius(rng):
    for _ in range(10):
        m = random_hermitian(rng, 16)
        assert abs(linalg.operator_norm(m) - np.max(np.abs(np.linalg.eigvals(m)))) <= 1e-10
    # non-Hermitian input falls back to the largest singular value
    m = np.array([[0, 2], [0, 0]], dtype=complex)
    assert linalg.operator_norm(m) == pytest.approx(2)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_pauli_spectra(method):
    z = linalg.eig_hermitian(SIGMA_Z, method=method)
    assert np.allclose(z.eigenvalues, [1, -1])
    assert np.allclose(np.abs(z.eigenvectors), np.eye(2))
    x = linalg.eig_hermitian(SIGMA_X, method=method)
    assert np.allclose(x.eigenvalues, [1, -1])


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_chsh_operator_spectrum(method):
    # CHSH at its optimal settings: I^2 = 4(1 + A''(x)B'') with A''(x)B'' = Z(x)Z, spectrum {+-1}.
    x = [[0, 1], [1, 0]]
    a, ap = np.array(x, complex), np.array([[0, -1j], [1j, 0]])
    b = (a + ap) / SQRT2
    bp = (a - ap) / SQRT2
    m = np.kron(a, b) + np.kron(a, bp) + np.kron(ap, b) - np.kron(ap, bp)
    res = linalg.eig_hermitian(m, method=method)
    assert np.allclose(res.eigenvalues, [TSIRELSON, 0, 0, -TSIRELSON], atol=1e-12)
    assert res.multiplicities == [1, 2, 1]


def test_spectral_result_invariants(rng):
    for method, dim in [("lapack", 64), ("jacobi", 16)]:
        m = random_hermitian(rng, dim)
        res = linalg.eig_hermitian(m, method=method)
        assert np.all(np.diff(res.eigenvalues) <= 0)
        norms = np.linalg.norm(res.eigenvectors, axis=0)
        assert np.max(np.abs(norms - 1)) <= 1e-12
        resid = np.linalg.norm(m @ res.eigenvectors - res.eigenvectors * res.eigenvalues, axis=0)
        assert np.max(resid) <= 1e-9 * linalg.operator_norm(m)
        gram = res.eigenvectors.conj().T @ res.eigenvectors
        assert np.max(np.abs(gram - np.eye(dim))) <= 1e-9


def test_reconstruction_100_seeds():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        dim = int(rng.choice([2, 4, 8, 16, 32, 64]))
        m = random_hermitian(rng, dim)
        rec = linalg.eig_hermitian(m).reconstruct()
        assert linalg.frobenius_norm(m - rec) <= 1e-8 * linalg.frobenius_norm(m)


def test_jacobi_agrees_with_lapack(rng):
    for dim in (3, 5, 8, 16):
        m = random_hermitian(rng, dim)
        jac = linalg.eig_hermitian(m, method="jacobi")
        lap = linalg.eig_hermitian(m, method="lapack")
        assert np.max(np.abs(jac.eigenvalues - lap.eigenvalues)) <= 1e-10
        assert linalg.frobenius_norm(m - jac.reconstruct()) <= 1e-10 * linalg.frobenius_norm(m)


def test_jacobi_sweep_limit_raises(rng):
    m = random_hermitian(rng, 8)
    with pytest.raises(ConvergenceError) as info:
        linalg.eig_hermitian(m, method="jacobi", max_sweeps=1)
    assert info.value.residual > 0


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        linalg.eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ValidationError):
        linalg.eig_hermitian(SIGMA_Z, method="qr")


def test_degeneracy_grouping():
    res = linalg.SpectralResult(np.array([1.0, 3.0, 3.0 - 1e-10, -1.0, 1.0]), np.eye(5))
    assert res.multiplicities == [2, 2, 1]
    assert res.top_multiplicity == 2
    assert res.second_distinct == pytest.approx(1.0)
    assert res.gaps == pytest.approx([2.0, 2.0])


def test_phase_fixing():
    v = np.exp(0.7j) * np.array([0.6, 0.8j])
    fixed = linalg.fix_phase(v)
    assert fixed[1].imag == pytest.approx(0, abs=1e-15)
    assert fixed[1].real > 0


def test_counterdiagonal_small_cases():
    res = linalg.eig_counterdiagonal(CounterDiagonalMatrix([1, 1]))
    assert np.allclose(res.eigenvalues, [1, -1])
    zero = linalg.eig_counterdiagonal(CounterDiagonalMatrix(np.zeros(8)))
    assert np.array_equal(zero.eigenvalues, np.zeros(8))
    odd = linalg.eig_counterdiagonal(CounterDiagonalMatrix([1j, 5, -1j]))
    assert sorted(odd.eigenvalues) == pytest.approx([-1, 1, 5])


def test_counterdiagonal_dense_roundtrip():
    c = CounterDiagonalMatrix([1, 2j, -2j, 1])
    assert np.array_equal(c.dense(), cdiag([1, 2j, -2j, 1]))
    assert np.array_equal(CounterDiagonalMatrix.from_dense(c.dense()).antidiag, c.antidiag)
    assert CounterDiagonalMatrix.from_dense(np.eye(4)) is None


def test_counterdiagonal_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        linalg.eig_counterdiagonal(CounterDiagonalMatrix([1, 2]))


def test_counterdiagonal_theorem1_n3():
    # C-diag(2r2, 0, r2(1+i), r2(1-i), r2(1+i), r2(1-i), 0, 2r2); |r2(1+i)| = 2.
    entries = [2 * SQRT2, 0, SQRT2 * (1 + 1j), SQRT2 * (1 - 1j), SQRT2 * (1 + 1j), SQRT2 * (1 - 1j), 0, 2 * SQRT2]
    res = linalg.eig_counterdiagonal(CounterDiagonalMatrix(entries))
    assert res.top == pytest.approx(TSIRELSON, abs=1e-12)
    assert res.top_multiplicity == 1
    assert res.second_distinct == pytest.approx(2.0, abs=1e-12)
    general = linalg.eig_hermitian(cdiag(entries))
    assert np.max(np.abs(res.eigenvalues - general.eigenvalues)) <= 1e-10


def test_counterdiagonal_eigenpairs(rng):
    c = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    c = (c + np.conj(c[::-1])) / 2
    m = CounterDiagonalMatrix(c)
    res = linalg.eig_counterdiagonal(m)
    dense = m.dense()
    resid = np.linalg.norm(dense @ res.eigenvectors - res.eigenvectors * res.eigenvalues, axis=0)
    assert np.max(resid) <= 1e-12


def test_counterdiagonal_agrees_with_general_100_random():
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        dim = int(rng.integers(1, 257))
        c = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        c = (c + np.conj(c[::-1])) / 2
        m = CounterDiagonalMatrix(c)
        fast = linalg.eig_counterdiagonal(m)
        slow = linalg.eig_hermitian(m.dense())
        assert np.max(np.abs(fast.eigenvalues - slow.eigenvalues)) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_counterdiagonal_spectrum_is_plus_minus_magnitudes(half):
    c = np.array(half + [np.conj(z) for z in half[::-1]])
    res = linalg.eig_counterdiagonal(CounterDiagonalMatrix(c))
    expected = sorted([abs(z) for z in half] + [-abs(z) for z in half], reverse=True)
    assert np.allclose(res.eigenvalues, expected, atol=1e-12)
    assert math.isclose(float(np.sum(res.eigenvalues)), 0.0, abs_tol=1e-9)
