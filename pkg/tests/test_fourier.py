import numpy as np
import pytest

from smrd.fourier import fft2c, ifft2c, inner, norm2


def dft2c_brute(x):
    """Independent O(N^2) centered orthonormal DFT (even sizes)."""
    h, w = x.shape
    out = np.zeros((h, w), dtype=complex)
    for k in range(h):
        for l in range(w):
            acc = 0.0 + 0.0j
            for m in range(h):
                for n in range(w):
                    phase = (k - h // 2) * (m - h // 2) / h + (l - w // 2) * (n - w // 2) / w
                    acc += x[m, n] * np.exp(-2j * np.pi * phase)
            out[k, l] = acc / np.sqrt(h * w)
    return out


def idft2c_brute(x):
    h, w = x.shape
    out = np.zeros((h, w), dtype=complex)
    for m in range(h):
        for n in range(w):
            acc = 0.0 + 0.0j
            for k in range(h):
                for l in range(w):
                    phase = (k - h // 2) * (m - h // 2) / h + (l - w // 2) * (n - w // 2) / w
                    acc += x[k, l] * np.exp(2j * np.pi * phase)
            out[m, n] = acc / np.sqrt(h * w)
    return out


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_constant_image_concentrates_at_center():
    c = 0.7 - 0.2j
    img = np.full((8, 8), c)
    ksp = fft2c(img)
    assert abs(ksp[4, 4] - 8 * c) < 1e-12
    ksp[4, 4] = 0
    assert np.max(np.abs(ksp)) < 1e-12


def test_norm_preserved():
    rng = np.random.default_rng(0)
    x = random_complex(rng, (16, 16))
    assert np.linalg.norm(fft2c(x)) == pytest.approx(np.linalg.norm(x), rel=1e-12)
    assert np.linalg.norm(ifft2c(x)) == pytest.approx(np.linalg.norm(x), rel=1e-12)


def test_fft2c_matches_brute_force_dft():
    rng = np.random.default_rng(1)
    x = random_complex(rng, (4, 4))
    assert np.max(np.abs(fft2c(x) - dft2c_brute(x))) < 1e-10


def test_ifft2c_matches_brute_force_inverse():
    rng = np.random.default_rng(2)
    x = random_complex(rng, (4, 4))
    assert np.max(np.abs(ifft2c(x) - idft2c_brute(x))) < 1e-10


def test_round_trip():
    rng = np.random.default_rng(3)
    x = random_complex(rng, (12, 10))
    assert np.max(np.abs(ifft2c(fft2c(x)) - x)) < 1e-12
    assert np.max(np.abs(fft2c(ifft2c(x)) - x)) < 1e-12


def test_centered_impulse_inverts_to_ones():
    h = w = 8
    ksp = np.zeros((h, w), dtype=complex)
    ksp[h // 2, w // 2] = np.sqrt(h * w)
    img = ifft2c(ksp)
    assert np.max(np.abs(img - 1.0)) < 1e-12


def test_zero_sized_rejected():
    with pytest.raises(ValueError):
        fft2c(np.zeros((0, 4)))
    with pytest.raises(ValueError):
        ifft2c(np.zeros((4, 0)))


def test_linearity():
    rng = np.random.default_rng(4)
    x = random_complex(rng, (8, 8))
    z = random_complex(rng, (8, 8))
    a, b = 1.3 - 0.4j, -0.2 + 2.1j
    lhs = fft2c(a * x + b * z)
    rhs = a * fft2c(x) + b * fft2c(z)
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_transform_adjointness():
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = random_complex(rng, (8, 8))
        y = random_complex(rng, (8, 8))
        lhs = inner(fft2c(x), y)
        rhs = inner(x, ifft2c(y))
        assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(lhs))


def test_inner_norm():
    rng = np.random.default_rng(6)
    x = random_complex(rng, (5, 5))
    v = inner(x, x)
    assert v.imag == pytest.approx(0.0, abs=1e-12)
    assert v.real >= 0
    assert v.real == pytest.approx(norm2(x), rel=1e-12)


def test_inner_conjugate_symmetry():
    rng = np.random.default_rng(7)
    a = random_complex(rng, (6, 6))
    b = random_complex(rng, (6, 6))
    assert abs(inner(a, b) - np.conj(inner(b, a))) < 1e-12


def test_inner_orthogonal_supports():
    a = np.array([[1 + 1j, 0.0]])
    b = np.array([[0.0, 2.0]])
    assert inner(a, b) == 0


def test_inner_shape_mismatch():
    with pytest.raises(ValueError):
        inner(np.zeros((2, 2)), np.zeros((2, 3)))
