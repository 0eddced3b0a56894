import numpy as np
import pytest

from bosehub.errors import DegeneracyError
from bosehub.modes import fourier_modes, ground_mode, mode_energies, reciprocal_modes


def hopping_matrix(L, boundary, J=1.0):
    T = np.zeros((L, L))
    for l in range(L - 1):
        T[l, l + 1] = T[l + 1, l] = J
    if boundary == "periodic":
        T[0, L - 1] = T[L - 1, 0] = J
    return T


def test_open_two_sites():
    f = reciprocal_modes(2, "open")
    rows = sorted(map(tuple, np.round(f * np.sqrt(2), 12)))
    assert rows == [(1.0, -1.0), (1.0, 1.0)]


@pytest.mark.parametrize("boundary", ["open", "periodic"])
@pytest.mark.parametrize("L", range(3, 17))
def test_orthogonal(L, boundary):
    f = reciprocal_modes(L, boundary)
    assert np.max(np.abs(f @ f.T - np.eye(L))) < 1e-12


@pytest.mark.parametrize("boundary", ["open", "periodic"])
@pytest.mark.parametrize("L", [4, 7, 8])
def test_diagonalises_hopping(L, boundary):
    f = reciprocal_modes(L, boundary)
    D = f @ hopping_matrix(L, boundary, 0.7) @ f.T
    assert np.max(np.abs(D - np.diag(np.diag(D)))) < 1e-12
    assert np.allclose(np.diag(D), mode_energies(L, boundary, 0.7), atol=1e-12)
    assert np.allclose(np.sort(np.diag(D)), np.linalg.eigvalsh(hopping_matrix(L, boundary, 0.7)))


def test_fourier_unitary():
    F = fourier_modes(6)
    assert np.allclose(F @ F.conj().T, np.eye(6), atol=1e-12)


def test_ground_mode():
    assert ground_mode(8, "open") == 8
    assert mode_energies(8)[7] == mode_energies(8).min()
    assert ground_mode(8, "periodic") == 4
    assert mode_energies(8, "periodic")[3] == mode_energies(8, "periodic").min()
    with pytest.raises(DegeneracyError):
        ground_mode(7, "periodic")
