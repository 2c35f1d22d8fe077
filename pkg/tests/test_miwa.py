import numpy as np
import pytest

from bvmatrix.engine import EngineError, SpectralParameter
from bvmatrix.library import bundled
from bvmatrix.master import build_action
from bvmatrix.miwa import WEIGHTS, _weighted_monomials, calibrate_miwa, miwa_variables, spectral_matrix


def test_scalar_trace():
    y, N = -3.0, 3
    Y = SpectralParameter.diagonal([y] * N)
    consts = [-1.0, -1.0, -3.0]
    t = miwa_variables(Y, 2, consts)
    for k, tk in enumerate(t):
        assert tk == pytest.approx(consts[k] * N * (-2 * y) ** (-(2 * k + 1) / 2), rel=1e-14)


def test_conjugation_invariance():
    rng = np.random.default_rng(2)
    z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    U, _ = np.linalg.qr(z)
    Y = SpectralParameter.diagonal([-1.0, -2.5, -4.0])
    Yc = SpectralParameter.from_matrix(U @ Y.matrix @ U.conj().T)
    assert np.allclose(miwa_variables(Y, 4), miwa_variables(Yc, 4), rtol=1e-12, atol=0)


def test_spectral_matrix_squares_to_minus_2y():
    Y = SpectralParameter.diagonal([-1.0, -5.0])
    lam = spectral_matrix(Y)
    assert np.allclose(lam @ lam, -2 * Y.matrix)
    assert np.all(np.linalg.eigvals(lam).real > 0)


def test_singular():
    with pytest.raises(EngineError):
        miwa_variables(SpectralParameter.diagonal([0.0, -1.0]), 2)


def test_weighted_monomials():
    monos = _weighted_monomials(6, 3)
    for e in monos:
        w = sum(a * b for a, b in zip(e, WEIGHTS))
        assert w % 3 == 0 and 0 < w <= 6
    assert (3, 0, 0) in monos and (0, 1, 0) in monos and (1, 0, 1) in monos


def test_calibration_constants():
    cal = calibrate_miwa(build_action(bundled("q1"), 2))
    # normalization −(2k−1)!! for k = 0, 1
    assert cal.c0 == pytest.approx(-1.0, abs=1e-3)
    assert cal.c1 == pytest.approx(-1.0, abs=1e-2)
    assert cal.residual_rms < 1e-6


def test_calibration_needs_n2():
    with pytest.raises(EngineError):
        calibrate_miwa(build_action(bundled("q1"), 1))
