"""Infinite-product evaluator: zeros, growth, type, derivative envelopes."""

import math

import numpy as np
import pytest

from memwave import product as pr
from memwave.fractional import build_eigenvalue_table
from memwave.moving import build_moving_spectrum


@pytest.fixture(scope="module")
def pf():
    table = build_eigenvalue_table(0.75, 48)
    ms = build_moving_spectrum(table, 0.5, 1.0, 48)
    return pr.build_product(ms)


def test_triple_zero_at_origin(pf):
    assert pf.eval(0.0)[0] == 0.0
    for eps in (1e-3, 1e-4):
        ratio = abs(pf.eval(eps))[0] / eps**3
        assert ratio == pytest.approx(1.0, rel=1e-2)


def test_every_mode_zero_is_exact(pf):
    # the factor 1 + z/zeta vanishes identically at z = -zeta
    vals = np.abs(pf.eval(pf.zeros[::17]))
    assert np.all(vals == 0.0)


def test_zero_set_is_simple(pf):
    d = np.abs(pf.zeros[:, None] - pf.zeros[None, :])
    np.fill_diagonal(d, np.inf)
    assert d.min() > 0


def test_block_extension_agrees_with_exact_factors():
    # the same spectrum built at two truncations: with the asymptotic table
    # the direct-block extension reproduces the dropped exact factors
    table = build_eigenvalue_table(0.75, 32)
    ms_small = build_moving_spectrum(table, 0.5, 1.0, 16)
    ms_large = build_moving_spectrum(table, 0.5, 1.0, 32)
    pa, pb = pr.build_product(ms_small), pr.build_product(ms_large)
    z = np.array([3.0 + 0.2j, 12.5 - 0.1j, 0.5 + 4j])
    la, lb = pa.log_eval(z), pb.log_eval(z)
    diff = la - lb
    # the log phase is only defined mod 2 pi
    winding = np.round(diff.imag / (2 * np.pi))
    assert np.max(np.abs(diff.real)) < 1e-6
    assert np.max(np.abs(diff.imag - 2 * np.pi * winding)) < 1e-6


def test_remainder_model_against_direct_blocks(pf):
    # direct block summation over (k_cut, 40 k_cut] + far remainder must match
    # the remainder model at k_cut
    z = np.array([250 + 0.3j, 100 + 0.5j, 40j, 10 + 0.1j])
    k_cut = pf._direct_cutoff(float(np.max(np.abs(z))))
    model = pf._log_remainder(z, k_cut)
    c = abs(pf.ms.c)
    acc = np.zeros(len(z), dtype=complex)
    ks = np.arange(k_cut + 1, 40 * k_cut)
    for start in range(0, len(ks), 4096):
        kk = ks[start : start + 4096]
        kap = pf._kappa_ext(kk)
        mus = np.array([pf._mu_ext(int(k)) for k in kk])
        ck2 = (c * kap)[:, None] ** 2
        num = (z[:, None, None] + 1j * mus[None, :, :]) ** 2 - ck2[None, :, :]
        den = (1j * mus[None, :, :]) ** 2 - ck2[None, :, :]
        acc += np.sum(np.log(num / den), axis=(1, 2))
    acc += pf._log_remainder(z, int(ks[-1]))
    assert np.max(np.abs(model - acc)) < 2e-3


def test_axis_growth_trend_and_compensation(pf):
    comp, fit = pr.growth_compensator(pf, 300.0)
    # the uncompensated modulus trend is real and matches |x|^(2s-1)
    assert fit.alpha == pytest.approx(0.5)
    assert fit.d1 > 1.0
    xs = np.linspace(0.5, 300, 800)
    logm = (pf.log_eval(xs.astype(complex)) + comp.log_eval(xs.astype(complex))).real
    # compensated modulus flat: no order-of-magnitude growth across the window
    basis = np.vstack([np.sqrt(xs), np.ones_like(xs)]).T
    slope = np.linalg.lstsq(basis, logm, rcond=None)[0][0]
    assert abs(slope) < 0.15 * fit.d1
    assert logm.max() - np.median(logm) < 6.0


def test_derivative_at_mode_matches_finite_difference(pf):
    for mode in ((3, 2), (-7, 1), (10, 3)):
        z0 = -1j * np.conj(pf.ms.lam(*mode))
        dp = pf.derivative_at_mode(*mode)
        h = 1e-6
        fd = (pf.eval(z0 + h)[0] - pf.eval(z0 - h)[0]) / (2 * h)
        assert dp == pytest.approx(fd, rel=1e-5)


def test_log_derivative_matches_fd(pf):
    z = 7.3 + 2.1j
    ld = pf.log_derivative(z)[0]
    h = 1e-6
    fd = (pf.log_eval(z + h)[0] - pf.log_eval(z - h)[0]) / (2 * h)
    assert ld == pytest.approx(fd, rel=1e-5)


def test_product_report(pf):
    rep = pr.verify_product_properties(pf, family_N=12, scan_radius=200.0)
    assert rep.passed, rep
    assert rep.type_empirical <= 1.1 * rep.type_theoretical
    # lower sanity: at least the branch-1 comb density must show up
    assert rep.type_empirical >= math.pi / abs(pf.ms.c) - 1.0
    assert rep.c2_hat > 0
    assert rep.strip_stable
    # growth trend recorded
    assert rep.growth.d1 > 0
