"""Moment assembly, Gram closed forms, minimum-norm synthesis, observability."""

import numpy as np
import pytest

from memwave import control as ctl
from memwave.biorthogonal import horizon_threshold
from memwave.fractional import build_eigenvalue_table
from memwave.moving import build_moving_spectrum

OMEGA0 = (-0.3, 0.3)


@pytest.fixture(scope="module")
def setup():
    table = build_eigenvalue_table(0.75, 8)
    ms = build_moving_spectrum(table, 0.5, 1.0, 8)
    T = 1.05 * horizon_threshold(1.0, ms.gamma)
    gram = ctl.assemble_gram(ms, OMEGA0, T)
    return ms, T, gram


def test_moment_rhs_literal(setup):
    ms, T, _ = setup
    ns = np.array(ms.mode_indices())
    rho = np.array([ms.rho(n) for n in ns])
    y0 = np.zeros(len(ns), dtype=complex)
    y1 = np.zeros(len(ns), dtype=complex)
    y0[np.nonzero(ns == 1)[0][0]] = 1.0
    data = ctl.InitialData(ns=ns, y0=y0, y1=y1, rho=rho)
    msys = ctl.assemble_moments(data, ms)
    for j in (1, 2, 3):
        assert msys.rhs_of(1, j) == pytest.approx(-2.0 * np.conj(ms.mu_of(1, j)))
        assert msys.rhs_of(2, j) == 0.0
        assert msys.rhs_of(-1, j) == 0.0


def test_zero_data_zero_control(setup):
    ms, T, gram = setup
    ns = np.array(ms.mode_indices())
    rho = np.array([ms.rho(n) for n in ns])
    data = ctl.InitialData(ns, np.zeros(len(ns), complex), np.zeros(len(ns), complex), rho)
    cf = ctl.synthesize_control(ctl.assemble_moments(data, ms), gram)
    assert cf.norm == 0.0 and np.all(cf.a == 0)


def test_gram_diagonal_closed_form(setup):
    ms, T, gram = setup
    i = gram.modes.index((3, 2))
    lam = ms.eigenvalue(3, 2)
    w = 2 * lam.real
    want = 0.6 * (1 - np.exp(-w * T)) / w
    assert gram.G[i, i] == pytest.approx(want, rel=1e-12)


def test_gram_full_domain_sinc(setup):
    # omega0 = whole interval: the space factor is 2 sin(dk)/dk times a phase
    ms, T, _ = setup
    g2 = ctl.assemble_gram(ms, (-1.0, 1.0), T)
    i = g2.modes.index((1, 1))
    k = g2.modes.index((2, 1))
    dk = ms.kappa(2) - ms.kappa(1)
    space = 2 * np.sin(dk) / dk
    lam1, lam2 = ms.eigenvalue(1, 1), ms.eigenvalue(2, 1)
    want = space * (1 - np.exp(-(lam2 + np.conj(lam1)) * T)) / (lam2 + np.conj(lam1))
    assert g2.G[i, k] == pytest.approx(want, rel=1e-12)


def test_gram_hermitian_psd(setup):
    _, _, gram = setup
    assert np.max(np.abs(gram.G - gram.G.conj().T)) < 1e-14 * np.max(np.abs(gram.G))
    w = np.linalg.eigvalsh(gram.G)
    assert w[0] >= -1e-10 * np.abs(w[-1])


def test_gram_quadrature_crosscheck(setup):
    # closed forms against Gauss-Legendre on a couple of entries
    ms, T, gram = setup
    tg, tw = np.polynomial.legendre.leggauss(220)
    t = 0.5 * T * (tg + 1)
    tw = 0.5 * T * tw
    xg, xw = np.polynomial.legendre.leggauss(40)
    x = 0.3 * xg
    xw = 0.3 * xw
    for a, b in [((1, 1), (2, 3)), ((-3, 2), (3, 2))]:
        ia, ib = gram.modes.index(a), gram.modes.index(b)
        lam_a, lam_b = ms.eigenvalue(*a), ms.eigenvalue(*b)
        ka, kb = ms.kappa(a[0]), ms.kappa(b[0])
        Ea = np.exp(-1j * ka * x)[None, :] * np.exp(-np.conj(lam_a) * t)[:, None]
        Eb = np.exp(-1j * kb * x)[None, :] * np.exp(-np.conj(lam_b) * t)[:, None]
        # G[row, col] pairs conj(E_col) with E_row, so this integrand is G[ib, ia]
        val = np.einsum("tx,t,x->", np.conj(Ea) * Eb, tw, xw)
        assert gram.G[ib, ia] == pytest.approx(val, rel=1e-10)


def test_synthesis_and_moment_feasibility(setup):
    ms, T, gram = setup
    data = ctl.random_initial_data(ms, seed=11)
    msys = ctl.assemble_moments(data, ms)
    cf = ctl.synthesize_control(msys, gram)
    assert cf.residual <= 1e-10 * cf.rhs_norm
    qm = ctl.quadrature_moments(cf, ms)
    rel = np.abs(qm - msys.b) / np.maximum(np.abs(msys.b), 1e-300)
    assert np.max(rel) < 1e-6


def test_linearity_scaling(setup):
    ms, T, gram = setup
    data = ctl.random_initial_data(ms, seed=5)
    cf1 = ctl.synthesize_control(ctl.assemble_moments(data, ms), gram)
    cf2 = ctl.synthesize_control(ctl.assemble_moments(data.scaled(2.0), ms), gram)
    assert np.allclose(cf2.a, 2.0 * cf1.a, rtol=1e-12, atol=1e-300)
    assert cf2.norm == pytest.approx(2.0 * cf1.norm, rel=1e-10)


def test_support_masking(setup):
    ms, T, gram = setup
    data = ctl.random_initial_data(ms, seed=5)
    cf = ctl.synthesize_control(ctl.assemble_moments(data, ms), gram)
    t = np.array([-0.5, 0.5, T + 1.0])
    x = np.array([-0.9, 0.0, 0.8])
    vals = cf.evaluate(t, x)
    assert vals[0, 1] == 0 and vals[2, 1] == 0  # outside (0,T)
    assert vals[1, 0] == 0 and vals[1, 2] == 0  # outside omega0
    assert vals[1, 1] != 0


def test_minimum_norm_first_order(setup):
    # directions with vanishing moments cannot reduce the norm to first order
    ms, T, gram = setup
    data = ctl.random_initial_data(ms, seed=7)
    msys = ctl.assemble_moments(data, ms)
    cf = ctl.synthesize_control(msys, gram)
    rng = np.random.default_rng(0)
    tg, tw = np.polynomial.legendre.leggauss(260)
    t = 0.5 * T * (tg + 1)
    tw = 0.5 * T * tw
    xg, xw = np.polynomial.legendre.leggauss(40)
    x = 0.3 * xg
    xw = 0.3 * xw
    lam = np.array([ms.eigenvalue(n, j) for n, j in cf.modes])
    kap = np.array([ms.kappa(n) for n, _ in cf.modes])
    K = np.einsum("mt,mx->mtx", np.exp(-np.conj(lam)[:, None] * t[None, :]), np.exp(-1j * kap[:, None] * x[None, :]))
    u = np.einsum("m,mtx->tx", cf.a, np.conj(K))
    for _ in range(6):
        w = np.einsum("a,atx->tx", rng.standard_normal(4) + 1j * rng.standard_normal(4),
                      np.array([np.outer(np.sin((i + 1) * np.pi * t / T), np.cos(i * x)) for i in range(4)]), )
        mom_w = np.einsum("tx,mtx,t,x->m", w, K, tw, xw)
        coef = np.linalg.solve(gram.G, mom_w)
        v = w - np.einsum("m,mtx->tx", coef, np.conj(K))
        inner = np.einsum("tx,tx,t,x->", v, np.conj(u), tw, xw)
        norm_u = np.sqrt(abs(np.einsum("tx,tx,t,x->", u, np.conj(u), tw, xw)))
        norm_v = np.sqrt(abs(np.einsum("tx,tx,t,x->", v, np.conj(v), tw, xw)))
        assert abs(inner) <= 1e-8 * norm_u * norm_v


def test_n2_brute_force_oracle():
    # dense elimination of the Lagrange system on a quadrature grid, compared
    # against the closed-form synthesis, both as coefficients and pointwise
    table = build_eigenvalue_table(0.75, 2)
    ms = build_moving_spectrum(table, 0.5, 1.0, 2)
    T = 1.05 * horizon_threshold(1.0, ms.gamma)
    gram = ctl.assemble_gram(ms, OMEGA0, T)
    data = ctl.random_initial_data(ms, seed=9)
    msys = ctl.assemble_moments(data, ms)
    cf = ctl.synthesize_control(msys, gram)

    tg, tw = np.polynomial.legendre.leggauss(320)
    t = 0.5 * T * (tg + 1)
    tw = 0.5 * T * tw
    xg, xw = np.polynomial.legendre.leggauss(48)
    x = 0.3 * xg
    xw = 0.3 * xw
    lam = np.array([ms.eigenvalue(n, j) for n, j in gram.modes])
    kap = np.array([ms.kappa(n) for n, _ in gram.modes])
    K = np.einsum("mt,mx->mtx", np.exp(-np.conj(lam)[:, None] * t[None, :]), np.exp(-1j * kap[:, None] * x[None, :]))
    W = np.einsum("t,x->tx", tw, xw)
    # eliminating u from [2W I ; M 0] gives the quadrature Gram system
    Ghat = np.einsum("mtx,ntx,tx->mn", np.conj(K), K, W)
    a_oracle = np.linalg.solve(Ghat.T, msys.b)  # Ghat[m,n] = G[n,m]
    assert np.max(np.abs(a_oracle - cf.a)) <= 1e-8 * max(np.max(np.abs(cf.a)), 1.0)
    u_oracle = np.einsum("m,mtx->tx", a_oracle, np.conj(K))
    u_direct = np.einsum("m,mtx->tx", cf.a, np.conj(K))
    assert np.max(np.abs(u_oracle - u_direct)) <= 1e-8 * np.max(np.abs(u_direct))


def test_regularized_method(setup):
    ms, T, gram = setup
    data = ctl.random_initial_data(ms, seed=13)
    msys = ctl.assemble_moments(data, ms)
    cf = ctl.synthesize_control(msys, gram, method="regularized")
    assert cf.residual <= 1e-8 * cf.rhs_norm
    assert cf.gram_condition["tau"] >= 0


def test_observability_certificate(setup):
    ms, T, gram = setup
    rep = ctl.certify_observability(ms, OMEGA0, T, trials=150, seed=4, gram=gram)
    assert rep.passed and rep.c_obs_hat > 0 and rep.min_rhs > 0
    # single mode: the reciprocal ratio is rho^2 times the diagonal entry
    i = gram.modes.index((2, 2))
    rho = ms.rho(2)
    a = np.zeros(len(gram.modes), dtype=complex)
    a[i] = 1.0
    rhs = float(np.real(np.conj(a) @ gram.G @ a))
    assert rhs == pytest.approx(gram.G[i, i].real)
    assert (1 / rho**2) / rhs <= rep.c_obs_hat + 1e-12


def test_control_exports(tmp_path, setup):
    ms, T, gram = setup
    data = ctl.random_initial_data(ms, seed=1)
    cf = ctl.synthesize_control(ctl.assemble_moments(data, ms), gram)
    cf.to_json(tmp_path / "control.json")
    cf.sample_csv(tmp_path / "u.csv", nt=8, nx=6)
    import json

    man = json.loads((tmp_path / "control.json").read_text())
    assert len(man["coefficients"]) == len(gram.modes)
    assert (tmp_path / "u.csv").read_text().splitlines()[0] == "t,x,re_u,im_u"
