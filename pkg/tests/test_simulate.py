"""Exact modal propagation, duality, frame maps, and the ODE oracle."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from memwave import control as ctl
from memwave import simulate as sim
from memwave.biorthogonal import horizon_threshold
from memwave.fractional import build_eigenvalue_table
from memwave.moving import build_moving_spectrum

OMEGA0 = (-0.3, 0.3)


@pytest.fixture(scope="module")
def world():
    table = build_eigenvalue_table(0.75, 8)
    ms = build_moving_spectrum(table, 0.5, 1.0, 8)
    T = 1.05 * horizon_threshold(1.0, ms.gamma)
    gram = ctl.assemble_gram(ms, OMEGA0, T)
    data = ctl.random_initial_data(ms, seed=3)
    cf = ctl.synthesize_control(ctl.assemble_moments(data, ms), gram)
    simulator = sim.GalerkinSimulator(ms, OMEGA0)
    return ms, T, data, cf, simulator


def mode_rhs(ms, n, amps, expos):
    rho, kap, M, c = ms.rho(n), ms.kappa(n), ms.M, ms.c

    def rhs(t, y):
        xi, xid, zeta = y[0] + 1j * y[1], y[2] + 1j * y[3], y[4] + 1j * y[5]
        g = np.sum(amps * np.exp(expos * t)) if len(amps) else 0.0
        xidd = -(rho - c**2 * kap**2) * xi - 2j * c * kap * xid + M * zeta + g
        zetad = rho * xi - 1j * c * kap * zeta
        return [xid.real, xid.imag, xidd.real, xidd.imag, zetad.real, zetad.imag]

    return rhs


def test_step_exact_vs_ode_oracle(world):
    # 20 random single-mode problems against an adaptive high-order integrator
    ms, T, data, cf, simulator = world
    rng = np.random.default_rng(12)
    forcing = simulator.bind_forcing(cf)
    horizon = 4.0
    for trial in range(20):
        n = int(rng.choice(simulator.ns))
        x0 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        state = sim.GalerkinState(
            t=0.0, ns=simulator.ns.copy(),
            xi=np.zeros(len(simulator.ns), complex),
            xi_dot=np.zeros(len(simulator.ns), complex),
            zeta=np.zeros(len(simulator.ns), complex),
        )
        i = int(np.nonzero(simulator.ns == n)[0][0])
        state.xi[i], state.xi_dot[i], state.zeta[i] = x0
        out = simulator.step_exact(state, forcing, horizon)
        amps, expos = forcing[n]
        y0 = [x0[0].real, x0[0].imag, x0[1].real, x0[1].imag, x0[2].real, x0[2].imag]
        sol = solve_ivp(mode_rhs(ms, n, amps, expos), (0, horizon), y0,
                        method="DOP853", rtol=1e-12, atol=1e-13)
        want = sol.y[:, -1]
        got = np.array([
            out.xi[i].real, out.xi[i].imag,
            out.xi_dot[i].real, out.xi_dot[i].imag,
            out.zeta[i].real, out.zeta[i].imag,
        ])
        scale = max(np.max(np.abs(want)), 1.0)
        assert np.max(np.abs(got - want)) <= 1e-8 * scale, (trial, n)


def test_step_is_dt_free(world):
    ms, T, data, cf, simulator = world
    forcing = simulator.bind_forcing(cf)
    s0 = simulator.initial_state(data)
    one = simulator.step_exact(s0, forcing, 3.0)
    many = s0
    for _ in range(4):
        many = simulator.step_exact(many, forcing, 0.75)
    for field in ("xi", "xi_dot", "zeta"):
        a, b = getattr(one, field), getattr(many, field)
        assert np.max(np.abs(a - b)) <= 1e-10 * max(np.max(np.abs(a)), 1e-30)


def test_homogeneous_reversibility(world):
    # branch spreads grow like e^{1.5|M| t}, so the 1e-9 round-trip demand is
    # representable in doubles up to t ~ 20; check it over half the horizon
    ms, T, data, cf, simulator = world
    zero_forcing = simulator.bind_forcing(None)
    s0 = simulator.initial_state(data)
    t_rev = T / 2.0
    fwd = simulator.step_exact(s0, zero_forcing, t_rev)
    back = simulator.step_exact(fwd, zero_forcing, -t_rev)
    scale = max(np.max(np.abs(v)) for v in (s0.xi, s0.xi_dot, fwd.xi, fwd.zeta))
    for field in ("xi", "xi_dot", "zeta"):
        a, b = getattr(back, field), getattr(s0, field)
        assert np.max(np.abs(a - b)) <= 1e-9 * scale


def test_memory_consistency(world):
    # zeta_n(t) equals the transport-phased time integral of rho xi_n
    ms, T, data, cf, simulator = world
    forcing = simulator.bind_forcing(cf)
    t_end = 5.0
    nodes, weights = np.polynomial.legendre.leggauss(180)
    tau = 0.5 * t_end * (nodes + 1)
    wq = 0.5 * t_end * weights
    s0 = simulator.initial_state(data)
    xi_at = {}
    for tv in tau:
        st = simulator.step_exact(s0, forcing, float(tv))
        xi_at[tv] = st.xi.copy()
    end = simulator.step_exact(s0, forcing, t_end)
    for i, n in enumerate(simulator.ns[:6]):
        rho, kap = ms.rho(int(n)), ms.kappa(int(n))
        integrand = np.array([
            np.exp(-1j * ms.c * kap * (t_end - tv)) * rho * xi_at[tv][i] for tv in tau
        ])
        want = np.sum(wq * integrand)
        assert end.zeta[i] == pytest.approx(want, rel=1e-8, abs=1e-12)


def test_spectral_consistency(world):
    # eigenvalues of the assembled per-mode block match mu - i c kappa
    ms, T, data, cf, simulator = world
    for n in (-5, 2, 8):
        rho, kap, M, c = ms.rho(n), ms.kappa(n), ms.M, ms.c
        A = np.array([
            [0, 1, 0],
            [-(rho - c**2 * kap**2), -2j * c * kap, M],
            [rho, 0, -1j * c * kap],
        ])
        got = np.sort_complex(np.linalg.eigvals(A))
        want = np.sort_complex(simulator.props[n].nu)
        assert np.max(np.abs(got - want)) <= 1e-9 * max(1.0, np.max(np.abs(want)))
        assert simulator.props[n].characteristic_residual(ms.M) <= 1e-10 * (abs(ms.M) * rho + abs(ms.M) ** 3)


def test_plane_wave_gram_properties(world):
    ms, T, data, cf, simulator = world
    g = simulator.gram
    assert np.allclose(np.diag(g.entries), 2.0)
    assert np.max(np.abs(g.entries - g.entries.T)) < 1e-14
    assert g.deviation > 0.5  # the family is far from orthogonal
    moved = g.entries_at(1.3, ms.c)
    assert np.allclose(np.diag(moved), 2.0)
    assert np.max(np.abs(moved - moved.conj().T)) < 1e-12


def test_null_control_terminal(world):
    ms, T, data, cf, simulator = world
    _, rep = simulator.run_to_T(data, cf, T, precision="mp")
    assert rep.passed
    assert all(r <= 1e-6 for r in rep.ratios.values())
    # float64 path agrees at its own accuracy
    _, repf = simulator.run_to_T(data, cf, T)
    assert all(r <= 1e-6 for r in repf.ratios.values())


def test_frame_covariance(world):
    # fixed frame with the moving-support control equals the moving frame
    # result mapped at T
    ms, T, data, cf, simulator = world
    t_end = 3.0
    forcing = simulator.bind_forcing(cf)
    moving_state = simulator.step_exact(simulator.initial_state(data), forcing, t_end)
    fixed_sim = sim.GalerkinSimulator(ms, OMEGA0, frame="fixed")
    s0 = simulator.initial_state(data)
    s0_fixed = sim.map_frames(s0, ms, "moving_to_fixed")
    fixed_state = fixed_sim.step_exact(s0_fixed, fixed_sim.bind_forcing(cf), t_end)
    mapped = sim.map_frames(fixed_state, ms, "fixed_to_moving")
    for field in ("xi", "xi_dot", "zeta"):
        a, b = getattr(mapped, field), getattr(moving_state, field)
        assert np.max(np.abs(a - b)) <= 1e-7 * max(np.max(np.abs(b)), 1e-30)


def test_frame_roundtrip_and_t0(world):
    ms, T, data, cf, simulator = world
    s0 = simulator.initial_state(data)
    # at t = 0 the frames coincide
    fixed = sim.map_frames(s0, ms, "moving_to_fixed")
    assert np.allclose(fixed.xi, s0.xi)
    back = sim.map_frames(fixed, ms, "fixed_to_moving")
    assert np.allclose(back.xi, s0.xi) and np.allclose(back.xi_dot, s0.xi_dot)
    st = simulator.step_exact(s0, simulator.bind_forcing(None), 2.0)
    rt = sim.map_frames(sim.map_frames(st, ms, "moving_to_fixed"), ms, "fixed_to_moving")
    for field in ("xi", "xi_dot", "zeta"):
        assert np.max(np.abs(getattr(rt, field) - getattr(st, field))) < 1e-12


def test_duality_identity(world):
    ms, T, data, cf, simulator = world
    rng = np.random.default_rng(77)
    modes = [(n, j) for n in ms.mode_indices() for j in (1, 2, 3)]
    for _ in range(10):
        coeffs = {mk: complex(rng.standard_normal(), rng.standard_normal()) for mk in modes}
        res = sim.verify_duality(data, cf, coeffs, T, ms)
        assert res <= 1e-5, res


def test_duality_single_mode_matches_moment(world):
    # adjoint data on a single eigenvector reduces the identity to one moment
    ms, T, data, cf, simulator = world
    msys = ctl.assemble_moments(data, ms)
    mk = (2, 3)
    lam = ms.eigenvalue(*mk)
    res = sim.verify_duality(data, cf, {mk: 1.0}, T, ms)
    assert res <= 1e-6
    # and the left side equals e^{conj(lam) T} times the moment value
    qm = ctl.quadrature_moments(cf, ms)
    i = cf.modes.index(mk)
    lhs_expected = np.exp(np.conj(lam) * T) * msys.b[i]
    assert qm[i] == pytest.approx(msys.b[i], rel=1e-7)
    assert np.isfinite(lhs_expected)


def test_energy_envelope_report(world):
    # uncontrolled runs stay under C (1 + C|M| e^{C|M| t}) times the data norm
    ms, T, data, cf, simulator = world
    s0 = simulator.initial_state(data)
    zero_forcing = simulator.bind_forcing(None)
    base = sum(simulator.weighted_norms(s0).values())
    times = np.linspace(0.5, T, 12)
    sups = []
    for tv in times:
        st = simulator.step_exact(s0, zero_forcing, float(tv))
        sups.append(sum(simulator.weighted_norms(st).values()))
    M = abs(ms.M)
    fit = None
    for C in np.linspace(0.1, 50, 400):
        env = C * (1 + C * M * np.exp(C * M * times)) * base
        if np.all(np.array(sups) <= env):
            fit = C
            break
    assert fit is not None and fit < 50.0


def test_exact_gram_projection_reported(world):
    # the exact-Gram projection is a diagnostic variant: it runs, reports
    # the Gram deviation, and its terminal norms are not claimed small
    ms, T, data, cf, simulator = world
    sim_exact = sim.GalerkinSimulator(ms, OMEGA0, projection="exact_gram")
    _, rep = sim_exact.run_to_T(data, cf, T)
    assert rep.projection == "exact_gram"
    assert rep.gram_deviation > 0.5
    assert np.isfinite(sum(rep.norms.values()))


def test_terminal_report_json(tmp_path, world):
    ms, T, data, cf, simulator = world
    _, rep = simulator.run_to_T(data, cf, T, n_checkpoints=6)
    rep.to_json(tmp_path / "terminal.json")
    rep.trajectory_csv(tmp_path / "trajectory.csv")
    import json

    d = json.loads((tmp_path / "terminal.json").read_text())
    assert "ratios" in d and d["projection"] == "orthogonal"
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,norm_xi,norm_xi_dot,norm_zeta"
    assert len(lines) == 7
