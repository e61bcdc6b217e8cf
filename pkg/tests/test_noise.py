import numpy as np
import pytest

from spinwell.dynamics import GalerkinState, evaluate
from spinwell.noise import (
    TruncationPsi,
    c_h_constant,
    constant_noise_family,
    diffusion_all,
    diffusion_G,
    diffusion_G_psi,
    ito_correction,
    ito_correction_galerkin,
    ito_correction_unprojected,
    make_noise_family,
)
from spinwell.oracles import dense_coupling, oracle_drift, oracle_fd_directional
from spinwell.spectral import build_magnetization_basis

from .conftest import make_state

PSI = TruncationPsi()


def test_psi_plateaus_and_support():
    assert PSI.value(np.array([0.0, 0.0, 0.0])) == 1.0
    assert PSI.value(np.array([2.9, 0.5, 0.0])) == 1.0
    assert PSI.value(np.array([5.0, 0.0, 0.0])) == 0.0
    assert PSI.value(np.array([3.0, 3.0, 3.0])) == 0.0
    assert np.all(PSI.grad(np.array([1.0, 1.0, 1.0])) == 0.0)


def test_psi_grid_scan_slope_bound():
    # radial scan through the transition shell: 0 <= psi <= 1, |grad psi| <= 1
    r = np.linspace(0.0, 6.0, 6001)
    x = np.zeros((3, r.size, 1, 1))
    x[0, :, 0, 0] = r * 0.6
    x[1, :, 0, 0] = r * 0.8
    v = PSI.value(x)
    g = np.linalg.norm(PSI.grad(x), axis=0)
    assert v.min() >= 0.0 and v.max() <= 1.0
    assert g.max() <= 1.0
    assert g.max() == pytest.approx(15.0 / 16.0, rel=1e-6)
    assert np.all(np.diff(v.ravel()) <= 0.0)


@pytest.mark.parametrize("r", [2.0, 3.3, 4.0, 4.9])
def test_psi_gradient_matches_fd(r, rng):
    d = rng.standard_normal(3)
    x = r * d / np.linalg.norm(d)
    u = rng.standard_normal(3)
    fd = oracle_fd_directional(PSI.value, x, u, h=1e-6)
    assert fd == pytest.approx(PSI.grad(x) @ u, rel=1e-6, abs=1e-9)


def test_noise_family_layout():
    hb = build_magnetization_basis((2.0, 3.0, 1.5), (3, 3, 2))
    fam = make_noise_family(hb, J=5, amplitude=0.4, decay=2.0)
    assert fam.J == 5
    assert np.allclose(fam.amplitudes, 0.4 * np.arange(1, 6) ** -2.0)
    # each mode field has sup norm 1 before scaling
    for j in range(5):
        assert np.abs(fam.grid[j]).max() == pytest.approx(1.0, rel=1e-2)
    # the first mode is the constant in direction x
    assert np.allclose(fam.grid[0][0], 1.0) and np.allclose(fam.grid[0][1:], 0.0)
    assert fam.restricted(2).J == 2
    assert np.allclose(fam.scaled(2.0).coeffs, 2.0 * fam.coeffs)
    with pytest.raises(ValueError):
        make_noise_family(hb, J=1000)


def test_c_h_constant():
    hb = build_magnetization_basis((2.0, 3.0, 1.5), (2, 2, 2))
    assert c_h_constant(make_noise_family(hb, J=0), hb) == 0.0
    one = constant_noise_family(hb, [[1.0, 0.0, 0.0]])
    # |h|_Linf = 1 and |h|^2_W12 = |D|
    assert c_h_constant(one, hb) == pytest.approx(1.0 + hb.volume)
    vals = [c_h_constant(make_noise_family(hb, J=J), hb) for J in range(1, 7)]
    assert np.all(np.diff(vals) > 0)


def test_diffusion_matches_oracle_and_is_orthogonal(small_system, rng):
    bases = small_system.bases
    st = make_state(bases, rng, 0.2)
    ev = evaluate(st, small_system)
    _, g_ref, _ = oracle_drift(st, small_system, coupling=dense_coupling(bases))
    assert np.allclose(ev.g, g_ref, atol=1e-12)
    for j in range(small_system.noise.J):
        gj = diffusion_G(j, st.m, bases.h, small_system.noise, PSI, 0.8, 0.6)
        assert np.allclose(gj, ev.g[j], atol=1e-13)
        assert abs(np.sum(st.m * gj)) < 1e-12 * np.sum(st.m**2)
    with pytest.raises(IndexError):
        diffusion_G(99, st.m, bases.h, small_system.noise, PSI, 0.8, 0.6)


def test_galerkin_correction_matches_oracle(small_system, rng):
    bases = small_system.bases
    st = make_state(bases, rng, 0.2)
    ev = evaluate(st, small_system)
    _, _, corr = oracle_drift(st, small_system, coupling=dense_coupling(bases))
    assert np.allclose(ev.correction(small_system, "galerkin"), corr, atol=1e-12)


def test_galerkin_correction_is_chain_rule_of_projected_map(small_system, rng):
    # 1/2 sum_j DG_jn(M)[G_jn(M)] by central differences of the projected map,
    # at a state reaching into the psi transition shell
    bases = small_system.bases
    hb = bases.h
    st = make_state(bases, rng, 1.0)
    st = GalerkinState(st.m * 3.4, st.b, st.e)
    m_grid = hb.synthesize(st.m)
    r = np.linalg.norm(m_grid, axis=0)
    assert r.min() < 3.0 < r.max()
    fam, l1, l2 = small_system.noise, 0.8, 0.6

    def G(m):
        return diffusion_all(hb.synthesize(m), hb, fam, PSI, l1, l2)

    g = G(st.m)
    fd = sum(oracle_fd_directional(lambda m: G(m)[j], st.m, g[j], h=1e-6) for j in range(fam.J))
    exact = ito_correction_galerkin(m_grid, hb, fam, PSI, l1, l2)
    assert np.allclose(exact, 0.5 * fd, atol=1e-7 * np.abs(exact).max())


def test_unprojected_correction_matches_fd(small_system, rng):
    hb = small_system.bases.h
    st = make_state(small_system.bases, rng, 0.2)
    m_grid = hb.synthesize(st.m)
    fam = small_system.noise
    for j in range(fam.J):

        def Gpsi(x):
            return diffusion_G_psi(j, x, fam, PSI, 0.8, 0.6)

        fd = oracle_fd_directional(Gpsi, m_grid, Gpsi(m_grid), h=1e-5)
        exact = ito_correction_unprojected(m_grid, fam, PSI, 0.8, 0.6, j=j)
        assert np.abs(exact - fd).max() <= 1e-5 * max(np.abs(exact).max(), 1e-300)


def test_corrections_agree_for_constant_fields():
    # constant M and constant noise: every product is constant, projections are exact
    hb = build_magnetization_basis((1.0, 2.0, 1.5), (2, 2, 2))
    fam = constant_noise_family(hb, [[0.3, 0.0, 0.1], [0.0, -0.2, 0.4]])
    m = np.zeros(hb.shape)
    m[:, 0, 0, 0] = np.sqrt(hb.volume) * np.array([0.6, 0.0, 0.8])
    g = hb.synthesize(m)
    a = ito_correction_galerkin(g, hb, fam, PSI, 1.1, 0.7)
    b = ito_correction(g, hb, fam, PSI, 1.1, 0.7)
    c = hb.project(ito_correction_unprojected(g, fam, PSI, 1.1, 0.7))
    assert np.allclose(a, b, atol=1e-14)
    assert np.allclose(a, c, atol=1e-14)


def test_five_term_correction_differs_from_chain_rule(small_system, rng):
    # for band-limited non-constant states the inner projections matter
    bases = small_system.bases
    st = make_state(bases, rng, 0.5)
    ev = evaluate(st, small_system)
    a = ev.correction(small_system, "galerkin")
    b = ev.correction(small_system, "five-term")
    assert np.abs(a - b).max() > 1e-8 * np.abs(a).max()


def test_empty_family():
    hb = build_magnetization_basis((1.0, 1.0, 1.0), (2, 2, 2))
    fam = make_noise_family(hb, J=0)
    g = hb.synthesize(np.ones(hb.shape))
    assert diffusion_all(g, hb, fam, PSI, 1.0, 1.0).shape == (0,) + hb.shape
    assert np.all(ito_correction_galerkin(g, hb, fam, PSI, 1.0, 1.0) == 0.0)
    assert np.all(ito_correction(g, hb, fam, PSI, 1.0, 1.0) == 0.0)
