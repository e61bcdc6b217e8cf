import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinwell.oracles import dense_coupling, dense_h
from spinwell.spectral import (
    BasisError,
    apply_curl,
    apply_laplacian,
    build_bases,
    build_magnetization_basis,
    cross,
    divergence_Y,
    extend_by_zero,
    inner_product,
    project_H,
    restrict_to_D,
    synthesize,
)


def _explicit_y(basis, c):
    """Y_n synthesis with explicit cos/sin at every torus node."""
    X = basis.grid_points()
    P = basis.n_half
    k = basis.wave_vectors[1 : 1 + P]
    phase = np.einsum("pi,ixyz->pxyz", k, X)
    s = np.sqrt(2.0 / basis.volume)
    out = c[:, 0, None, None, None] / np.sqrt(basis.volume) * np.ones(X.shape[1:])
    out = out + s * np.einsum("cp,pxyz->cxyz", c[:, 1 : 1 + P], np.cos(phase))
    out = out + s * np.einsum("cp,pxyz->cxyz", c[:, 1 + P :], np.sin(phase))
    return out


def test_h_roundtrip_is_exact(small_bases, rng):
    hb = small_bases.h
    c = rng.standard_normal(hb.shape)
    assert np.allclose(hb.project(hb.synthesize(c)), c, atol=1e-13)


def test_h_synthesis_matches_explicit_cosines(small_bases, rng):
    hb = small_bases.h
    c = rng.standard_normal(hb.shape)
    d = dense_h(hb, factor=1)
    assert np.allclose(hb.synthesize(c), d.synth(c), atol=1e-12)
    assert np.allclose(hb.gradient_grid(c), d.grad(c), atol=1e-11)


def test_h_basis_is_orthonormal_on_fine_grid(small_bases):
    # the fine oracle grid integrates products of two modes exactly
    hb = small_bases.h
    n = int(np.prod(hb.modes_per_axis))
    eye = np.eye(n).reshape((n, 1) + hb.modes_per_axis)
    d = dense_h(hb, factor=2)
    vals = d.synth(eye)[:, 0]
    gram = d.weight * np.einsum("aijk,bijk->ab", vals, vals)
    assert np.allclose(gram, np.eye(n), atol=1e-12)


def test_laplacian_by_parts(small_bases, rng):
    # <-Lap u, v> = sum_i <d_i u, d_i v> with gradients from explicit tables
    hb = small_bases.h
    u = rng.standard_normal(hb.shape)
    v = rng.standard_normal(hb.shape)
    lhs = -float(np.sum(apply_laplacian(u, hb) * v))
    d = dense_h(hb, factor=2)
    rhs = d.integrate(d.grad(u) * d.grad(v))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_neumann_eigenvalues(small_bases):
    hb = small_bases.h
    L = hb.box_lengths
    assert hb.eigenvalues[0, 0, 0] == 0.0
    assert hb.eigenvalues[1, 2, 1] == pytest.approx((np.pi / L[0]) ** 2 + (2 * np.pi / L[1]) ** 2 + (np.pi / L[2]) ** 2)


def test_y_roundtrip_and_explicit_synthesis(small_bases, rng):
    y = small_bases.y
    c = rng.standard_normal(y.shape)
    g = y.synthesize(c)
    assert np.allclose(g, _explicit_y(y, c), atol=1e-12)
    assert np.allclose(y.project(g), c, atol=1e-12)


def test_curl_identities(small_bases, rng):
    y = small_bases.y
    c = rng.standard_normal(y.shape)
    # div curl = 0 exactly
    assert np.abs(y.divergence(y.curl(c))).max() < 1e-13
    # curl curl u = |k|^2 u - k (k.u)
    k = y.wave_vectors.T
    expect = np.sum(k * k, axis=0) * c - k * np.sum(k * c, axis=0)
    assert np.allclose(y.curl(y.curl(c)), expect, atol=1e-12)
    # curl is symmetric in the L2 inner product
    d = rng.standard_normal(y.shape)
    assert np.sum(y.curl(c) * d) == pytest.approx(np.sum(c * y.curl(d)), rel=1e-12)


def test_curl_matches_spectral_derivative_on_grid(small_bases, rng):
    y = small_bases.y
    c = rng.standard_normal(y.shape)
    g = y.synthesize(c)
    N = y.quad_nodes_per_axis
    freqs = [2 * np.pi * np.fft.fftfreq(n, d=h) for n, h in zip(N, y.spacing)]

    def deriv(f, axis):
        F = np.fft.fft(f, axis=axis)
        shape = [1, 1, 1]
        shape[axis] = -1
        return np.real(np.fft.ifft(1j * freqs[axis].reshape(shape) * F, axis=axis))

    curl = np.stack(
        (
            deriv(g[2], 1) - deriv(g[1], 2),
            deriv(g[0], 2) - deriv(g[2], 0),
            deriv(g[1], 0) - deriv(g[0], 1),
        )
    )
    assert np.allclose(y.synthesize(y.curl(c)), curl, atol=1e-10)


def test_coupling_matches_dense_quadrature(small_bases, rng):
    cp = dense_coupling(small_bases)
    m = rng.standard_normal(small_bases.h.shape)
    c = rng.standard_normal(small_bases.y.shape)
    assert np.allclose(small_bases.project_extension(m), cp.extension(m), atol=1e-12)
    assert np.allclose(small_bases.restrict_Y_to_H(c), cp.restrict(c), atol=1e-12)
    assert np.allclose(small_bases.project_indicator(c), cp.indicator(c), atol=1e-12)


def test_coupling_adjoint_and_contraction(small_bases, rng):
    m = rng.standard_normal(small_bases.h.shape)
    c = rng.standard_normal(small_bases.y.shape)
    d = rng.standard_normal(small_bases.y.shape)
    lhs = np.sum(small_bases.project_extension(m) * c)
    assert lhs == pytest.approx(np.sum(m * small_bases.restrict_Y_to_H(c)), rel=1e-12)
    a = np.sum(small_bases.project_indicator(c) * d)
    assert a == pytest.approx(np.sum(c * small_bases.project_indicator(d)), rel=1e-12)
    # Bessel: |pi^Y Mbar| <= |M|, |1_D u| <= |u|
    assert np.sum(small_bases.project_extension(m) ** 2) <= np.sum(m * m)
    assert 0.0 <= small_bases.norm_sq_on_D(c) <= np.sum(c * c)


def test_grid_coupling_agrees_with_torus_transform(small_bases, rng):
    c = rng.standard_normal(small_bases.y.shape)
    full = small_bases.y.synthesize(c)
    assert np.allclose(small_bases.y_on_D(c), small_bases.restrict(full), atol=1e-12)
    f = rng.standard_normal(small_bases.h.grid_shape)
    assert np.allclose(small_bases.project_from_D(f), small_bases.y.project(small_bases.extend(f)), atol=1e-12)


def test_extension_and_indicator(small_bases, rng):
    f = rng.standard_normal(small_bases.h.grid_shape)
    ext = small_bases.extend(f)
    assert np.array_equal(small_bases.restrict(ext), f)
    assert np.sum(ext**2) == pytest.approx(np.sum(f**2))
    assert small_bases.indicator_T().sum() == np.prod(small_bases.h.quad_nodes_per_axis)


def test_box_sits_inside_torus(small_bases):
    for o, N, NT in zip(small_bases.offset, small_bases.h.quad_nodes_per_axis, small_bases.y.quad_nodes_per_axis):
        assert 1 <= o and o + N <= NT


def test_cross_matches_numpy(rng):
    a = rng.standard_normal((3, 4, 5, 6))
    b = rng.standard_normal((3, 4, 5, 6))
    assert np.allclose(cross(a, b), np.cross(a, b, axis=0))


def test_gridfield_operations(small_bases, rng):
    hb = small_bases.h
    c = rng.standard_normal(hb.shape)
    f = synthesize(c, hb)
    assert f.domain == "D"
    assert np.allclose(project_H(f, hb), c)
    t = extend_by_zero(f, small_bases)
    assert t.domain == "T"
    assert np.array_equal(restrict_to_D(t, small_bases).values, f.values)
    assert inner_product(f, f, "D", small_bases) == pytest.approx(np.sum(c * c))
    with pytest.raises(BasisError):
        project_H(t, hb)
    with pytest.raises(BasisError):
        apply_curl(c, small_bases.y)
    cy = rng.standard_normal(small_bases.y.shape)
    assert divergence_Y(cy, small_bases.y).shape == (small_bases.y.n_scalar,)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(box_lengths=(1, 1, 1), modes_per_axis=(2, 2, 2), quad_nodes_per_axis=(8, 9, 9)),
        dict(box_lengths=(1, -1, 1), modes_per_axis=(2, 2, 2)),
        dict(box_lengths=(1, 1, 1), modes_per_axis=(0, 2, 2)),
    ],
)
def test_magnetization_basis_rejects(kwargs):
    with pytest.raises(BasisError):
        build_magnetization_basis(**kwargs)


def test_bases_reject_bad_torus():
    with pytest.raises(BasisError):
        build_bases((1.0, 1.0, 1.0), (2, 2, 2), (1, 1, 1), torus_lengths=(1.0, 2.0, 2.0))
    with pytest.raises(BasisError):
        build_bases((1.0, 1.0, 1.0), (2, 2, 2), (1, 1, 1), torus_lengths=(2.05, 2.0, 2.0))


@settings(max_examples=25, deadline=None)
@given(
    n=st.tuples(*[st.integers(1, 4)] * 3),
    L=st.tuples(*[st.floats(0.5, 5.0)] * 3),
    seed=st.integers(0, 2**31),
)
def test_projection_is_left_inverse_of_synthesis(n, L, seed):
    hb = build_magnetization_basis(L, n)
    c = np.random.default_rng(seed).standard_normal(hb.shape)
    assert np.allclose(hb.project(hb.synthesize(c)), c, atol=1e-12)
