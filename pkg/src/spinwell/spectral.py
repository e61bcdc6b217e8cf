"""Discrete function spaces for the magnetization and the electromagnetic fields.

The ferromagnet occupies the box ``D = [0, L1] x [0, L2] x [0, L3]``.  The
magnetization lives in the span of tensor-product Neumann cosines on ``D``;
the fields ``B`` and ``E`` live in a span of real Fourier modes on a periodic
torus ``T`` that strictly contains ``D``.

Both spaces are sampled on uniform tensor grids with identical spacing.  The
``D`` grid uses cell midpoints (the DCT-II nodes) and sits node-aligned inside
the ``T`` grid, so extension by zero and restriction are plain index copies.
Projections of grid fields are discrete quadrature projections.  The three
linear maps coupling the two spaces (``pi^Y`` of a zero-extended ``H_n``
element, ``pi_n`` of ``1_D u`` and ``pi^Y`` of ``1_D u`` for ``u`` in ``Y_n``)
are exact ``L2`` projections, computed from closed-form one-dimensional
integrals.  Every coefficient-space identity used by the dynamics therefore
holds to rounding error, and the coupling does not depend on the grid.

Array conventions
-----------------
* ``CoeffsH``: ``(..., 3, n1, n2, n3)``, one vector triple per cosine mode.
* ``CoeffsY``: ``(..., 3, NY)``: column 0 is the constant mode, then
  ``cos(k.x)`` for every half-space wave vector, then ``sin(k.x)`` in the
  same order.
* grid values: ``(..., 3, N1, N2, N3)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

__all__ = [
    "GridField",
    "MagnetizationBasis",
    "EMBasis",
    "SpectralBases",
    "build_magnetization_basis",
    "build_em_basis",
    "build_bases",
    "project_H",
    "project_Y",
    "synthesize",
    "apply_laplacian",
    "apply_curl",
    "divergence_Y",
    "extend_by_zero",
    "restrict_to_D",
    "inner_product",
    "cross",
]


class BasisError(ValueError):
    """Raised for malformed bases, grids or coefficient arrays."""


def _triple(x, name, kind=float):
    raw = np.broadcast_to(np.asarray(x, dtype=float), (3,))
    if kind is int and np.any(raw != np.round(raw)):
        raise BasisError(f"{name} must be integers, got {x!r}")
    return tuple(kind(v) for v in raw)


def cross(a, b):
    """Pointwise cross product of fields with the vector axis at position -4."""
    out = np.empty(np.broadcast_shapes(np.shape(a), np.shape(b)), dtype=np.result_type(a, b))
    a0, a1, a2 = a[..., 0, :, :, :], a[..., 1, :, :, :], a[..., 2, :, :, :]
    b0, b1, b2 = b[..., 0, :, :, :], b[..., 1, :, :, :], b[..., 2, :, :, :]
    for i, (p, q, r, s) in enumerate(((a1, b2, a2, b1), (a2, b0, a0, b2), (a0, b1, a1, b0))):
        o = out[..., i, :, :, :]
        np.multiply(p, q, out=o)
        o -= r * s
    return out


def dot(a, b):
    """Pointwise dot product over the vector axis (position -4)."""
    return np.einsum("...ixyz,...ixyz->...xyz", a, b)


def _apply_tensor(a, m1, m2, m3):
    """Contract the last three axes of ``a`` with ``m1``, ``m2``, ``m3``.

    ``a`` has shape ``(..., p1, p2, p3)`` and ``mi`` has shape ``(qi, pi)``.
    """
    lead = a.shape[:-3]
    p1, p2, p3 = a.shape[-3:]
    L = int(np.prod(lead, dtype=int))
    if L == 0:
        dtype = np.result_type(a, m1, m2, m3)
        return np.zeros(lead + (m1.shape[0], m2.shape[0], m3.shape[0]), dtype=dtype)
    a = (np.ascontiguousarray(a).reshape(-1, p3) @ m3.T).reshape(L, p1, p2, -1)
    a = np.matmul(m2, a)
    q2, q3 = a.shape[-2:]
    a = (m1 @ a.reshape(L, p1, q2 * q3)).reshape(L, -1, q2, q3)
    return a.reshape(lead + a.shape[1:])


@dataclass(frozen=True)
class GridField:
    """Samples of a vector field on the ``D`` or ``T`` quadrature grid."""

    values: np.ndarray
    domain: str

    def __post_init__(self):
        if self.domain not in ("D", "T"):
            raise BasisError(f"domain must be 'D' or 'T', got {self.domain!r}")
        if self.values.ndim < 4 or self.values.shape[-4] != 3:
            raise BasisError(f"grid values must have shape (..., 3, N1, N2, N3), got {self.values.shape}")


@dataclass(frozen=True, eq=False)
class MagnetizationBasis:
    """Tensor Neumann-cosine eigenbasis of ``-Laplace`` on the box ``D``.

    Mode ``k = (k1, k2, k3)`` with ``0 <= ki < ni`` is
    ``prod_i c_{ki}(x_i)``, ``c_0 = 1/sqrt(Li)``,
    ``c_k = sqrt(2/Li) cos(pi k x / Li)``, with eigenvalue
    ``sum_i (pi ki / Li)**2``.
    """

    box_lengths: tuple
    modes_per_axis: tuple
    quad_nodes_per_axis: tuple
    eigenvalues: np.ndarray = field(repr=False)
    wavenumbers: tuple = field(repr=False)
    nodes: tuple = field(repr=False)
    _synth: tuple = field(repr=False)
    _proj: tuple = field(repr=False)
    _deriv: tuple = field(repr=False)

    @property
    def shape(self):
        """Coefficient array shape."""
        return (3,) + self.modes_per_axis

    @property
    def grid_shape(self):
        return (3,) + self.quad_nodes_per_axis

    @property
    def volume(self):
        return float(np.prod(self.box_lengths))

    @property
    def spacing(self):
        return tuple(L / N for L, N in zip(self.box_lengths, self.quad_nodes_per_axis))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def synthesize(self, c):
        return _apply_tensor(np.asarray(c, dtype=float), *self._synth)

    def project(self, f):
        return _apply_tensor(np.asarray(f, dtype=float), *self._proj)

    def gradient_grid(self, c):
        """Grid samples of ``d/dx_i`` of the synthesized field, shape ``(3, ..., 3, N...)``."""
        c = np.asarray(c, dtype=float)
        s = self._synth
        d = self._deriv
        return np.stack(
            (
                _apply_tensor(c, d[0], s[1], s[2]),
                _apply_tensor(c, s[0], d[1], s[2]),
                _apply_tensor(c, s[0], s[1], d[2]),
            )
        )

    def laplacian(self, c):
        return -self.eigenvalues * np.asarray(c, dtype=float)

    def inner(self, a, b):
        """Quadrature ``L2(D)`` inner product of grid samples."""
        return float(np.sum(a * b) * self.cell_volume)

    def grid_points(self):
        return np.stack(np.meshgrid(*self.nodes, indexing="ij"))


def _cosine_table(L, n, x):
    k = np.arange(n)
    table = np.sqrt(2.0 / L) * np.cos(np.pi * np.outer(x, k) / L)
    table[:, 0] = 1.0 / np.sqrt(L)
    return table


def _cosine_derivative_table(L, n, x):
    k = np.arange(n)
    kappa = np.pi * k / L
    return -np.sqrt(2.0 / L) * kappa * np.sin(np.outer(x, kappa))


def build_magnetization_basis(box_lengths, modes_per_axis, quad_nodes_per_axis=None):
    """Build the Neumann-cosine basis on ``D``.

    ``quad_nodes_per_axis`` defaults to ``4 n + 1`` per axis, the smallest
    grid accepted (quartic products of modes are then integrated exactly).
    """
    L = _triple(box_lengths, "box_lengths")
    n = _triple(modes_per_axis, "modes_per_axis", int)
    if any(v <= 0 for v in L):
        raise BasisError(f"box lengths must be positive, got {L}")
    if any(v <= 0 for v in n):
        raise BasisError(f"modes per axis must be positive, got {n}")
    if quad_nodes_per_axis is None:
        quad_nodes_per_axis = tuple(4 * v + 1 for v in n)
    N = _triple(quad_nodes_per_axis, "quad_nodes_per_axis", int)
    for ni, Ni in zip(n, N):
        if Ni < 4 * ni + 1:
            raise BasisError(
                f"quadrature needs >= 4n+1 nodes per axis for exactness, got {Ni} for n={ni}"
            )
    nodes = tuple((np.arange(Ni) + 0.5) * Li / Ni for Li, Ni in zip(L, N))
    synth = tuple(_cosine_table(Li, ni, x) for Li, ni, x in zip(L, n, nodes))
    proj = tuple((Li / Ni) * t.T for Li, Ni, t in zip(L, N, synth))
    deriv = tuple(_cosine_derivative_table(Li, ni, x) for Li, ni, x in zip(L, n, nodes))
    waves = tuple(np.pi * np.arange(ni) / Li for Li, ni in zip(L, n))
    k1, k2, k3 = np.meshgrid(*waves, indexing="ij")
    eig = k1**2 + k2**2 + k3**2
    eig.setflags(write=False)
    return MagnetizationBasis(L, n, N, eig, waves, nodes, synth, proj, deriv)


@dataclass(frozen=True, eq=False)
class EMBasis:
    """Real Fourier vector modes on the periodic torus ``T``.

    Scalar modes are the constant, ``sqrt(2/|T|) cos(k.x)`` and
    ``sqrt(2/|T|) sin(k.x)`` for wave vectors ``k = 2 pi m / T`` with
    ``|m_i| <= K_i`` and ``m`` in the half-space ``m3 > 0`` or
    ``(m3 = 0, m2 > 0)`` or ``(m3 = m2 = 0, m1 > 0)``.
    """

    torus_lengths: tuple
    modes_per_axis: tuple
    quad_nodes_per_axis: tuple
    wave_vectors: np.ndarray = field(repr=False)
    half_modes: np.ndarray = field(repr=False)

    @property
    def n_half(self):
        return len(self.half_modes)

    @property
    def n_scalar(self):
        return 1 + 2 * self.n_half

    @property
    def shape(self):
        return (3, self.n_scalar)

    @property
    def grid_shape(self):
        return (3,) + self.quad_nodes_per_axis

    @property
    def volume(self):
        return float(np.prod(self.torus_lengths))

    @property
    def spacing(self):
        return tuple(L / N for L, N in zip(self.torus_lengths, self.quad_nodes_per_axis))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def _indices(self):
        N = np.array(self.quad_nodes_per_axis)
        m = self.half_modes
        pos = tuple((m % N).T)
        neg = tuple(((-m) % N).T)
        return pos, neg

    def synthesize(self, c):
        c = np.asarray(c, dtype=float)
        N = self.quad_nodes_per_axis
        Ntot = float(np.prod(N))
        P = self.n_half
        lead = c.shape[:-1]
        X = np.zeros(lead + (N[0], N[1], N[2] // 2 + 1), dtype=complex)
        s = 0.5 * Ntot * np.sqrt(2.0 / self.volume)
        z = s * (c[..., 1 : 1 + P] - 1j * c[..., 1 + P :])
        (p1, p2, p3), (q1, q2, q3) = self._indices()
        X[..., p1, p2, p3] = z
        plane = self.half_modes[:, 2] == 0
        X[..., q1[plane], q2[plane], q3[plane]] = np.conj(z[..., plane])
        X[..., 0, 0, 0] = Ntot * c[..., 0] / np.sqrt(self.volume)
        return scipy.fft.irfftn(X, s=N, axes=(-3, -2, -1), workers=_workers())

    def project(self, f):
        f = np.asarray(f, dtype=float)
        F = scipy.fft.rfftn(f, axes=(-3, -2, -1), workers=_workers())
        w = self.cell_volume
        s = w * np.sqrt(2.0 / self.volume)
        (p1, p2, p3), _ = self._indices()
        vals = F[..., p1, p2, p3]
        out = np.empty(f.shape[:-3] + (self.n_scalar,))
        out[..., 0] = w * F[..., 0, 0, 0].real / np.sqrt(self.volume)
        out[..., 1 : 1 + self.n_half] = s * vals.real
        out[..., 1 + self.n_half :] = -s * vals.imag
        return out

    def curl(self, c):
        """Exact curl in coefficient space (acts within each wave vector)."""
        c = np.asarray(c, dtype=float)
        P = self.n_half
        kap = self.wave_vectors[1 : 1 + P].T  # (3, P)
        a = c[..., 1 : 1 + P]
        b = c[..., 1 + P :]
        out = np.zeros_like(c)
        # curl(a cos) = -(k x a) sin ; curl(b sin) = (k x b) cos
        out[..., 1 : 1 + P] = _cross_axis(kap, b)
        out[..., 1 + P :] = -_cross_axis(kap, a)
        return out

    def divergence(self, c):
        """Scalar coefficients (constant, cos, sin) of ``div u``."""
        c = np.asarray(c, dtype=float)
        P = self.n_half
        kap = self.wave_vectors[1 : 1 + P].T
        out = np.zeros(c.shape[:-2] + (self.n_scalar,))
        out[..., 1 : 1 + P] = np.sum(kap * c[..., 1 + P :], axis=-2)
        out[..., 1 + P :] = -np.sum(kap * c[..., 1 : 1 + P], axis=-2)
        return out

    def inner(self, a, b):
        return float(np.sum(a * b) * self.cell_volume)

    def grid_points(self):
        nodes = [np.arange(N) * h for N, h in zip(self.quad_nodes_per_axis, self.spacing)]
        return np.stack(np.meshgrid(*nodes, indexing="ij"))


def _cross_axis(k, v):
    """Cross product along axis -2 of ``k`` (3, P) with ``v`` (..., 3, P)."""
    return np.stack(
        (
            k[1] * v[..., 2, :] - k[2] * v[..., 1, :],
            k[2] * v[..., 0, :] - k[0] * v[..., 2, :],
            k[0] * v[..., 1, :] - k[1] * v[..., 0, :],
        ),
        axis=-2,
    )


def _half_space_modes(K):
    r = [np.arange(-k, k + 1) for k in K]
    m = np.stack(np.meshgrid(*r, indexing="ij"), axis=-1).reshape(-1, 3)
    keep = (m[:, 2] > 0) | ((m[:, 2] == 0) & (m[:, 1] > 0)) | (
        (m[:, 2] == 0) & (m[:, 1] == 0) & (m[:, 0] > 0)
    )
    m = m[keep]
    order = np.lexsort((m[:, 0], m[:, 1], m[:, 2], np.sum(m * m, axis=1)))
    return m[order]


def build_em_basis(torus_lengths, modes_per_axis, quad_nodes_per_axis):
    """Build the Fourier basis on ``T``.

    ``modes_per_axis`` is the largest wave-number index ``K_i`` per axis, so
    ``2 K_i + 1`` real functions span each axis.
    """
    Lt = _triple(torus_lengths, "torus_lengths")
    K = _triple(modes_per_axis, "em modes_per_axis", int)
    N = _triple(quad_nodes_per_axis, "em quad_nodes_per_axis", int)
    if any(v <= 0 for v in Lt):
        raise BasisError(f"torus lengths must be positive, got {Lt}")
    if any(v <= 0 for v in K):
        raise BasisError(f"em modes per axis must be positive, got {K}")
    for Ki, Ni in zip(K, N):
        if Ni < 2 * Ki + 1:
            raise BasisError(f"torus grid needs >= 2K+1 nodes per axis, got {Ni} for K={Ki}")
    m = _half_space_modes(K)
    kap = 2.0 * np.pi * m / np.array(Lt)
    waves = np.concatenate((np.zeros((1, 3)), kap, kap))
    waves.setflags(write=False)
    m.setflags(write=False)
    return EMBasis(Lt, K, N, waves, m)


@dataclass(frozen=True, eq=False)
class SpectralBases:
    """The pair ``(H_n, Y_n)`` with the node alignment of ``D`` inside ``T``.

    Besides full-torus transforms (through ``y``), it provides pruned
    transforms between ``Y_n`` and the ``D`` nodes only.  The dynamics never
    needs torus samples outside ``D``: the indicator ``1_D`` and the zero
    extension confine every grid product to the box.
    """

    h: MagnetizationBasis
    y: EMBasis
    offset: tuple
    _exp: tuple = field(repr=False, default=())
    _coup: tuple = field(repr=False, default=())
    _gram: tuple = field(repr=False, default=())

    def __post_init__(self):
        if self._exp:
            return
        tables, coup, gram = [], [], []
        for i in range(3):
            K = self.y.modes_per_axis[i]
            h = self.y.spacing[i]
            L = self.h.box_lengths[i]
            x = (self.offset[i] + np.arange(self.h.quad_nodes_per_axis[i])) * h
            m = np.arange(-K, K + 1)
            kap = 2.0 * np.pi * m / self.y.torus_lengths[i]
            tables.append(np.exp(1j * np.outer(x, kap)))
            # box edge in torus coordinates
            s = (self.offset[i] - 0.5) * h
            k = np.arange(self.h.modes_per_axis[i])
            beta = np.pi * k / L
            c = np.where(k == 0, np.sqrt(1.0 / L), np.sqrt(2.0 / L))
            ints = 0.5 * (_exp_integral(kap[:, None] + beta, L) + _exp_integral(kap[:, None] - beta, L))
            # coup[m, j] = int_0^L exp(i kap_m (x + s)) e_j(x) dx
            coup.append(np.exp(1j * kap * s)[:, None] * ints * c)
            d = kap[None, :] - kap[:, None]
            # gram[m, m'] = int_0^L exp(i (kap_m' - kap_m)(x + s)) dx
            gram.append(np.exp(1j * d * s) * _exp_integral(d, L))
        object.__setattr__(self, "_exp", tuple(tables))
        object.__setattr__(self, "_coup", tuple(coup))
        object.__setattr__(self, "_gram", tuple(gram))

    def _from_integrals(self, F):
        """Real ``Y_n`` coefficients from ``F[m] = int f exp(-i k_m . x)`` on the cube of indices."""
        K = self.y.modes_per_axis
        m = self.y.half_modes
        vals = F[..., m[:, 0] + K[0], m[:, 1] + K[1], m[:, 2] + K[2]]
        s = np.sqrt(2.0 / self.y.volume)
        out = np.empty(F.shape[:-3] + (self.y.n_scalar,))
        out[..., 0] = F[..., K[0], K[1], K[2]].real / np.sqrt(self.y.volume)
        out[..., 1 : 1 + self.y.n_half] = s * vals.real
        out[..., 1 + self.y.n_half :] = -s * vals.imag
        return out

    def _to_cube(self, c):
        K = self.y.modes_per_axis
        P = self.y.n_half
        s = 0.5 * np.sqrt(2.0 / self.y.volume)
        Z = np.zeros(c.shape[:-1] + tuple(2 * k + 1 for k in K), dtype=complex)
        z = s * (c[..., 1 : 1 + P] - 1j * c[..., 1 + P :])
        m = self.y.half_modes
        Z[..., m[:, 0] + K[0], m[:, 1] + K[1], m[:, 2] + K[2]] = z
        Z[..., K[0] - m[:, 0], K[1] - m[:, 1], K[2] - m[:, 2]] = np.conj(z)
        Z[..., K[0], K[1], K[2]] = c[..., 0] / np.sqrt(self.y.volume)
        return Z

    def y_on_D(self, c_y):
        """Samples of a ``Y_n`` element at the ``D`` nodes."""
        Z = self._to_cube(np.asarray(c_y, dtype=float))
        return _apply_tensor(Z, *self._exp).real

    def project_from_D(self, f):
        """``pi^Y`` of the zero extension of ``D`` grid samples ``f``."""
        f = np.asarray(f, dtype=float)
        e = self._exp
        F = _apply_tensor(f.astype(complex), e[0].conj().T, e[1].conj().T, e[2].conj().T)
        K = self.y.modes_per_axis
        m = self.y.half_modes
        vals = F[..., m[:, 0] + K[0], m[:, 1] + K[1], m[:, 2] + K[2]]
        w = self.y.cell_volume
        s = w * np.sqrt(2.0 / self.y.volume)
        out = np.empty(f.shape[:-3] + (self.y.n_scalar,))
        out[..., 0] = w * F[..., K[0], K[1], K[2]].real / np.sqrt(self.y.volume)
        out[..., 1 : 1 + self.y.n_half] = s * vals.real
        out[..., 1 + self.y.n_half :] = -s * vals.imag
        return out

    def extend(self, f):
        """Extension by zero from the ``D`` grid to the ``T`` grid."""
        f = np.asarray(f, dtype=float)
        out = np.zeros(f.shape[:-3] + self.y.quad_nodes_per_axis)
        out[self._slices] = f
        return out

    def restrict(self, f):
        return np.array(np.asarray(f)[self._slices])

    @property
    def _slices(self):
        N = self.h.quad_nodes_per_axis
        o = self.offset
        return (Ellipsis,) + tuple(slice(oi, oi + Ni) for oi, Ni in zip(o, N))

    def indicator_T(self):
        """``1_D`` sampled on the ``T`` grid."""
        chi = np.zeros(self.y.quad_nodes_per_axis)
        chi[self._slices] = 1.0
        return chi

    def project_extension(self, m_coeffs):
        """Exact ``pi^Y`` of the zero extension of an ``H_n`` element."""
        c = np.asarray(m_coeffs, dtype=float)
        a = self._coup
        F = _apply_tensor(c.astype(complex), a[0].conj(), a[1].conj(), a[2].conj())
        return self._from_integrals(F)

    def restrict_Y_to_H(self, c_y):
        """Exact ``pi_n [1_D u]`` for ``u`` in ``Y_n`` given by coefficients."""
        Z = self._to_cube(np.asarray(c_y, dtype=float))
        a = self._coup
        return _apply_tensor(Z, a[0].T, a[1].T, a[2].T).real

    def project_indicator(self, c_y):
        """Exact ``pi^Y [1_D u]`` for ``u`` in ``Y_n``."""
        Z = self._to_cube(np.asarray(c_y, dtype=float))
        return self._from_integrals(_apply_tensor(Z, *self._gram))

    def norm_sq_on_D(self, c_y):
        """``|1_D u|^2_{L2}`` for ``u`` in ``Y_n``."""
        c = np.asarray(c_y, dtype=float)
        return float(np.sum(c * self.project_indicator(c)))


def _exp_integral(w, L):
    """``int_0^L exp(i w x) dx``, stable at ``w = 0``."""
    return L * np.exp(0.5j * w * L) * np.sinc(w * L / (2.0 * np.pi))


def build_bases(box_lengths, modes_per_axis, em_modes_per_axis, torus_lengths=None, quad_nodes_per_axis=None):
    """Build both bases with the ``D`` grid aligned inside the ``T`` grid.

    The ``T`` grid spacing equals the ``D`` spacing, so every torus length
    must be an integer number of ``D`` cells.  ``torus_lengths`` defaults to
    twice the box.  The box is placed as close to the torus centre as the
    node alignment allows.
    """
    hb = build_magnetization_basis(box_lengths, modes_per_axis, quad_nodes_per_axis)
    L = hb.box_lengths
    if torus_lengths is None:
        torus_lengths = tuple(2.0 * v for v in L)
    Lt = _triple(torus_lengths, "torus_lengths")
    NT = []
    offset = []
    for Li, Lti, Ni, hi in zip(L, Lt, hb.quad_nodes_per_axis, hb.spacing):
        ratio = Lti / hi
        NTi = int(round(ratio))
        if abs(ratio - NTi) > 1e-9 * max(1.0, ratio):
            raise BasisError(
                f"torus length {Lti} is not a whole number of D cells (spacing {hi})"
            )
        if NTi <= Ni:
            raise BasisError(f"torus length {Lti} must strictly exceed box length {Li}")
        # box occupies [(p - 1/2) h, (p - 1/2 + N) h]; needs 1 <= p <= NT - N
        p = max(1, (NTi - Ni + 1) // 2)
        NT.append(NTi)
        offset.append(p)
    yb = build_em_basis(Lt, em_modes_per_axis, tuple(NT))
    return SpectralBases(hb, yb, tuple(offset))


def _check_grid(f, basis, domain):
    if not isinstance(f, GridField):
        raise BasisError("expected a GridField")
    if f.domain != domain:
        raise BasisError(f"expected a field on {domain}, got one on {f.domain}")
    if f.values.shape[-4:] != basis.grid_shape:
        raise BasisError(f"grid mismatch: {f.values.shape[-4:]} vs {basis.grid_shape}")


def _check_coeffs(c, basis):
    c = np.asarray(c, dtype=float)
    if c.shape[-len(basis.shape):] != basis.shape:
        raise BasisError(f"coefficient shape {c.shape} does not match basis {basis.shape}")
    return c


def project_H(f, basis):
    """Quadrature projection ``pi_n`` of a ``D`` grid field onto ``H_n``."""
    _check_grid(f, basis, "D")
    return basis.project(f.values)


def project_Y(f, basis):
    """Quadrature projection ``pi_n^Y`` of a ``T`` grid field onto ``Y_n``."""
    _check_grid(f, basis, "T")
    return basis.project(f.values)


def synthesize(c, basis):
    c = _check_coeffs(c, basis)
    domain = "D" if isinstance(basis, MagnetizationBasis) else "T"
    return GridField(basis.synthesize(c), domain)


def apply_laplacian(c, basis):
    return basis.laplacian(_check_coeffs(c, basis))


def apply_curl(c, basis):
    return basis.curl(_check_coeffs(c, basis))


def divergence_Y(c, basis):
    return basis.divergence(_check_coeffs(c, basis))


def extend_by_zero(f, bases):
    _check_grid(f, bases.h, "D")
    return GridField(bases.extend(f.values), "T")


def restrict_to_D(f, bases):
    _check_grid(f, bases.y, "T")
    return GridField(bases.restrict(f.values), "D")


def inner_product(a, b, space_tag, bases):
    """Quadrature ``L2`` inner product of two grid fields on ``D`` or ``T``."""
    basis = bases.h if space_tag == "D" else bases.y
    _check_grid(a, basis, space_tag)
    _check_grid(b, basis, space_tag)
    return basis.inner(a.values, b.values)


def _workers():
    import os

    try:
        return max(1, int(os.environ.get("SPINWELL_THREADS", "1")))
    except ValueError:
        return 1
