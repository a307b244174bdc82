"""Cauchy-Green type singular integral operators on grid fields.

``op_T`` is the area integral against 1/(pi (z - zeta)), the right inverse of
d/dzbar.  ``op_S`` is its z-derivative, computed only through the
desingularized split (Hoelder remainder over the area plus a boundary term) --
never as a raw principal-value sum.  ``op_C_boundary`` is the contour Cauchy
transform, ``hilbert_conjugate`` the spectral conjugate operator on the
circle, and ``op_C0_tau`` / ``op_T0_S0_tau`` the tau-deformed kernels on the
upper half-disk.

When a field is evaluated at its own lattice nodes, the T and S sums are
discrete convolutions and run through FFTs; the result is the same weighted
sum as the direct path (cross-checked in tests), just fast.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from . import grids
from .errors import SeparationError

_CHUNK = 256


@dataclass
class KernelConfig:
    """Desingularization knobs for the principal-value operators."""

    desing_mode: str = "skip-cell"  # or "polar-patch"
    eps_schedule: callable = None   # eps(h) >= h/2
    refine: int = 4                 # subsampling factor near the singularity, <= 16

    def __post_init__(self):
        if self.desing_mode not in ("skip-cell", "polar-patch"):
            raise ValueError(f"unknown desingularization mode {self.desing_mode!r}")
        if self.eps_schedule is None:
            self.eps_schedule = lambda h: 0.5 * h
        if self.refine < 1 or self.refine > 16:
            raise ValueError("refinement factor must be in [1, 16]")

    def eps(self, h):
        e = float(self.eps_schedule(h))
        if e < 0.5 * h - 1e-15:
            raise ValueError("exclusion radius schedule must satisfy eps(h) >= h/2")
        return e


# ---------------------------------------------------------------------------
# closed-form Cauchy-kernel integral over a square cell


def cell_kernel_integral(z, center, h, power=1):
    """Exact integral of 1/(z - zeta)^power over the square cell at ``center``.

    Stokes reduces the area integral to four segment integrals (zetabar is
    affine on each straight edge); power 1 picks up pi*conj(z) when z lies
    strictly inside the cell, power 2 is the principal value (its small-circle
    correction vanishes).  The log of the endpoint ratio is branch-safe: along
    a straight segment avoiding the pole the argument sweep stays below pi.
    """
    if power not in (1, 2):
        raise ValueError("cell integrals implemented for kernel powers 1 and 2")
    z = np.asarray(z, dtype=complex)
    c = np.asarray(center, dtype=complex)
    hh = 0.5 * h
    corners = [c - hh - 1j * hh, c + hh - 1j * hh, c + hh + 1j * hh, c - hh + 1j * hh]
    total = np.zeros(np.broadcast(z, c).shape, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for i in range(4):
            z1, z2 = corners[i], corners[(i + 1) % 4]
            if i % 2 == 0:  # horizontal edge: zetabar = zeta - 2i y0
                a, b = 1.0, -2j * (c.imag + (-hh if i == 0 else hh))
            else:           # vertical edge: zetabar = 2 x0 - zeta
                a, b = -1.0, 2.0 * (c.real + (hh if i == 1 else -hh))
            logratio = np.log((z - z2) / (z - z1))
            if power == 1:
                total += -a * (z2 - z1) - (a * z + b) * logratio
            else:
                total += a * logratio + (a * z + b) * (1.0 / (z - z2) - 1.0 / (z - z1))
    total = total / 2j
    if power == 1:
        inside = (np.abs(z.real - c.real) < hh) & (np.abs(z.imag - c.imag) < hh)
        total = total + np.where(inside, np.pi * np.conj(z), 0.0)
    return total


def cauchy_cell_integral(z, center, h):
    """Exact integral of 1/(z - zeta) dxi deta over the square cell at ``center``."""
    return cell_kernel_integral(z, center, h, power=1)


def polygon_kernel_integral(z, poly, power=1):
    """Exact integral of 1/(z - zeta)^power over a convex ccw polygon.

    Same Stokes reduction as the square-cell case: zetabar is affine along
    every straight edge.  ``z`` may be an array; points on an edge are nudged
    by the caller.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if poly.size < 3:
        return np.zeros(z.shape, dtype=complex)
    total = np.zeros(z.shape, dtype=complex)
    p2 = np.roll(poly, -1)
    inside = np.ones(z.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for w1, w2 in zip(poly, p2):
            t = w2 - w1
            a = np.conj(t) / t
            b = np.conj(w1) - w1 * a
            logratio = np.log((z - w2) / (z - w1))
            if power == 1:
                total += -a * (w2 - w1) - (a * z + b) * logratio
            else:
                total += a * logratio + (a * z + b) * (1.0 / (z - w2) - 1.0 / (z - w1))
            inside &= ((w2 - w1).conjugate() * (z - w1)).imag > 0
    total = total / 2j
    if power == 1:
        total = total + np.where(inside, np.pi * np.conj(z), 0.0)
    return total


# ---------------------------------------------------------------------------
# lattice assembly: exact cell kernels for full cells, near/far hybrid for
# boundary-clipped cells


def _kernel_sign(power):
    return 1.0 if power == 1 else -1.0


def _exact_lattice_kernel(field, power, eps_cut=None):
    idx, _, _ = field.index_map()
    ny, nx = idx.shape
    dy, dx = np.meshgrid(np.arange(-(ny - 1), ny), np.arange(-(nx - 1), nx),
                         indexing="ij")
    u = (dx + 1j * dy) * field.h
    K = cell_kernel_integral(u, np.zeros_like(u), field.h, power=power)
    K[ny - 1, nx - 1] = 0.0  # exact value at the center offset (odd/rotation symmetry)
    if eps_cut is not None:
        K[np.abs(u) < eps_cut] = 0.0
    return _kernel_sign(power) * K / np.pi


def _full_cell_sums(field, z, power, at_nodes, eps_cut=None):
    """(A, B): A = sum over full cells of f_j G_j(z), B = sum of G_j(z), with
    G_j the exact operator-kernel integral over cell j."""
    v = field.values_2d()
    full = ~field.clipped
    if at_nodes:
        idx, ix0, iy0 = field.index_map()
        ny, nx = idx.shape
        K = _exact_lattice_kernel(field, power, eps_cut)
        planes = np.zeros((v.shape[1] + 1, ny, nx), dtype=complex)
        planes[:-1, field.iy[full] - iy0, field.ix[full] - ix0] = v[full].T
        planes[-1, field.iy[full] - iy0, field.ix[full] - ix0] = 1.0
        outs = [fftconvolve(K, p, mode="valid")[field.iy - iy0, field.ix - ix0]
                for p in planes]
        return np.stack(outs[:-1], axis=1), outs[-1]
    h = field.h
    zc = field.nodes[full]
    vf = v[full]
    A = np.zeros((z.size, v.shape[1]), dtype=complex)
    B = np.zeros(z.size, dtype=complex)
    for lo in range(0, z.size, _CHUNK):
        zz = z[lo:lo + _CHUNK]
        G = cell_kernel_integral(zz[:, None], zc[None, :], h, power=power)
        d = np.abs(zz[:, None] - zc[None, :])
        G[d < 1e-12 * h] = 0.0
        if eps_cut is not None:
            G[d < eps_cut] = 0.0
        G = _kernel_sign(power) * G / np.pi
        A[lo:lo + _CHUNK] = G @ vf
        B[lo:lo + _CHUNK] = G.sum(axis=1)
    return A, B


def _clipped_sums(field, z, power, eps_cut=None):
    """Same as _full_cell_sums for the boundary-clipped cells.

    Near an eval point (within 4h) the clipped region is integrated exactly
    over its inside 4x4 subcells; farther away a one-point kernel at the
    region centroid carries the clipped area.
    """
    v = field.values_2d()
    out_shape = (z.size, v.shape[1])
    if not np.any(field.clipped):
        return np.zeros(out_shape, complex), np.zeros(z.size, complex)
    sub_inside, centroids = field.clip_subcells()
    h = field.h
    sign = _kernel_sign(power)
    zc = field.nodes[field.clipped]
    w = field.weights[field.clipped]
    vc = v[field.clipped]
    sub = grids.subcell_offsets(h)
    A = np.zeros(out_shape, dtype=complex)
    B = np.zeros(z.size, dtype=complex)
    for lo in range(0, z.size, _CHUNK):
        zz = z[lo:lo + _CHUNK]
        d = np.abs(zz[:, None] - zc[None, :])
        far = d > 4 * h
        diffc = zz[:, None] - centroids[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            kfar = sign * w[None, :] / (np.pi * diffc ** power)
        kfar = np.where(far, kfar, 0.0)
        if eps_cut is not None:
            kfar[np.abs(diffc) < eps_cut] = 0.0
        B[lo:lo + _CHUNK] += kfar.sum(axis=1)
        A[lo:lo + _CHUNK] += kfar @ vc
        ii, jj = np.where(~far)
        if ii.size == 0:
            continue
        zpair = zz[ii]
        rel = zpair - zc[jj]
        q = h / 4
        on_edge = (np.abs(rel.real / q - np.round(rel.real / q)) < 1e-9) | \
                  (np.abs(rel.imag / q - np.round(rel.imag / q)) < 1e-9)
        zpair = np.where(on_edge, zpair + (1 + 1j) * 1e-7 * h, zpair)
        centers = zc[jj][:, None] + sub[None, :]
        vals = cell_kernel_integral(zpair[:, None], centers, q, power=power)
        vals = np.where(sub_inside[jj], vals, 0.0)
        if eps_cut is not None:
            vals[np.abs(zpair[:, None] - centers) < eps_cut] = 0.0
        G = sign * vals.sum(axis=1) / np.pi
        np.add.at(B, lo + ii, G)
        np.add.at(A, lo + ii, G[:, None] * vc[jj])
    return A, B


def _kernel_sums(field, z, power, at_nodes, eps_cut=None):
    A1, B1 = _full_cell_sums(field, z, power, at_nodes, eps_cut)
    A2, B2 = _clipped_sums(field, field.nodes if at_nodes else z, power, eps_cut)
    return A1 + A2, B1 + B2


# ---------------------------------------------------------------------------
# T


def op_T(field, eval_points=None, force_direct=False):
    """Cauchy-Green transform: (1/pi) * integral of f(zeta)/(z - zeta) dxi deta.

    The field is treated as piecewise constant on its cells and the Cauchy
    kernel is integrated exactly over every full cell (closed form); clipped
    boundary cells are integrated exactly over their inside subcells near the
    eval point and by a centroid one-point rule farther away.  In particular
    the cell containing the eval point contributes its exact closed-form
    integral, which vanishes when evaluating at the cell center.  At the
    field's own nodes the full-cell sum is a lattice convolution and runs via
    FFT; ``force_direct`` keeps the O(MN) path (same sums, for testing).
    """
    at_nodes = eval_points is None
    z = field.nodes if at_nodes else np.atleast_1d(np.asarray(eval_points, dtype=complex))
    A, _ = _kernel_sums(field, z, power=1, at_nodes=at_nodes and not force_direct)
    if at_nodes:
        vals = A[:, 0] if field.values.ndim == 1 else A
        return field.with_values(vals, meta={})
    return A[:, 0] if field.values.ndim == 1 else A


# ---------------------------------------------------------------------------
# S


def op_S(field, config=None, eval_points=None, domain=None, force_direct=False):
    """Beurling transform via the desingularized split.

    S f(z) = -(1/pi) * integral (f(zeta) - f(z))/(z - zeta)^2 dxi deta
             - f(z)/(2 pi i) * contour integral dzetabar/(zeta - z).

    The Hoelder remainder is assembled with the same exact-cell kernel
    integrals as T (the self cell's principal value vanishes at the cell
    center by rotation symmetry).  In ``polar-patch`` mode the remainder
    additionally excludes the eps(h) ball around the eval point, mimicking
    the principal-value exclusion; both modes agree up to O(eps^alpha).
    The boundary term needs the domain's sampled boundary.
    """
    config = config or KernelConfig()
    dom = domain or field.domain
    if dom.boundary is None:
        raise ValueError("S needs a domain with sampled boundary")
    at_nodes = eval_points is None
    z = field.nodes if at_nodes else np.atleast_1d(np.asarray(eval_points, dtype=complex))
    v = field.values_2d()
    eps_cut = config.eps(field.h) if config.desing_mode == "polar-patch" else None
    A, B = _kernel_sums(field, z, power=2, at_nodes=at_nodes and not force_direct,
                        eps_cut=eps_cut)
    if at_nodes:
        fz = v
    else:
        fz = field.interpolate(z)
        fz = fz[:, None] if fz.ndim == 1 else fz
    bnd = _boundary_term(dom, z)
    total = A - fz * B[:, None] - fz * bnd[:, None] / (2j * np.pi)
    if at_nodes:
        vals = total[:, 0] if field.values.ndim == 1 else total
        return field.with_values(vals, meta={})
    return total[:, 0] if field.values.ndim == 1 else total


def _boundary_term(dom, z):
    """Trapezoid approximation of the contour integral of dzetabar/(zeta - z)."""
    gamma = dom.boundary
    gnext = np.roll(gamma, -1)
    dbar = np.conj(gnext) - np.conj(gamma)
    out = np.empty(z.size, dtype=complex)
    for lo in range(0, z.size, _CHUNK):
        zz = z[lo:lo + _CHUNK, None]
        k1 = 1.0 / (gamma[None, :] - zz)
        k2 = 1.0 / (gnext[None, :] - zz)
        out[lo:lo + _CHUNK] = (0.5 * (k1 + k2) * dbar[None, :]).sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# boundary Cauchy transform


def op_C_boundary(trace_values, domain, eval_points):
    """Contour Cauchy transform (1/2 pi i) * integral v(zeta)/(zeta - z) dzeta.

    Trapezoidal quadrature over the boundary polyline.  Returns (values,
    flags); flagged entries sit closer to the boundary than twice the
    boundary spacing and carry degraded accuracy.
    """
    gamma = domain.boundary
    if gamma.size < 64:
        raise ValueError("boundary Cauchy transform needs >= 64 boundary samples")
    v = np.asarray(trace_values, dtype=complex)
    if v.shape[0] != gamma.size:
        raise ValueError("trace length must match boundary sample count")
    z = np.atleast_1d(np.asarray(eval_points, dtype=complex))
    gnext = np.roll(gamma, -1)
    vnext = np.roll(v, -1)
    dg = gnext - gamma
    spacing = np.abs(dg).max()
    out = np.empty(z.size, dtype=complex)
    for lo in range(0, z.size, _CHUNK):
        zz = z[lo:lo + _CHUNK, None]
        k1 = v[None, :] / (gamma[None, :] - zz)
        k2 = vnext[None, :] / (gnext[None, :] - zz)
        out[lo:lo + _CHUNK] = (0.5 * (k1 + k2) * dg[None, :]).sum(axis=1) / (2j * np.pi)
    flags = grids._dist_to_polyline(gamma, z) < 2 * spacing
    return out, flags


# ---------------------------------------------------------------------------
# conjugate operator on the circle


def hilbert_conjugate(u, theta=None):
    """Spectral conjugate operator on the unit circle.

    Fourier multiplier -i*sign(n) with the mean and the Nyquist mode zeroed;
    the zero mean realizes the normalization Im h(0) = 0 of the analytic
    completion u + i Hu.  Requires real samples on a uniform angular grid of
    size 2^m.  On inputs without Nyquist content, H(Hu) = -u + mean(u) holds
    to rounding.
    """
    u = np.asarray(u)
    if np.iscomplexobj(u) and np.abs(u.imag).max(initial=0.0) > 1e-12 * max(1.0, np.abs(u).max()):
        raise ValueError("conjugate operator expects real-valued samples")
    u = u.real.astype(float)
    n = u.size
    if n < 4 or (n & (n - 1)) != 0:
        raise ValueError("need a uniform angular grid of size 2^m >= 4")
    if theta is not None:
        th = np.asarray(theta, dtype=float)
        d = np.diff(th)
        if th.size != n or np.abs(d - d[0]).max() > 1e-10 * abs(d[0]):
            raise ValueError("angular grid is not uniform")
    freq = np.fft.fftfreq(n, d=1.0 / n)
    mult = -1j * np.sign(freq)
    mult[0] = 0.0
    mult[n // 2] = 0.0
    return np.real(np.fft.ifft(mult * np.fft.fft(u)))


# ---------------------------------------------------------------------------
# tau-deformed kernels on the upper half-disk


def _tau_eval(tau, z, field_for_interp=None):
    if callable(tau):
        return np.asarray(tau(z), dtype=complex)
    return tau.interpolate(z)


def check_separation(tau, sample_points, C, extra_points=None):
    """Discrete separation check: |tau(z') - tau(z)| >= |z' - z| / C on pairs.

    Deterministic sample: the supplied points (grid nodes are strided down to
    at most 1200) plus any extra points.  Raises SeparationError naming the
    violating pair.
    """
    pts = np.asarray(sample_points, dtype=complex).ravel()
    if pts.size > 1200:
        pts = pts[:: pts.size // 1200 + 1]
    if extra_points is not None:
        pts = np.concatenate([pts, np.asarray(extra_points, dtype=complex).ravel()])
    tz = _tau_eval(tau, pts)
    dz = np.abs(pts[:, None] - pts[None, :])
    dt = np.abs(tz[:, None] - tz[None, :])
    mask = dz > 1e-12
    ratio = np.where(mask, dt / np.where(mask, dz, 1.0), np.inf)
    m = ratio.min()
    if m < 1.0 / C:
        i, j = np.unravel_index(np.argmin(ratio), ratio.shape)
        raise SeparationError(
            f"separation check failed: |tau(z')-tau(z)|/|z'-z| = {m:.3g} < 1/{C} "
            f"at pair ({pts[i]:.6g}, {pts[j]:.6g})", pair=(pts[i], pts[j]))
    return m


def op_C0_tau(segment_s, segment_f, tau, eval_points, C=10.0, k_max=1,
              tau_dz=None, check=True):
    """Deformed boundary kernel on [-1, 1]: (1/2 pi i) * integral f(s)/(tau(s)-tau(z)) ds.

    Returns {k: d^k/dz^k C0 f at eval_points} for k = 0..k_max (k_max <= 1);
    the derivative differentiates the kernel, which needs d tau/dz at the
    eval points (``tau_dz`` callable, Wirtinger differences when tau is a
    grid field, and symmetric differences of a callable tau otherwise).
    """
    if k_max not in (0, 1):
        raise ValueError("kernel differentiation implemented for k in {0, 1}")
    s = np.asarray(segment_s, dtype=float)
    f = np.asarray(segment_f, dtype=complex)
    z = np.atleast_1d(np.asarray(eval_points, dtype=complex))
    if check:
        sample = s.astype(complex)
        if not callable(tau):
            sample = np.concatenate([sample, tau.nodes])
        check_separation(tau, sample, C, extra_points=z)
    tau_s = _tau_eval(tau, s.astype(complex))
    tau_z = _tau_eval(tau, z)
    w = _trapezoid_weights(s)
    denom = tau_s[None, :] - tau_z[:, None]
    out = {0: (w[None, :] * f[None, :] / denom).sum(axis=1) / (2j * np.pi)}
    if k_max >= 1:
        if tau_dz is not None:
            dtz = np.asarray(tau_dz(z), dtype=complex)
        elif not callable(tau):
            dz_f, _ = grids.wirtinger(tau)
            dtz = dz_f.interpolate(z)
        else:
            dtz = _fd_dz(tau, z)
        out[1] = dtz * (w[None, :] * f[None, :] / denom ** 2).sum(axis=1) / (2j * np.pi)
    return out


def _fd_dz(tau, z, d=1e-6):
    fx = (np.asarray(tau(z + d)) - np.asarray(tau(z - d))) / (2 * d)
    fy = (np.asarray(tau(z + 1j * d)) - np.asarray(tau(z - 1j * d))) / (2 * d)
    return 0.5 * (fx - 1j * fy)


def _trapezoid_weights(s):
    w = np.zeros_like(s)
    d = np.diff(s)
    w[:-1] += 0.5 * d
    w[1:] += 0.5 * d
    return w


def op_T0_S0_tau(field, tau, config=None, eval_points=None, C=10.0,
                 tau_boundary=None, check=True):
    """Deformed area kernels on the upper half-disk.

    T0 f(z) = -(1/pi) integral f(zeta) / (tau(zeta) - tau(z)) dxi deta, and S0
    through the pulled-back desingularized split: Hoelder remainder against
    the deformed kernel (with the Jacobian |tau_z|^2 - |tau_zbar|^2 of the
    area element) plus a boundary term in d taubar.
    """
    config = config or KernelConfig()
    at_nodes = eval_points is None
    z = field.nodes if at_nodes else np.atleast_1d(np.asarray(eval_points, dtype=complex))
    if check:
        check_separation(tau, field.nodes, C, extra_points=z)
    tau_nodes = _tau_eval(tau, field.nodes)
    tau_z = _tau_eval(tau, z)
    if callable(tau):
        dz_n = _fd_dz(tau, field.nodes)
        dzb_n = np.conj(_fd_dz(lambda w: np.conj(tau(w)), field.nodes))
    else:
        dzf, dzbf = grids.wirtinger(tau)
        dz_n, dzb_n = dzf.values, dzbf.values
    jac = np.abs(dz_n) ** 2 - np.abs(dzb_n) ** 2

    v = field.values_2d()
    fz = v if at_nodes else (lambda a: a[:, None] if a.ndim == 1 else a)(field.interpolate(z))
    h = field.h
    eps = config.eps(h)
    T0 = np.empty((z.size, v.shape[1]), dtype=complex)
    S0a = np.empty_like(T0)
    wv = field.weights[:, None] * v
    wj = field.weights * jac
    for lo in range(0, z.size, _CHUNK):
        dt = tau_nodes[None, :] - tau_z[lo:lo + _CHUNK, None]
        near = np.abs(dt) < 1e-14
        with np.errstate(divide="ignore", invalid="ignore"):
            k1 = -1.0 / (np.pi * dt)
            k2 = -1.0 / (np.pi * dt * dt)
        k1[near] = 0.0
        k2[near] = 0.0
        if config.desing_mode == "polar-patch":
            k2[np.abs(dt) < eps] = 0.0
        T0[lo:lo + _CHUNK] = k1 @ wv
        S0a[lo:lo + _CHUNK] = (k2 * wj[None, :]) @ v - fz[lo:lo + _CHUNK] * ((k2 * wj[None, :]).sum(axis=1))[:, None]

    gamma = field.domain.boundary
    tau_g = np.asarray(tau_boundary(gamma), dtype=complex) if tau_boundary is not None \
        else _tau_eval(tau, gamma)
    tgn = np.roll(tau_g, -1)
    dbar = np.conj(tgn) - np.conj(tau_g)
    bnd = np.empty(z.size, dtype=complex)
    for lo in range(0, z.size, _CHUNK):
        zz = tau_z[lo:lo + _CHUNK, None]
        kk1 = 1.0 / (tau_g[None, :] - zz)
        kk2 = 1.0 / (tgn[None, :] - zz)
        bnd[lo:lo + _CHUNK] = (0.5 * (kk1 + kk2) * dbar[None, :]).sum(axis=1)
    S0 = S0a - fz * bnd[:, None] / (2j * np.pi)

    def pack(a):
        return a[:, 0] if field.values.ndim == 1 else a
    if at_nodes:
        return field.with_values(pack(T0), meta={}), field.with_values(pack(S0), meta={})
    return pack(T0), pack(S0)
