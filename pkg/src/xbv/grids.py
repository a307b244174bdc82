"""Discretized planar domains and complex grid fields.

A domain is carried by :class:`DomainSpec` (disk, half-disk, or a sampled
boundary polyline).  Sampled functions live in :class:`GridField`: values on
the cell centers of an axis-aligned lattice of pitch ``h`` intersected with
the domain, with per-node quadrature weights (boundary-clipped cells get the
clipped area, estimated by 4x4 subsampling).

Lattice centers sit at integer multiples of ``h``, so ``0`` is a node, the
real axis is a node row, and upper/lower half-disk grids at the same pitch
have mirrored node positions.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import GridError

_MEMBERSHIP_TOL = 1e-12


# ---------------------------------------------------------------------------
# domains


@dataclass
class DomainSpec:
    """A planar domain: a kind tag plus a sampled boundary polyline.

    ``boundary`` is a closed, simple, counterclockwise polyline gamma(s_i)
    (last point distinct from the first; closure is implicit).  ``arclength``
    holds the parameter values s_i.  For the built-in kinds, membership tests
    use the exact geometry; for ``boundary-sampled`` they use the polyline.
    """

    kind: str
    radius: float = 1.0
    boundary: np.ndarray = None
    arclength: np.ndarray = None
    orientation: int = 1

    def __post_init__(self):
        if self.boundary is None:
            raise ValueError("DomainSpec requires a sampled boundary polyline")
        self.boundary = np.asarray(self.boundary, dtype=complex)
        if self.arclength is None:
            self.arclength = _polyline_arclength(self.boundary)
        self.arclength = np.asarray(self.arclength, dtype=float)
        _validate_boundary(self)

    # -- membership -----------------------------------------------------

    def contains(self, z, tol=_MEMBERSHIP_TOL):
        """Vectorized closed-domain membership test."""
        z = np.asarray(z, dtype=complex)
        r = self.radius
        if self.kind in ("unit-disk", "disk"):
            return np.abs(z) <= r + tol
        if self.kind == "upper-half-disk":
            return (np.abs(z) <= r + tol) & (z.imag >= -tol)
        if self.kind == "lower-half-disk":
            return (np.abs(z) <= r + tol) & (z.imag <= tol)
        if self.kind == "boundary-sampled":
            return _winding_inside(self.boundary, z, tol)
        raise ValueError(f"unknown domain kind {self.kind!r}")

    @property
    def diameter(self):
        from scipy.spatial import ConvexHull
        b = self.boundary
        pts = np.c_[b.real, b.imag]
        hull = pts[ConvexHull(pts).vertices]
        d2 = ((hull[:, None, :] - hull[None, :, :]) ** 2).sum(-1)
        return float(np.sqrt(d2.max()))

    @property
    def area(self):
        b = self.boundary
        b2 = np.roll(b, -1)
        return 0.5 * float(np.sum(b.real * b2.imag - b2.real * b.imag))

    def boundary_tangents(self):
        """Unit tangents of the polyline at each sample (forward differences)."""
        b = self.boundary
        d = np.roll(b, -1) - b
        return d / np.abs(d)

    def boundary_normals(self):
        """Outward unit normals (counterclockwise boundary: normal = -i * tangent)."""
        return -1j * self.boundary_tangents()


def unit_disk(n_boundary=512):
    return disk(1.0, n_boundary)


def disk(radius, n_boundary=512):
    s = np.linspace(0.0, 2 * np.pi * radius, n_boundary, endpoint=False)
    gamma = radius * np.exp(1j * s / radius)
    kind = "unit-disk" if radius == 1.0 else "disk"
    return DomainSpec(kind=kind, radius=float(radius), boundary=gamma, arclength=s)


def upper_half_disk(radius=1.0, n_boundary=512):
    return _half_disk(radius, n_boundary, upper=True)


def lower_half_disk(radius=1.0, n_boundary=512):
    return _half_disk(radius, n_boundary, upper=False)


def from_boundary(points):
    """Domain given by a sampled boundary polyline (closed, simple, ccw)."""
    return DomainSpec(kind="boundary-sampled", radius=np.abs(points).max(),
                      boundary=np.asarray(points, dtype=complex))


def _half_disk(radius, n_boundary, upper):
    # counterclockwise: straight segment exactly on the real axis, then the arc
    r = float(radius)
    perim = (2 + np.pi) * r
    n_seg = max(2, int(round(n_boundary * 2 / (2 + np.pi))))
    n_arc = max(4, n_boundary - n_seg)
    xs = np.linspace(-r, r, n_seg, endpoint=False)
    if upper:
        seg = xs.astype(complex)
        th = np.linspace(0.0, np.pi, n_arc, endpoint=False)
        arc = r * np.exp(1j * th)
        kind = "upper-half-disk"
    else:
        seg = (-xs).astype(complex)
        th = np.linspace(np.pi, 2 * np.pi, n_arc, endpoint=False)
        arc = r * np.exp(1j * th)
        kind = "lower-half-disk"
    gamma = np.concatenate([seg, arc])
    seg_on_axis = np.abs(gamma.imag[np.abs(gamma.imag) < 1e-14])
    assert seg_on_axis.size >= n_seg  # construction puts the segment exactly on the axis
    return DomainSpec(kind=kind, radius=r, boundary=gamma)


def _polyline_arclength(b):
    d = np.abs(np.diff(b))
    return np.concatenate([[0.0], np.cumsum(d)])


def _validate_boundary(dom):
    b = dom.boundary
    if b.size < 8:
        raise ValueError("boundary needs at least 8 samples")
    d = np.roll(b, -1) - b
    if np.any(np.abs(d) < 1e-14 * max(1.0, np.abs(b).max())):
        raise ValueError("boundary has vanishing discrete tangents")
    b2 = np.roll(b, -1)
    area2 = np.sum(b.real * b2.imag - b2.real * b.imag)
    if area2 <= 0:
        raise ValueError("boundary polyline is not counterclockwise")
    if dom.kind in ("upper-half-disk", "lower-half-disk"):
        on_axis = np.abs(b.imag) < 1e-12 * max(1.0, dom.radius)
        if not np.any(on_axis):
            raise ValueError("half-disk boundary must contain the real segment")
        # the straight part must lie exactly on the real axis
        straight = b[on_axis]
        if np.abs(straight.imag).max() > 1e-12:
            raise ValueError("half-disk segment is off the real axis")
    if dom.kind == "boundary-sampled":
        _check_simple(b)


def _check_simple(b):
    # O(B^2) segment-intersection scan, vectorized; only run for user polylines
    a1 = b
    a2 = np.roll(b, -1)
    n = b.size
    i, j = np.triu_indices(n, k=2)
    # skip the wrap-around adjacency (first vs last segment)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    p, r = a1[i], a2[i] - a1[i]
    q, s = a1[j], a2[j] - a1[j]

    def cross2(a, b):
        return a.real * b.imag - a.imag * b.real

    rxs = cross2(r, s)
    qp = q - p
    t = cross2(qp, s) / np.where(rxs == 0, np.inf, rxs)
    u = cross2(qp, r) / np.where(rxs == 0, np.inf, rxs)
    hit = (t > 1e-12) & (t < 1 - 1e-12) & (u > 1e-12) & (u < 1 - 1e-12)
    if np.any(hit):
        raise ValueError("boundary polyline self-intersects")


def _c2v(z):
    return np.stack([np.real(z), np.imag(z)], axis=-1)


def _winding_inside(b, z, tol):
    zf = np.atleast_1d(z).ravel()
    a = b[None, :] - zf[:, None]
    c = np.roll(b, -1)[None, :] - zf[:, None]
    ang = np.angle(c / a)
    wind = np.abs(ang.sum(axis=1)) > np.pi
    # points within tol of the polyline count as inside (closed domain)
    near = _dist_to_polyline(b, zf) <= max(tol, 1e-12)
    out = (wind | near).reshape(np.shape(z))
    return out


def _dist_to_polyline(b, z):
    p, q = b[None, :], np.roll(b, -1)[None, :]
    zf = z[:, None]
    d = q - p
    t = np.clip(((zf - p) * d.conj()).real / (np.abs(d) ** 2), 0.0, 1.0)
    proj = p + t * d
    return np.abs(zf - proj).min(axis=1)


# ---------------------------------------------------------------------------
# grid fields


class GridField:
    """Complex-valued samples on the lattice cells of a domain.

    Attributes
    ----------
    domain : DomainSpec
    h : float
        Lattice pitch; node j sits at ``(ix[j] + 1j*iy[j]) * h``.
    nodes : (N,) complex array
    weights : (N,) float array, cell areas (clipped at the boundary)
    values : (N,) or (N, m) complex array
    meta : dict, free-form flags (stencil quality, clipped-cell mask, ...)
    """

    def __init__(self, domain, h, nodes, ix, iy, weights, values, meta=None,
                 clipped=None):
        self.domain = domain
        self.h = float(h)
        self.nodes = np.asarray(nodes, dtype=complex)
        self.ix = np.asarray(ix, dtype=np.int64)
        self.iy = np.asarray(iy, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=float)
        self.values = np.asarray(values, dtype=complex)
        self.meta = dict(meta or {})
        if clipped is None:
            clipped = np.abs(self.weights - self.h ** 2) > 1e-9 * self.h ** 2
        self.clipped = np.asarray(clipped, dtype=bool)
        if not np.all(np.isfinite(self.weights)):
            raise GridError("non-finite weights")
        if not np.all(np.isfinite(self.values.view(float))):
            raise GridError("non-finite values")
        self._index = None
        self.clip_polys = None

    # -- basic structure -------------------------------------------------

    @property
    def n_nodes(self):
        return self.nodes.size

    @property
    def n_components(self):
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    def values_2d(self):
        v = self.values
        return v[:, None] if v.ndim == 1 else v

    def index_map(self):
        """(idx2d, ix0, iy0): idx2d[iy - iy0, ix - ix0] = node id, -1 if absent."""
        if self._index is None:
            ix0, iy0 = int(self.ix.min()), int(self.iy.min())
            nx = int(self.ix.max()) - ix0 + 1
            ny = int(self.iy.max()) - iy0 + 1
            idx = -np.ones((ny, nx), dtype=np.int64)
            idx[self.iy - iy0, self.ix - ix0] = np.arange(self.n_nodes)
            self._index = (idx, ix0, iy0)
        return self._index

    def with_values(self, values, meta=None):
        g = GridField(self.domain, self.h, self.nodes, self.ix, self.iy,
                      self.weights, values, meta if meta is not None else self.meta,
                      clipped=self.clipped)
        g._index = self._index
        g.clip_polys = self.clip_polys
        return g

    def clip_regions(self):
        """(polygons, centroids) of the clipped cells, in clipped-node order."""
        if self.clip_polys is None:
            self.clip_polys = clip_cell_polygons(self.domain,
                                                 self.nodes[self.clipped], self.h)
        centroids = np.array([_polygon_centroid(p) for p in self.clip_polys],
                             dtype=complex)
        return self.clip_polys, centroids

    def lattice_arrays(self):
        """Dense (ny, nx) arrays of weights*values per component, zeros off-domain."""
        idx, ix0, iy0 = self.index_map()
        ny, nx = idx.shape
        v = self.values_2d()
        out = np.zeros((self.n_components, ny, nx), dtype=complex)
        out[:, self.iy - iy0, self.ix - ix0] = (self.weights[:, None] * v).T
        return out

    def interpolate(self, z):
        """Bilinear interpolation of the field at arbitrary points.

        Lattice corners that are not domain nodes are dropped and the bilinear
        weights renormalized; points with no corner available fall back to the
        nearest node value.
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        idx, ix0, iy0 = self.index_map()
        ny, nx = idx.shape
        fx = z.real / self.h - ix0
        fy = z.imag / self.h - iy0
        x0 = np.clip(np.floor(fx).astype(np.int64), 0, nx - 1)
        y0 = np.clip(np.floor(fy).astype(np.int64), 0, ny - 1)
        tx = np.clip(fx - x0, 0.0, 1.0)
        ty = np.clip(fy - y0, 0.0, 1.0)
        v = self.values_2d()
        acc = np.zeros((z.size, v.shape[1]), dtype=complex)
        wacc = np.zeros(z.size)
        for dx, dy, w in ((0, 0, (1 - tx) * (1 - ty)), (1, 0, tx * (1 - ty)),
                          (0, 1, (1 - tx) * ty), (1, 1, tx * ty)):
            xi = np.clip(x0 + dx, 0, nx - 1)
            yi = np.clip(y0 + dy, 0, ny - 1)
            j = idx[yi, xi]
            ok = j >= 0
            acc[ok] += w[ok, None] * v[j[ok]]
            wacc[ok] += w[ok]
        bad = wacc < 1e-12
        if np.any(bad):
            jn = self._nearest_nodes(z[bad])
            acc[bad] = v[jn]
            wacc[bad] = 1.0
        out = acc / wacc[:, None]
        return out[:, 0] if self.values.ndim == 1 else out

    def _nearest_nodes(self, z):
        d = np.abs(z[:, None] - self.nodes[None, :])
        return np.argmin(d, axis=1)


def build_grid(domain, h):
    """Skeleton grid (unit values) on the lattice cells of ``domain``.

    Cells fully inside get weight ``h**2``; boundary-clipped cells get the
    clipped area estimated by 4x4 subsampling of the cell.
    """
    h = float(h)
    if h <= 0:
        raise GridError("pitch must be positive")
    if h >= domain.diameter / 4:
        raise GridError(f"pitch {h} too coarse for domain diameter {domain.diameter}")
    b = domain.boundary
    ix_lo = int(np.floor(b.real.min() / h)) - 1
    ix_hi = int(np.ceil(b.real.max() / h)) + 1
    iy_lo = int(np.floor(b.imag.min() / h)) - 1
    iy_hi = int(np.ceil(b.imag.max() / h)) + 1
    ix, iy = np.meshgrid(np.arange(ix_lo, ix_hi + 1), np.arange(iy_lo, iy_hi + 1))
    ix, iy = ix.ravel(), iy.ravel()
    centers = (ix + 1j * iy) * h
    keep = domain.contains(centers)
    ix, iy, centers = ix[keep], iy[keep], centers[keep]
    if centers.size == 0:
        raise GridError("empty grid: pitch too large for the domain")

    # full-cell shortcut: all four corners inside
    corners_in = np.ones(centers.size, dtype=bool)
    for sx in (-0.5, 0.5):
        for sy in (-0.5, 0.5):
            corners_in &= domain.contains(centers + (sx + 1j * sy) * h)
    weights = np.full(centers.size, h * h)
    clipped = ~corners_in
    polys = clip_cell_polygons(domain, centers[clipped], h)
    for i, p in enumerate(polys):
        weights[np.where(clipped)[0][i]] = _polygon_area(p)

    g = GridField(domain, h, centers, ix, iy, weights,
                  np.ones(centers.size, dtype=complex), clipped=clipped)
    g.clip_polys = polys
    return g


def clip_cell_polygons(domain, centers, h):
    """Clip the pitch-h cells at ``centers`` against the boundary chords.

    Each cell square is cut by the half-planes of the nearby boundary
    polyline segments (counterclockwise boundary keeps the left side), which
    replaces the local boundary arc by its chords; the region error per cell
    is O(h^3 * curvature).  Returns a list of ccw vertex arrays.
    """
    b = domain.boundary
    b2 = np.roll(b, -1)
    out = []
    hh = 0.5 * h
    square = np.array([-hh - 1j * hh, hh - 1j * hh, hh + 1j * hh, -hh + 1j * hh])
    for c in np.atleast_1d(centers):
        # segments whose closest point to the cell center is within reach
        d = b2 - b
        t = np.clip(((c - b) * d.conj()).real / np.abs(d) ** 2, 0.0, 1.0)
        dist = np.abs(c - (b + t * d))
        near = np.where(dist <= hh * 1.5 * np.sqrt(2.0))[0]
        poly = c + square
        for i in near:
            poly = _halfplane_clip(poly, b[i], b2[i])
            if poly.size < 3:
                break
        if poly.size < 3 or not domain.contains(c):
            poly = np.array([c])  # degenerate: zero area, node kept for values
        out.append(poly)
    return out


def _halfplane_clip(poly, p, q):
    """Sutherland-Hodgman step: keep the part of ``poly`` left of p->q."""
    d = q - p
    n = poly.size
    keep_val = (d.conj() * (poly - p)).imag  # cross product, >= 0 means left
    out = []
    for i in range(n):
        a, bb = poly[i], poly[(i + 1) % n]
        ka, kb = keep_val[i], keep_val[(i + 1) % n]
        if ka >= -1e-14:
            out.append(a)
        if (ka > 1e-14 and kb < -1e-14) or (ka < -1e-14 and kb > 1e-14):
            out.append(a + (bb - a) * (ka / (ka - kb)))
    return np.array(out, dtype=complex)


def _polygon_area(poly):
    if poly.size < 3:
        return 0.0
    p2 = np.roll(poly, -1)
    return 0.5 * float(np.sum(poly.real * p2.imag - p2.real * poly.imag))


def _polygon_centroid(poly):
    if poly.size < 3:
        return complex(poly[0]) if poly.size else 0j
    p2 = np.roll(poly, -1)
    cr = poly.real * p2.imag - p2.real * poly.imag
    a = 0.5 * cr.sum()
    if abs(a) < 1e-300:
        return complex(poly.mean())
    cx = ((poly.real + p2.real) * cr).sum() / (6 * a)
    cy = ((poly.imag + p2.imag) * cr).sum() / (6 * a)
    return cx + 1j * cy


def field_from_function(grid, fn):
    """New field on ``grid`` with values ``fn(z)`` (fn vectorized over complex z)."""
    return grid.with_values(np.asarray(fn(grid.nodes), dtype=complex), meta={})


# ---------------------------------------------------------------------------
# finite differences


def _axis_derivative(field, axis):
    """Second-order d/dx or d/dy with one-sided fallback at ragged edges.

    Returns (deriv values, quality) with quality 2 = central, 1 = one-sided
    second order, 0 = first order or isolated (flagged).
    """
    idx, ix0, iy0 = field.index_map()
    pad = -np.ones((idx.shape[0] + 4, idx.shape[1] + 4), dtype=np.int64)
    pad[2:-2, 2:-2] = idx
    r = field.iy - iy0 + 2
    c = field.ix - ix0 + 2
    if axis == "x":
        nb = [pad[r, c - 2], pad[r, c - 1], pad[r, c + 1], pad[r, c + 2]]
    else:
        nb = [pad[r - 2, c], pad[r - 1, c], pad[r + 1, c], pad[r + 2, c]]
    m2, m1, p1, p2 = nb
    v = field.values_2d()
    h = field.h
    out = np.zeros_like(v)
    # 2 = central, 1 = one-sided 2nd order, 0 = first order, -1 = no data
    quality = np.full(field.n_nodes, -1, dtype=np.int8)

    central = (m1 >= 0) & (p1 >= 0)
    out[central] = (v[p1[central]] - v[m1[central]]) / (2 * h)
    quality[central] = 2

    fwd = ~central & (p1 >= 0) & (p2 >= 0)
    out[fwd] = (-3 * v[np.where(fwd)[0]] + 4 * v[p1[fwd]] - v[p2[fwd]]) / (2 * h)
    quality[fwd] = 1
    bwd = ~central & ~fwd & (m1 >= 0) & (m2 >= 0)
    out[bwd] = (3 * v[np.where(bwd)[0]] - 4 * v[m1[bwd]] + v[m2[bwd]]) / (2 * h)
    quality[bwd] = 1

    rest = ~central & ~fwd & ~bwd
    f1 = rest & (p1 >= 0)
    out[f1] = (v[p1[f1]] - v[np.where(f1)[0]]) / h
    quality[f1] = 0
    b1 = rest & ~f1 & (m1 >= 0)
    out[b1] = (v[np.where(b1)[0]] - v[m1[b1]]) / h
    quality[b1] = 0
    # nodes with no neighbor on this axis keep derivative 0, quality -1

    if field.values.ndim == 1:
        out = out[:, 0]
    return out, quality


def wirtinger(field):
    """Wirtinger derivatives (d/dz, d/dzbar) by second-order finite differences.

    dz = (d/dx - i d/dy)/2, dzbar = (d/dx + i d/dy)/2.  Nodes lacking central
    stencils fall back to one-sided second-order, then first-order stencils;
    the per-node stencil quality lands in ``meta['stencil_quality']`` and the
    both-axes-central mask in ``meta['central']``.
    """
    _require_resolution(field)
    fx, qx = _axis_derivative(field, "x")
    fy, qy = _axis_derivative(field, "y")
    dz_v = 0.5 * (fx - 1j * fy)
    dzb_v = 0.5 * (fx + 1j * fy)
    quality = np.minimum(qx, qy)
    meta = {"stencil_quality": quality, "central": (qx == 2) & (qy == 2)}
    return field.with_values(dz_v, meta=meta), field.with_values(dzb_v, meta=meta)


def _require_resolution(field):
    idx, _, _ = field.index_map()
    row_len = (idx >= 0).sum(axis=1).max() if idx.size else 0
    col_len = (idx >= 0).sum(axis=0).max() if idx.size else 0
    if row_len < 3 or col_len < 3:
        raise GridError("grid needs at least 3 nodes per axis for stencils")


def interior_mask(field):
    """Nodes whose Wirtinger stencils are fully central on both axes."""
    dz, _ = wirtinger(field)
    return dz.meta["central"]


# ---------------------------------------------------------------------------
# Hoelder estimation


@dataclass
class HolderReport:
    """Sample-based lower estimate of a Hoelder-type norm."""

    k: int
    alpha: float
    sup_norms: list
    seminorm: float
    pair: tuple = None
    n_pairs: int = 0

    def __post_init__(self):
        if any(s < 0 for s in self.sup_norms) or self.seminorm < 0:
            raise ValueError("norms must be nonnegative")


_FAR_PAIR_SEED = 20240301
_N_FAR_PAIRS = 100_000


def holder_estimate(field, k, alpha, near_radius=8):
    """Estimate the alpha-seminorm of the order-k derivatives of ``field``.

    Derivatives of order k are the k+1 mixed Wirtinger derivatives, computed
    by repeated stencils.  The seminorm is the max of |g(z)-g(z')|/|z-z'|^alpha
    over a deterministic pair set: all lattice pairs with |z-z'| <= 8h plus a
    fixed-seed sample of 1e5 far pairs.  This is a lower bound of the true
    seminorm by construction, and enlarging the pair set never decreases it.
    """
    if not (0 < alpha < 1):
        raise ValueError("alpha must be in (0,1)")
    if k < 0:
        raise ValueError("k must be nonnegative")
    derivs = {(0, 0): field}
    sup_norms = [float(np.abs(field.values_2d()).max(initial=0.0))]
    for order in range(1, k + 1):
        new = {}
        for (a, b) in [(a, order - a) for a in range(order + 1)]:
            if a > 0:
                src = derivs[(a - 1, b)]
                new[(a, b)] = wirtinger(src)[0]
            else:
                src = derivs[(a, b - 1)]
                new[(a, b)] = wirtinger(src)[1]
        derivs = new
        sup_norms.append(max(float(np.abs(g.values_2d()).max(initial=0.0))
                             for g in derivs.values()))

    tops = [g.values_2d() for g in derivs.values()]
    best = 0.0
    best_pair = None
    n_pairs = 0
    for i, j in _pair_sets(field, near_radius):
        dz = np.abs(field.nodes[i] - field.nodes[j])
        n_pairs += i.size
        for g in tops:
            num = np.linalg.norm(g[i] - g[j], axis=1)
            ratio = num / dz ** alpha
            m = int(np.argmax(ratio))
            if ratio[m] > best:
                best = float(ratio[m])
                best_pair = (field.nodes[i[m]], field.nodes[j[m]])
    return HolderReport(k=k, alpha=alpha, sup_norms=sup_norms,
                        seminorm=best, pair=best_pair, n_pairs=n_pairs)


def _pair_sets(field, near_radius):
    idx, ix0, iy0 = field.index_map()
    ny, nx = idx.shape
    r = int(near_radius)
    for dx in range(0, r + 1):
        for dy in range(-r, r + 1):
            if dx == 0 and dy <= 0:
                continue
            if dx * dx + dy * dy > r * r:
                continue
            a = idx[max(0, -dy):ny - max(0, dy), max(0, -dx):nx - max(0, dx)]
            b = idx[max(0, dy):ny - max(0, -dy), max(0, dx):nx - max(0, -dx)]
            ok = (a >= 0) & (b >= 0)
            if np.any(ok):
                yield a[ok], b[ok]
    rng = np.random.default_rng(_FAR_PAIR_SEED)
    n = field.n_nodes
    i = rng.integers(0, n, _N_FAR_PAIRS)
    j = rng.integers(0, n, _N_FAR_PAIRS)
    ok = i != j
    yield i[ok], j[ok]


# ---------------------------------------------------------------------------
# boundary traces


def boundary_trace(field, domain=None):
    """Field values along the boundary polyline, bilinearly interpolated.

    Returns (s, values, flags): flags mark boundary samples that had no grid
    node among their surrounding lattice corners within 2h (those values are
    first-order extrapolated from the nearest node).
    """
    dom = domain or field.domain
    gamma = dom.boundary
    idx, ix0, iy0 = field.index_map()
    ny, nx = idx.shape
    v = field.values_2d()
    h = field.h
    fx = gamma.real / h - ix0
    fy = gamma.imag / h - iy0
    x0 = np.floor(fx).astype(np.int64)
    y0 = np.floor(fy).astype(np.int64)
    tx = fx - x0
    ty = fy - y0
    acc = np.zeros((gamma.size, v.shape[1]), dtype=complex)
    wacc = np.zeros(gamma.size)
    for dx, dy, w in ((0, 0, (1 - tx) * (1 - ty)), (1, 0, tx * (1 - ty)),
                      (0, 1, (1 - tx) * ty), (1, 1, tx * ty)):
        xi, yi = x0 + dx, y0 + dy
        ok = (xi >= 0) & (xi < nx) & (yi >= 0) & (yi < ny)
        j = np.where(ok, idx[np.clip(yi, 0, ny - 1), np.clip(xi, 0, nx - 1)], -1)
        use = j >= 0
        acc[use] += w[use, None] * v[j[use]]
        wacc[use] += w[use]
    missing = wacc < 1e-12
    flags = np.zeros(gamma.size, dtype=bool)
    if np.any(missing):
        jn = field._nearest_nodes(gamma[missing])
        dist = np.abs(gamma[missing] - field.nodes[jn])
        dzf, dzbf = wirtinger(field)
        dz_v, dzb_v = dzf.values_2d(), dzbf.values_2d()
        delta = (gamma[missing] - field.nodes[jn])[:, None]
        acc[missing] = v[jn] + delta * dz_v[jn] + np.conj(delta) * dzb_v[jn]
        wacc[missing] = 1.0
        flags[np.where(missing)[0][dist > 2 * h]] = True
    vals = acc / wacc[:, None]
    if field.values.ndim == 1:
        vals = vals[:, 0]
    if not np.all(np.isfinite(vals.view(float))):
        raise GridError("non-finite boundary trace")
    return dom.arclength, vals, flags
