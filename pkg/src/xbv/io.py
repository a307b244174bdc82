"""CSV / JSON formats for grids, domains, jets, and structures.

Grid CSV, one row per node (header row mandatory):

    re_z,im_z,weight,re_f0,im_f0[,re_f1,im_f1,...]

Domain JSON: ``{"kind": ..., "radius": ..., "boundary": [[x,y],...]}``.
Structure JSON: ``{"n": n, "A": [[[re,im],...],...], "B": [[[re,im],...],...]}``.
Jet family JSON: ``{"n":1, "m":1, "N":..., "entries":[{"I":[i], "csv":"fI.csv"}],
"support_radius": r}`` with each entry CSV holding ``x,re_f,im_f`` rows.
"""

import csv
import json
import os

import numpy as np

from . import grids
from .errors import GridError


def save_grid(path, field):
    v = field.values_2d()
    m = v.shape[1]
    header = ["re_z", "im_z", "weight"]
    for c in range(m):
        header += [f"re_f{c}", f"im_f{c}"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for j in range(field.n_nodes):
            row = [repr(field.nodes[j].real), repr(field.nodes[j].imag),
                   repr(field.weights[j])]
            for c in range(m):
                row += [repr(v[j, c].real), repr(v[j, c].imag)]
            w.writerow(row)


def load_grid(path, domain=None):
    """Read a grid CSV; the pitch is recovered from the node lattice."""
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if not header or header[0].strip() != "re_z":
            raise GridError(f"{path}: missing grid CSV header")
        rows = np.array([[float(x) for x in row] for row in rd])
    if rows.size == 0:
        raise GridError(f"{path}: empty grid")
    nodes = rows[:, 0] + 1j * rows[:, 1]
    weights = rows[:, 2]
    m = (rows.shape[1] - 3) // 2
    vals = rows[:, 3::2] + 1j * rows[:, 4::2]
    if m == 1:
        vals = vals[:, 0]
    h = _infer_pitch(nodes)
    ix = np.rint(nodes.real / h).astype(np.int64)
    iy = np.rint(nodes.imag / h).astype(np.int64)
    if np.abs(nodes - (ix + 1j * iy) * h).max() > 1e-6 * h:
        raise GridError(f"{path}: nodes are not on a lattice")
    if domain is None:
        domain = _domain_from_nodes(nodes, h)
    return grids.GridField(domain, h, nodes, ix, iy, weights, vals)


def _infer_pitch(nodes):
    xs = np.unique(np.round(nodes.real, 12))
    ys = np.unique(np.round(nodes.imag, 12))
    gaps = []
    for u in (xs, ys):
        if u.size > 1:
            d = np.diff(u)
            gaps.append(d[d > 1e-12].min())
    if not gaps:
        raise GridError("cannot infer pitch from a single node row")
    return float(min(gaps))


def _domain_from_nodes(nodes, h):
    # default container when no domain JSON given: a disk covering the nodes
    r = float(np.abs(nodes).max()) + h
    if abs(r - 1.0) < 2 * h:
        r = 1.0
    return grids.disk(r)


def save_domain(path, domain):
    data = {"kind": domain.kind, "radius": domain.radius,
            "boundary": [[z.real, z.imag] for z in domain.boundary]}
    with open(path, "w") as fh:
        json.dump(data, fh)


def load_domain(path):
    with open(path) as fh:
        data = json.load(fh)
    kind = data["kind"]
    if "boundary" in data and data["boundary"]:
        pts = np.array([x + 1j * y for x, y in data["boundary"]])
        if kind == "boundary-sampled":
            return grids.from_boundary(pts)
        return grids.DomainSpec(kind=kind, radius=float(data.get("radius", 1.0)),
                                boundary=pts)
    r = float(data.get("radius", 1.0))
    makers = {"unit-disk": lambda: grids.unit_disk(),
              "disk": lambda: grids.disk(r),
              "upper-half-disk": lambda: grids.upper_half_disk(r),
              "lower-half-disk": lambda: grids.lower_half_disk(r)}
    if kind not in makers:
        raise ValueError(f"unknown domain kind {kind!r}")
    return makers[kind]()


def _complex_matrix(data):
    return np.array([[re + 1j * im for re, im in row] for row in data], dtype=complex)


def load_structure(path):
    with open(path) as fh:
        data = json.load(fh)
    n = int(data["n"])
    A = _complex_matrix(data["A"])
    B = _complex_matrix(data["B"])
    if A.shape != (n, n) or B.shape != (n, n):
        raise ValueError(f"{path}: A, B must be {n}x{n}")
    out = {"n": n, "A": A, "B": B}
    if "A_linear" in data:
        out["A_linear"] = [_complex_matrix(mk) for mk in data["A_linear"]]
        if len(out["A_linear"]) != n:
            raise ValueError(f"{path}: A_linear needs one matrix per coordinate")
    return out


def save_structure(path, n, A, B):
    def enc(M):
        return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]
    with open(path, "w") as fh:
        json.dump({"n": n, "A": enc(A), "B": enc(B)}, fh)


def load_jet_family(path):
    from .whitney import JetFamily
    base = os.path.dirname(os.path.abspath(path))
    with open(path) as fh:
        data = json.load(fh)
    entries = {}
    x = None
    for e in data["entries"]:
        rows = np.loadtxt(os.path.join(base, e["csv"]), delimiter=",", skiprows=1,
                          ndmin=2)
        ex = rows[:, 0]
        vals = rows[:, 1] + 1j * rows[:, 2]
        if x is None:
            x = ex
        elif not np.allclose(x, ex):
            raise ValueError(f"{path}: jet entries sampled on different x-grids")
        entries[tuple(int(i) for i in e["I"])] = vals
    return JetFamily(x=x, entries=entries, N=int(data["N"]), m=int(data["m"]),
                     support_radius=float(data["support_radius"]))


def save_report(path, report):
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serializable: {type(obj)}")
