"""Reference elements, quadrature rules, geometric mapping, node orderings.

Supported families: linear/quadratic Lagrange tetrahedra (p1tet, p2tet),
trilinear and 20-node serendipity hexahedra (q1hex, q2hex20), and their
boundary facets (tri3, tri6, quad4, quad8).  Canonical node ordering
follows the VTK convention and is documented in docs/element_ordering.md.

Simplex quadrature is built as a conical (collapsed-coordinate) product of
Gauss-Jacobi rules, cube quadrature as tensor Gauss-Legendre; an n-point
rule per direction is exact for total degree 2n-1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

__all__ = [
    "ReferenceElement", "QuadratureRule", "OrderingPermutation", "ElementError",
    "InvertedElementError", "element", "FAMILIES", "shape_values",
    "shape_gradients", "tabulate", "quadrature", "geometric_map", "permute",
    "CANONICAL", "GMSH", "LEGACY_VTK", "ORDERINGS",
    "TET_EDGES", "HEX_EDGES", "TRI_EDGES", "QUAD_EDGES",
]


class ElementError(ValueError):
    pass


class InvertedElementError(RuntimeError):
    """Non-positive Jacobian determinant in a volume element."""

    def __init__(self, detj, element_id=None):
        self.detj = detj
        self.element_id = element_id
        where = f" (element {element_id})" if element_id is not None else ""
        super().__init__(f"inverted element: det J = {detj:.3e}{where}")


TET_EDGES = ((0, 1), (1, 2), (2, 0), (0, 3), (1, 3), (2, 3))
HEX_EDGES = ((0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4),
             (0, 4), (1, 5), (2, 6), (3, 7))
TRI_EDGES = ((0, 1), (1, 2), (2, 0))
QUAD_EDGES = ((0, 1), (1, 2), (2, 3), (3, 0))

_HEX_CORNERS = np.array([
    [-1, -1, -1], [1, -1, -1], [1, 1, -1], [-1, 1, -1],
    [-1, -1, 1], [1, -1, 1], [1, 1, 1], [-1, 1, 1]], dtype=float)
_QUAD_CORNERS = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
_TET_CORNERS = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
_TRI_CORNERS = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)


def _with_edge_midpoints(corners, edges):
    mids = np.array([(corners[a] + corners[b]) / 2.0 for a, b in edges])
    return np.vstack([corners, mids])


@dataclass(frozen=True)
class ReferenceElement:
    """Immutable description of one element family."""
    family: str
    dim: int
    n_nodes: int
    nodes: np.ndarray           # (n_nodes, dim) reference coordinates
    measure: float              # reference-domain volume/area
    facet_family: str | None    # family of boundary facets (volume elements)
    facets: tuple[tuple[int, ...], ...]  # local node tuples per facet
    default_degree: int         # default quadrature degree

    def __repr__(self):
        return f"ReferenceElement({self.family!r})"


def _tet_facets(quadratic):
    vfaces = ((0, 2, 1), (0, 1, 3), (1, 2, 3), (0, 3, 2))
    if not quadratic:
        return vfaces
    edge_id = {frozenset(e): 4 + i for i, e in enumerate(TET_EDGES)}
    out = []
    for f in vfaces:
        mids = tuple(edge_id[frozenset((f[i], f[(i + 1) % 3]))] for i in range(3))
        out.append(f + mids)
    return tuple(out)


def _hex_facets(quadratic):
    vfaces = ((0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
              (1, 2, 6, 5), (2, 3, 7, 6), (3, 0, 4, 7))
    if not quadratic:
        return vfaces
    edge_id = {frozenset(e): 8 + i for i, e in enumerate(HEX_EDGES)}
    out = []
    for f in vfaces:
        mids = tuple(edge_id[frozenset((f[i], f[(i + 1) % 4]))] for i in range(4))
        out.append(f + mids)
    return tuple(out)


FAMILIES: dict[str, ReferenceElement] = {}


def _register(name, dim, nodes, measure, facet_family, facets, default_degree):
    FAMILIES[name] = ReferenceElement(name, dim, len(nodes), np.asarray(nodes, float),
                                      measure, facet_family, facets, default_degree)


_register("p1tet", 3, _TET_CORNERS, 1.0 / 6.0, "tri3", _tet_facets(False), 1)
_register("p2tet", 3, _with_edge_midpoints(_TET_CORNERS, TET_EDGES), 1.0 / 6.0,
          "tri6", _tet_facets(True), 4)
_register("q1hex", 3, _HEX_CORNERS, 8.0, "quad4", _hex_facets(False), 3)
_register("q2hex20", 3, _with_edge_midpoints(_HEX_CORNERS, HEX_EDGES), 8.0,
          "quad8", _hex_facets(True), 4)
_register("tri3", 2, _TRI_CORNERS, 0.5, None, (), 1)
_register("tri6", 2, _with_edge_midpoints(_TRI_CORNERS, TRI_EDGES), 0.5, None, (), 4)
_register("quad4", 2, _QUAD_CORNERS, 4.0, None, (), 3)
_register("quad8", 2, _with_edge_midpoints(_QUAD_CORNERS, QUAD_EDGES), 4.0, None, (), 4)


def element(family: str) -> ReferenceElement:
    try:
        return FAMILIES[family]
    except KeyError:
        raise ElementError(
            f"unknown element family {family!r}; available: {sorted(FAMILIES)}") from None


# --- shape functions ---------------------------------------------------------
# Each _vals/_grads helper takes points of shape (m, dim) and returns
# (m, n_nodes) and (m, n_nodes, dim).  Formulas are hand-differentiated.

def _p1tet_vals(p):
    x, y, z = p.T
    return np.stack([1 - x - y - z, x, y, z], axis=1)


def _p1tet_grads(p):
    m = len(p)
    g = np.array([[-1, -1, -1], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    return np.broadcast_to(g, (m, 4, 3)).copy()


_TET_DL = np.array([[-1, -1, -1], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)


def _tet_bary(p):
    x, y, z = p.T
    return np.stack([1 - x - y - z, x, y, z], axis=1)


def _p2tet_vals(p):
    L = _tet_bary(p)
    vert = L * (2 * L - 1)
    edge = np.stack([4 * L[:, a] * L[:, b] for a, b in TET_EDGES], axis=1)
    return np.concatenate([vert, edge], axis=1)


def _p2tet_grads(p):
    L = _tet_bary(p)
    m = len(p)
    g = np.empty((m, 10, 3))
    for i in range(4):
        g[:, i, :] = (4 * L[:, i, None] - 1) * _TET_DL[i]
    for k, (a, b) in enumerate(TET_EDGES):
        g[:, 4 + k, :] = 4 * (L[:, a, None] * _TET_DL[b] + L[:, b, None] * _TET_DL[a])
    return g


def _q1hex_vals(p):
    s = _HEX_CORNERS
    x, y, z = p[:, 0:1], p[:, 1:2], p[:, 2:3]
    return ((1 + x * s[:, 0]) * (1 + y * s[:, 1]) * (1 + z * s[:, 2])) / 8.0


def _q1hex_grads(p):
    s = _HEX_CORNERS
    x, y, z = p[:, 0:1], p[:, 1:2], p[:, 2:3]
    gx = s[:, 0] * (1 + y * s[:, 1]) * (1 + z * s[:, 2]) / 8.0
    gy = (1 + x * s[:, 0]) * s[:, 1] * (1 + z * s[:, 2]) / 8.0
    gz = (1 + x * s[:, 0]) * (1 + y * s[:, 1]) * s[:, 2] / 8.0
    return np.stack([gx, gy, gz], axis=2)


def _q2hex20_vals(p):
    m = len(p)
    out = np.empty((m, 20))
    x, y, z = p.T
    for i, (a, b, c) in enumerate(_HEX_CORNERS):
        out[:, i] = (1 + a * x) * (1 + b * y) * (1 + c * z) * (a * x + b * y + c * z - 2) / 8.0
    nodes = element("q2hex20").nodes
    for k in range(12):
        a, b, c = nodes[8 + k]
        if a == 0:
            out[:, 8 + k] = (1 - x * x) * (1 + b * y) * (1 + c * z) / 4.0
        elif b == 0:
            out[:, 8 + k] = (1 + a * x) * (1 - y * y) * (1 + c * z) / 4.0
        else:
            out[:, 8 + k] = (1 + a * x) * (1 + b * y) * (1 - z * z) / 4.0
    return out


def _q2hex20_grads(p):
    m = len(p)
    g = np.empty((m, 20, 3))
    x, y, z = p.T
    for i, (a, b, c) in enumerate(_HEX_CORNERS):
        w = a * x + b * y + c * z
        g[:, i, 0] = a * (1 + b * y) * (1 + c * z) * (2 * a * x + b * y + c * z - 1) / 8.0
        g[:, i, 1] = b * (1 + a * x) * (1 + c * z) * (a * x + 2 * b * y + c * z - 1) / 8.0
        g[:, i, 2] = c * (1 + a * x) * (1 + b * y) * (a * x + b * y + 2 * c * z - 1) / 8.0
    nodes = element("q2hex20").nodes
    for k in range(12):
        a, b, c = nodes[8 + k]
        i = 8 + k
        if a == 0:
            g[:, i, 0] = -2 * x * (1 + b * y) * (1 + c * z) / 4.0
            g[:, i, 1] = b * (1 - x * x) * (1 + c * z) / 4.0
            g[:, i, 2] = c * (1 - x * x) * (1 + b * y) / 4.0
        elif b == 0:
            g[:, i, 0] = a * (1 - y * y) * (1 + c * z) / 4.0
            g[:, i, 1] = -2 * y * (1 + a * x) * (1 + c * z) / 4.0
            g[:, i, 2] = c * (1 + a * x) * (1 - y * y) / 4.0
        else:
            g[:, i, 0] = a * (1 + b * y) * (1 - z * z) / 4.0
            g[:, i, 1] = b * (1 + a * x) * (1 - z * z) / 4.0
            g[:, i, 2] = -2 * z * (1 + a * x) * (1 + b * y) / 4.0
    return g


def _tri3_vals(p):
    x, y = p.T
    return np.stack([1 - x - y, x, y], axis=1)


def _tri3_grads(p):
    g = np.array([[-1, -1], [1, 0], [0, 1]], dtype=float)
    return np.broadcast_to(g, (len(p), 3, 2)).copy()


_TRI_DL = np.array([[-1, -1], [1, 0], [0, 1]], dtype=float)


def _tri6_vals(p):
    x, y = p.T
    L = np.stack([1 - x - y, x, y], axis=1)
    vert = L * (2 * L - 1)
    edge = np.stack([4 * L[:, a] * L[:, b] for a, b in TRI_EDGES], axis=1)
    return np.concatenate([vert, edge], axis=1)


def _tri6_grads(p):
    x, y = p.T
    L = np.stack([1 - x - y, x, y], axis=1)
    g = np.empty((len(p), 6, 2))
    for i in range(3):
        g[:, i, :] = (4 * L[:, i, None] - 1) * _TRI_DL[i]
    for k, (a, b) in enumerate(TRI_EDGES):
        g[:, 3 + k, :] = 4 * (L[:, a, None] * _TRI_DL[b] + L[:, b, None] * _TRI_DL[a])
    return g


def _quad4_vals(p):
    s = _QUAD_CORNERS
    x, y = p[:, 0:1], p[:, 1:2]
    return (1 + x * s[:, 0]) * (1 + y * s[:, 1]) / 4.0


def _quad4_grads(p):
    s = _QUAD_CORNERS
    x, y = p[:, 0:1], p[:, 1:2]
    gx = s[:, 0] * (1 + y * s[:, 1]) / 4.0
    gy = (1 + x * s[:, 0]) * s[:, 1] / 4.0
    return np.stack([gx, gy], axis=2)


def _quad8_vals(p):
    m = len(p)
    out = np.empty((m, 8))
    x, y = p.T
    for i, (a, b) in enumerate(_QUAD_CORNERS):
        out[:, i] = (1 + a * x) * (1 + b * y) * (a * x + b * y - 1) / 4.0
    nodes = element("quad8").nodes
    for k in range(4):
        a, b = nodes[4 + k]
        if a == 0:
            out[:, 4 + k] = (1 - x * x) * (1 + b * y) / 2.0
        else:
            out[:, 4 + k] = (1 + a * x) * (1 - y * y) / 2.0
    return out


def _quad8_grads(p):
    m = len(p)
    g = np.empty((m, 8, 2))
    x, y = p.T
    for i, (a, b) in enumerate(_QUAD_CORNERS):
        g[:, i, 0] = a * (1 + b * y) * (2 * a * x + b * y) / 4.0
        g[:, i, 1] = b * (1 + a * x) * (a * x + 2 * b * y) / 4.0
    nodes = element("quad8").nodes
    for k in range(4):
        a, b = nodes[4 + k]
        i = 4 + k
        if a == 0:
            g[:, i, 0] = -2 * x * (1 + b * y) / 2.0
            g[:, i, 1] = b * (1 - x * x) / 2.0
        else:
            g[:, i, 0] = a * (1 - y * y) / 2.0
            g[:, i, 1] = -2 * y * (1 + a * x) / 2.0
    return g


_VALS = {"p1tet": _p1tet_vals, "p2tet": _p2tet_vals, "q1hex": _q1hex_vals,
         "q2hex20": _q2hex20_vals, "tri3": _tri3_vals, "tri6": _tri6_vals,
         "quad4": _quad4_vals, "quad8": _quad8_vals}
_GRADS = {"p1tet": _p1tet_grads, "p2tet": _p2tet_grads, "q1hex": _q1hex_grads,
          "q2hex20": _q2hex20_grads, "tri3": _tri3_grads, "tri6": _tri6_grads,
          "quad4": _quad4_grads, "quad8": _quad8_grads}


def tabulate(elem: ReferenceElement | str, points):
    """Shape values and reference gradients at many points.

    Returns (values (m, n), gradients (m, n, dim)).
    """
    if isinstance(elem, str):
        elem = element(elem)
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != elem.dim:
        raise ElementError(
            f"{elem.family} expects {elem.dim}-d reference coordinates, "
            f"got {points.shape[1]}-d")
    return _VALS[elem.family](points), _GRADS[elem.family](points)


def shape_values(elem, xi):
    """N_i(xi) in canonical node order."""
    vals, _ = tabulate(elem, np.asarray(xi, dtype=np.float64)[None, :])
    return vals[0]


def shape_gradients(elem, xi):
    """dN_i/dxi (n_nodes, dim) at one reference point."""
    _, grads = tabulate(elem, np.asarray(xi, dtype=np.float64)[None, :])
    return grads[0]


# --- quadrature --------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray   # (nq, dim)
    weights: np.ndarray  # (nq,)
    degree: int          # guaranteed exactness (total degree)

    @property
    def n_points(self):
        return len(self.weights)


def _gauss01(n, alpha):
    """n-point rule for integral over [0,1] with weight (1-t)^alpha."""
    if alpha == 0:
        x, w = np.polynomial.legendre.leggauss(n)
        return (x + 1) / 2, w / 2
    x, w = roots_jacobi(n, alpha, 0.0)
    return (x + 1) / 2, w / 2.0 ** (alpha + 1)


@lru_cache(maxsize=None)
def _simplex_rule(dim, n):
    """Conical-product Gauss-Jacobi rule on the reference simplex."""
    if dim == 2:
        xu, wu = _gauss01(n, 1)
        xv, wv = _gauss01(n, 0)
        pts, wts = [], []
        for u, a in zip(xu, wu):
            for v, b in zip(xv, wv):
                pts.append((u, v * (1 - u)))
                wts.append(a * b)
        return np.array(pts), np.array(wts)
    xu, wu = _gauss01(n, 2)
    xv, wv = _gauss01(n, 1)
    xw, ww = _gauss01(n, 0)
    pts, wts = [], []
    for u, a in zip(xu, wu):
        for v, b in zip(xv, wv):
            for w, c in zip(xw, ww):
                pts.append((u, v * (1 - u), w * (1 - u) * (1 - v)))
                wts.append(a * b * c)
    return np.array(pts), np.array(wts)


@lru_cache(maxsize=None)
def _cube_rule(dim, n):
    x, w = np.polynomial.legendre.leggauss(n)
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.ones(len(pts))
    for wg in wgrids:
        wts = wts * wg.ravel()
    return pts, wts


MAX_DEGREE = 4


def quadrature(elem: ReferenceElement | str, degree: int | None = None) -> QuadratureRule:
    """A rule exact to at least ``degree`` on the reference domain."""
    if isinstance(elem, str):
        elem = element(elem)
    if degree is None:
        degree = elem.default_degree
    if not 1 <= degree <= MAX_DEGREE:
        raise ElementError(
            f"quadrature degree {degree} unsupported; supported range is "
            f"[1, {MAX_DEGREE}]")
    n = (degree + 2) // 2  # n-point Gauss is exact to 2n-1
    if elem.family in ("p1tet", "p2tet", "tri3", "tri6"):
        pts, wts = _simplex_rule(elem.dim, n)
    else:
        pts, wts = _cube_rule(elem.dim, n)
    return QuadratureRule(points=pts, weights=wts, degree=2 * n - 1)


# --- geometric mapping -------------------------------------------------------

def geometric_map(elem: ReferenceElement | str, node_coords, xi, element_id=None):
    """Jacobian, measure factor and physical gradients at one point.

    For volume elements returns (J (3,3), detJ, gradN_x (n,3)); detJ must
    be positive.  For facet elements embedded in 3-d returns the (3,2)
    Jacobian, the area magnitude |J_1 x J_2| and None.
    """
    if isinstance(elem, str):
        elem = element(elem)
    node_coords = np.asarray(node_coords, dtype=np.float64)
    if node_coords.shape != (elem.n_nodes, 3):
        raise ElementError(
            f"{elem.family} needs node coordinates of shape ({elem.n_nodes}, 3), "
            f"got {node_coords.shape}")
    g = shape_gradients(elem, xi)
    J = node_coords.T @ g  # (3, dim)
    if elem.dim == 3:
        detj = float(np.linalg.det(J))
        if detj <= 0.0:
            raise InvertedElementError(detj, element_id)
        gradN_x = g @ np.linalg.inv(J)
        return J, detj, gradN_x
    area = float(np.linalg.norm(np.cross(J[:, 0], J[:, 1])))
    return J, area, None


# --- node-ordering permutations ----------------------------------------------

@dataclass(frozen=True)
class OrderingPermutation:
    """Per-family maps taking foreign node order to canonical order.

    ``maps[family][i]`` is the foreign position of canonical node i, so
    canonical_nodes = foreign_nodes[maps[family]].
    """
    scheme: str
    maps: dict

    def map_for(self, family: str) -> np.ndarray:
        m = self.maps.get(family)
        if m is None:
            return np.arange(element(family).n_nodes)
        return np.asarray(m)


CANONICAL = OrderingPermutation("canonical", {})

GMSH = OrderingPermutation("gmsh", {
    # gmsh tet10 stores the (1,3) midnode ninth and (2,3) eighth
    "p2tet": [0, 1, 2, 3, 4, 5, 6, 7, 9, 8],
    # gmsh hex20 edge order: (0,1),(0,3),(0,4),(1,2),(1,5),(2,3),(2,6),
    # (3,7),(4,5),(4,7),(5,6),(6,7)
    "q2hex20": [0, 1, 2, 3, 4, 5, 6, 7,
                8, 11, 13, 9, 16, 18, 19, 17, 10, 12, 14, 15],
})

LEGACY_VTK = OrderingPermutation("legacy-vtk", {
    "q1hex": [4, 5, 0, 1, 7, 6, 3, 2],
})

ORDERINGS = {"canonical": CANONICAL, "gmsh": GMSH, "legacy-vtk": LEGACY_VTK}


def permute(perm: OrderingPermutation, family: str, node_list):
    """Reorder one cell's nodes into canonical order."""
    nodes = np.asarray(node_list)
    n = element(family).n_nodes
    if nodes.shape[-1] != n:
        raise ElementError(
            f"{family} cells have {n} nodes, got {nodes.shape[-1]}")
    return nodes[..., perm.map_for(family)]
