"""Meshes: structured beam generation, hex-to-tet splitting, quadratic
promotion, boundary tagging and surface extraction.

Cells are stored in canonical (VTK-style) node order; boundary facets carry
integer tags resolved through the ``tags`` name map.  The generated beam
tags its x=0 face "clamp", its x=L face "load" and the rest "free" — these
names are part of the CLI contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..elements import (HEX_EDGES, TET_EDGES, InvertedElementError, element,
                        geometric_map, quadrature)

__all__ = ["Mesh", "MeshError", "generate_beam_hex", "hex_to_tet",
           "promote_quadratic", "surface_triangles", "mesh_summary"]


class MeshError(ValueError):
    pass


@dataclass
class Mesh:
    vertices: np.ndarray           # (nV, 3) float64, meters
    cells: np.ndarray              # (nC, nodes_per_cell) int64, canonical order
    family: str
    facets: np.ndarray             # (nF, nodes_per_facet) int64
    facet_tags: np.ndarray         # (nF,) int64
    tags: dict = field(default_factory=dict)  # name -> integer

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.cells = np.ascontiguousarray(self.cells, dtype=np.int64)
        self.facets = np.ascontiguousarray(self.facets, dtype=np.int64)
        self.facet_tags = np.ascontiguousarray(self.facet_tags, dtype=np.int64)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    def tag_id(self, name: str) -> int:
        try:
            return self.tags[name]
        except KeyError:
            raise MeshError(f"unknown facet tag {name!r}; have {sorted(self.tags)}") from None

    def facets_with_tag(self, name: str) -> np.ndarray:
        return self.facets[self.facet_tags == self.tag_id(name)]

    def validate(self):
        """Check structural invariants; raises on violation."""
        if self.cells.min(initial=0) < 0 or self.cells.max(initial=-1) >= self.n_vertices:
            raise MeshError("cell indices out of range")
        if len(self.facets) and self.facets.max() >= self.n_vertices:
            raise MeshError("facet indices out of range")
        el = element(self.family)
        rule = quadrature(el, 1)
        for e, cell in enumerate(self.cells):
            coords = self.vertices[cell]
            for q in range(rule.n_points):
                geometric_map(el, coords, rule.points[q], element_id=e)
        # every boundary facet must be a face of exactly one cell
        face_lookup = {}
        for e, cell in enumerate(self.cells):
            for loc in el.facets:
                key = frozenset(int(cell[i]) for i in loc)
                face_lookup[key] = face_lookup.get(key, 0) + 1
        for f in self.facets:
            count = face_lookup.get(frozenset(int(v) for v in f), 0)
            if count != 1:
                raise MeshError(
                    f"boundary facet {f.tolist()} adjacent to {count} cells, expected 1")
        return self


_BEAM_TAGS = {"clamp": 1, "load": 2, "free": 3}


def generate_beam_hex(nx: int, ny: int, nz: int, dims=(80.0, 15.0, 15.0),
                      order: int = 1) -> Mesh:
    """Structured hexahedral grid of the cantilever beam domain.

    Faces are tagged clamp (x=0), load (x=Lx) and free (the rest).
    ``order=2`` promotes to 20-node serendipity elements.
    """
    if min(nx, ny, nz) < 1:
        raise MeshError("cell counts must be >= 1")
    lx, ly, lz = dims
    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)
    zs = np.linspace(0.0, lz, nz + 1)

    def vid(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    verts = np.empty(((nx + 1) * (ny + 1) * (nz + 1), 3))
    for k in range(nz + 1):
        for j in range(ny + 1):
            for i in range(nx + 1):
                verts[vid(i, j, k)] = (xs[i], ys[j], zs[k])

    cells = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                cells.append([vid(i, j, k), vid(i + 1, j, k),
                              vid(i + 1, j + 1, k), vid(i, j + 1, k),
                              vid(i, j, k + 1), vid(i + 1, j, k + 1),
                              vid(i + 1, j + 1, k + 1), vid(i, j + 1, k + 1)])
    cells = np.asarray(cells, dtype=np.int64)

    el = element("q1hex")
    facets, ftags = [], []
    for cell in cells:
        for loc in el.facets:
            face = cell[list(loc)]
            c = verts[face].mean(axis=0)
            on = None
            if np.isclose(verts[face][:, 0], 0.0).all():
                on = "clamp"
            elif np.isclose(verts[face][:, 0], lx).all():
                on = "load"
            elif (np.isclose(verts[face][:, 1], 0.0).all()
                  or np.isclose(verts[face][:, 1], ly).all()
                  or np.isclose(verts[face][:, 2], 0.0).all()
                  or np.isclose(verts[face][:, 2], lz).all()):
                on = "free"
            if on is not None:
                facets.append(face)
                ftags.append(_BEAM_TAGS[on])
    mesh = Mesh(verts, cells, "q1hex", np.asarray(facets, dtype=np.int64),
                np.asarray(ftags, dtype=np.int64), dict(_BEAM_TAGS))
    if order == 2:
        mesh = promote_quadratic(mesh)
    elif order != 1:
        raise MeshError(f"order must be 1 or 2, got {order}")
    return mesh


# Kuhn split around the main diagonal (local corners 0 -> 6).  Using the
# same local diagonal in every cell of a structured grid keeps the induced
# face diagonals compatible across neighbours.
_KUHN_TETS = ((0, 1, 2, 6), (0, 2, 3, 6), (0, 3, 7, 6),
              (0, 7, 4, 6), (0, 4, 5, 6), (0, 5, 1, 6))


def hex_to_tet(mesh: Mesh) -> Mesh:
    """Split each trilinear hex into 6 tetrahedra; volume is preserved."""
    if mesh.family != "q1hex":
        raise MeshError(f"hex_to_tet needs a q1hex mesh, got {mesh.family}")
    cells = []
    for hexc in mesh.cells:
        for t in _KUHN_TETS:
            tet = [int(hexc[i]) for i in t]
            v = mesh.vertices[tet]
            if np.linalg.det(np.stack([v[1] - v[0], v[2] - v[0], v[3] - v[0]])) < 0:
                tet[1], tet[2] = tet[2], tet[1]
            cells.append(tet)
    cells = np.asarray(cells, dtype=np.int64)

    # boundary triangles: tet faces used exactly once, tagged through the
    # quad facet whose vertex set contains them
    el = element("p1tet")
    face_count: dict[frozenset, tuple] = {}
    for cell in cells:
        for loc in el.facets:
            tri = tuple(int(cell[i]) for i in loc)
            key = frozenset(tri)
            if key in face_count:
                face_count[key] = None
            else:
                face_count[key] = tri
    quad_of_vertex: dict[int, list[int]] = {}
    for qi, quad in enumerate(mesh.facets):
        for v in quad:
            quad_of_vertex.setdefault(int(v), []).append(qi)
    facets, ftags = [], []
    for key, tri in face_count.items():
        if tri is None:
            continue
        candidates = set(quad_of_vertex.get(tri[0], ()))
        for v in tri[1:]:
            candidates &= set(quad_of_vertex.get(v, ()))
        if not candidates:
            continue  # boundary face whose quad was untagged
        qi = min(candidates)
        facets.append(tri)
        ftags.append(int(mesh.facet_tags[qi]))
    return Mesh(mesh.vertices.copy(), cells, "p1tet",
                np.asarray(facets, dtype=np.int64),
                np.asarray(ftags, dtype=np.int64), dict(mesh.tags))


def promote_quadratic(mesh: Mesh) -> Mesh:
    """Insert shared mid-edge nodes: p1tet -> p2tet, q1hex -> q2hex20."""
    if mesh.family == "p1tet":
        edges, newfam, facet_edges = TET_EDGES, "p2tet", ((0, 1), (1, 2), (2, 0))
    elif mesh.family == "q1hex":
        edges, newfam, facet_edges = HEX_EDGES, "q2hex20", ((0, 1), (1, 2), (2, 3), (3, 0))
    else:
        raise MeshError(f"cannot promote family {mesh.family}")

    mid: dict[frozenset, int] = {}
    new_verts = [mesh.vertices]
    next_id = mesh.n_vertices

    def midpoint(a, b):
        nonlocal next_id
        key = frozenset((int(a), int(b)))
        got = mid.get(key)
        if got is None:
            new_verts.append(((mesh.vertices[a] + mesh.vertices[b]) / 2.0)[None, :])
            mid[key] = got = next_id
            next_id += 1
        return got

    cells = []
    for cell in mesh.cells:
        cells.append(list(cell) + [midpoint(cell[a], cell[b]) for a, b in edges])
    facets = []
    for f in mesh.facets:
        facets.append(list(f) + [midpoint(f[a], f[b]) for a, b in facet_edges])
    return Mesh(np.vstack(new_verts), np.asarray(cells, dtype=np.int64), newfam,
                np.asarray(facets, dtype=np.int64), mesh.facet_tags.copy(),
                dict(mesh.tags))


def surface_triangles(mesh: Mesh) -> np.ndarray:
    """Boundary surface as corner-vertex triangles (quads split in two)."""
    tris = []
    for f in mesh.facets:
        if mesh.family in ("p1tet", "p2tet"):
            tris.append([f[0], f[1], f[2]])
        else:
            tris.append([f[0], f[1], f[2]])
            tris.append([f[0], f[2], f[3]])
    return np.asarray(tris, dtype=np.int64)


def mesh_summary(mesh: Mesh) -> dict:
    lo = mesh.vertices.min(axis=0).tolist()
    hi = mesh.vertices.max(axis=0).tolist()
    tag_counts = {name: int((mesh.facet_tags == tid).sum())
                  for name, tid in sorted(mesh.tags.items())}
    return {
        "family": mesh.family,
        "vertices": mesh.n_vertices,
        "cells": mesh.n_cells,
        "dofs": 3 * mesh.n_vertices,
        "facets": int(len(mesh.facets)),
        "bbox": [lo, hi],
        "facet_tags": tag_counts,
    }
