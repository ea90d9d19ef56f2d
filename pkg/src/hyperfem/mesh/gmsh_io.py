"""Gmsh .msh reader (ASCII v2.2 and v4.1 subsets) and a v2.2 writer.

Reading applies the gmsh-to-canonical node permutation per family; writing
emits gmsh ordering, so write/read round-trips are exact.  Physical names
become the mesh's facet tag map.
"""

from __future__ import annotations

import numpy as np

from ..elements import GMSH, element, permute
from . import Mesh, MeshError

__all__ = ["read_msh", "write_msh", "MshParseError"]


class MshParseError(MeshError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


# gmsh element type id -> (family, n_nodes)
_GMSH_TYPES = {
    2: ("tri3", 3), 3: ("quad4", 4), 4: ("p1tet", 4), 5: ("q1hex", 8),
    9: ("tri6", 6), 11: ("p2tet", 10), 16: ("quad8", 8), 17: ("q2hex20", 20),
}
_TYPE_OF_FAMILY = {fam: tid for tid, (fam, _) in _GMSH_TYPES.items()}
_VOLUME_FAMILIES = ("p1tet", "p2tet", "q1hex", "q2hex20")


class _Lines:
    def __init__(self, text):
        self.lines = text.splitlines()
        self.i = 0

    def next(self):
        if self.i >= len(self.lines):
            raise MshParseError("unexpected end of file", self.i)
        s = self.lines[self.i]
        self.i += 1
        return s.strip()

    def expect(self, token):
        s = self.next()
        if s != token:
            raise MshParseError(f"expected {token!r}, got {s!r}", self.i)

    def skip_section(self, end_token):
        while True:
            if self.next() == end_token:
                return


def read_msh(path) -> Mesh:
    """Parse a .msh file into a canonical-order Mesh."""
    with open(path) as fh:
        text = fh.read()
    ln = _Lines(text)
    ln.expect("$MeshFormat")
    fmt = ln.next().split()
    version = fmt[0]
    if fmt[1] != "0":
        raise MshParseError("binary .msh files are not supported", ln.i)
    ln.expect("$EndMeshFormat")
    try:
        if version.startswith("2."):
            return _read_v2(ln)
        if version.startswith("4."):
            return _read_v4(ln)
    except MshParseError:
        raise
    except ValueError as err:
        raise MshParseError(str(err), ln.i) from err
    raise MshParseError(f"unsupported msh version {version}", ln.i)


def _collect(ln, names, node_ids, coords, elems):
    """Build the Mesh from parsed pieces shared by both format versions."""
    id_to_idx = {nid: i for i, nid in enumerate(node_ids)}
    vertices = np.asarray(coords, dtype=np.float64)

    volume_family = None
    cells, facets, ftags = [], [], []
    for fam, phys, nodes in elems:
        canal = permute(GMSH, fam, [id_to_idx[n] for n in nodes])
        if fam in _VOLUME_FAMILIES:
            if volume_family is None:
                volume_family = fam
            elif volume_family != fam:
                raise MshParseError(
                    f"mixed volume element families: {volume_family} and {fam}")
            cells.append(canal)
        else:
            facets.append(canal)
            ftags.append(phys)
    if volume_family is None:
        raise MshParseError("no volume elements found")
    tags = dict(names)
    for t in ftags:
        if t not in tags.values():
            tags.setdefault(f"tag_{t}", t)
    return Mesh(vertices, np.asarray(cells, dtype=np.int64), volume_family,
                np.asarray(facets, dtype=np.int64).reshape(len(facets), -1),
                np.asarray(ftags, dtype=np.int64), tags)


def _read_physical_names(ln):
    n = int(ln.next())
    names = {}
    for _ in range(n):
        parts = ln.next().split(maxsplit=2)
        names[parts[2].strip().strip('"')] = int(parts[1])
    ln.expect("$EndPhysicalNames")
    return names


def _read_v2(ln: _Lines) -> Mesh:
    names = {}
    node_ids, coords, elems = [], [], []
    while ln.i < len(ln.lines):
        section = ln.next()
        if not section:
            continue
        if section == "$PhysicalNames":
            names = _read_physical_names(ln)
        elif section == "$Nodes":
            n = int(ln.next())
            for _ in range(n):
                parts = ln.next().split()
                node_ids.append(int(parts[0]))
                coords.append([float(parts[1]), float(parts[2]), float(parts[3])])
            ln.expect("$EndNodes")
        elif section == "$Elements":
            n = int(ln.next())
            for _ in range(n):
                row = ln.next().split()
                etype = int(row[1])
                if etype == 15 or etype == 1 or etype == 8:
                    continue  # points and line elements carry no surface/volume data
                if etype not in _GMSH_TYPES:
                    raise MshParseError(f"unsupported element type {etype}", ln.i)
                fam, nn = _GMSH_TYPES[etype]
                ntags = int(row[2])
                phys = int(row[3]) if ntags >= 1 else 0
                nodes = [int(x) for x in row[3 + ntags:]]
                if len(nodes) != nn:
                    raise MshParseError(
                        f"element type {etype} expects {nn} nodes, got {len(nodes)}",
                        ln.i)
                elems.append((fam, phys, nodes))
            ln.expect("$EndElements")
        elif section.startswith("$"):
            ln.skip_section("$End" + section[1:])
    return _collect(ln, names, node_ids, coords, elems)


def _read_v4(ln: _Lines) -> Mesh:
    names = {}
    entity_phys = {}   # (dim, entityTag) -> physical tag
    node_ids, coords, elems = [], [], []
    while ln.i < len(ln.lines):
        section = ln.next()
        if not section:
            continue
        if section == "$PhysicalNames":
            names = _read_physical_names(ln)
        elif section == "$Entities":
            np_, nc, ns, nv = (int(x) for x in ln.next().split())
            for _ in range(np_):
                parts = ln.next().split()
                k = int(parts[4]) if len(parts) > 4 else 0
                if k:
                    entity_phys[(0, int(parts[0]))] = int(parts[5])
            for dim, count in ((1, nc), (2, ns), (3, nv)):
                for _ in range(count):
                    parts = ln.next().split()
                    k = int(parts[7])
                    if k:
                        entity_phys[(dim, int(parts[0]))] = int(parts[8])
            ln.expect("$EndEntities")
        elif section == "$Nodes":
            nblocks = int(ln.next().split()[0])
            for _ in range(nblocks):
                dim, etag, _, nn = (int(x) for x in ln.next().split())
                ids = [int(ln.next()) for _ in range(nn)]
                for nid in ids:
                    node_ids.append(nid)
                for _ in range(nn):
                    parts = ln.next().split()
                    coords.append([float(parts[0]), float(parts[1]), float(parts[2])])
            ln.expect("$EndNodes")
        elif section == "$Elements":
            nblocks = int(ln.next().split()[0])
            for _ in range(nblocks):
                dim, etag, etype, ne = (int(x) for x in ln.next().split())
                if etype in (15, 1, 8):
                    for _ in range(ne):
                        ln.next()
                    continue
                if etype not in _GMSH_TYPES:
                    raise MshParseError(f"unsupported element type {etype}", ln.i)
                fam, nn = _GMSH_TYPES[etype]
                phys = entity_phys.get((dim, etag), 0)
                for _ in range(ne):
                    row = [int(x) for x in ln.next().split()]
                    if len(row) - 1 != nn:
                        raise MshParseError(
                            f"element type {etype} expects {nn} nodes, got {len(row) - 1}",
                            ln.i)
                    elems.append((fam, phys, row[1:]))
            ln.expect("$EndElements")
        elif section.startswith("$"):
            ln.skip_section("$End" + section[1:])
    return _collect(ln, names, node_ids, coords, elems)


def _inverse(perm):
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    return inv


def write_msh(path, mesh: Mesh):
    """Write ASCII msh v2.2 with facets tagged by their physical ids."""
    fam = mesh.family
    cell_perm = _inverse(GMSH.map_for(fam))
    facet_fam = element(fam).facet_family
    facet_perm = _inverse(GMSH.map_for(facet_fam))
    lines = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat"]
    if mesh.tags:
        lines.append("$PhysicalNames")
        lines.append(str(len(mesh.tags)))
        for name, tid in sorted(mesh.tags.items(), key=lambda kv: kv[1]):
            lines.append(f'2 {tid} "{name}"')
        lines.append("$EndPhysicalNames")
    lines.append("$Nodes")
    lines.append(str(mesh.n_vertices))
    for i, (x, y, z) in enumerate(mesh.vertices, start=1):
        lines.append(f"{i} {float(x)!r} {float(y)!r} {float(z)!r}")
    lines.append("$EndNodes")
    lines.append("$Elements")
    lines.append(str(mesh.n_cells + len(mesh.facets)))
    eid = 1
    ftype = _TYPE_OF_FAMILY[facet_fam]
    for f, tag in zip(mesh.facets, mesh.facet_tags):
        nodes = " ".join(str(int(v) + 1) for v in np.asarray(f)[facet_perm])
        lines.append(f"{eid} {ftype} 2 {int(tag)} {int(tag)} {nodes}")
        eid += 1
    ctype = _TYPE_OF_FAMILY[fam]
    for c in mesh.cells:
        nodes = " ".join(str(int(v) + 1) for v in np.asarray(c)[cell_perm])
        lines.append(f"{eid} {ctype} 2 0 0 {nodes}")
        eid += 1
    lines.append("$EndElements")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
