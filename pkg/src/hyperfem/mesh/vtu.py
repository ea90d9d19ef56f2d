"""Legacy-compatible VTK unstructured grid (XML .vtu, ASCII) output."""

from __future__ import annotations

import numpy as np

from . import Mesh

__all__ = ["write_vtu"]

_VTK_CELL_TYPE = {"p1tet": 10, "q1hex": 12, "p2tet": 24, "q2hex20": 25}


def _array(vals, fmt=None):
    if fmt is None:
        return " ".join(repr(float(v)) for v in vals)
    return " ".join(fmt.format(v) for v in vals)


def write_vtu(path, mesh: Mesh, point_data: dict | None = None):
    """Write the mesh with optional named per-vertex vector/scalar fields."""
    n = mesh.n_vertices
    c = mesh.n_cells
    ctype = _VTK_CELL_TYPE[mesh.family]
    per_cell = mesh.cells.shape[1]
    out = []
    out.append('<?xml version="1.0"?>')
    out.append('<VTKFile type="UnstructuredGrid" version="0.1" byte_order="LittleEndian">')
    out.append("  <UnstructuredGrid>")
    out.append(f'    <Piece NumberOfPoints="{n}" NumberOfCells="{c}">')
    out.append("      <Points>")
    out.append('        <DataArray type="Float64" NumberOfComponents="3" format="ascii">')
    out.append("          " + _array(mesh.vertices.ravel()))
    out.append("        </DataArray>")
    out.append("      </Points>")
    out.append("      <Cells>")
    out.append('        <DataArray type="Int64" Name="connectivity" format="ascii">')
    out.append("          " + _array(mesh.cells.ravel(), "{}"))
    out.append("        </DataArray>")
    out.append('        <DataArray type="Int64" Name="offsets" format="ascii">')
    out.append("          " + _array(range(per_cell, per_cell * (c + 1), per_cell), "{}"))
    out.append("        </DataArray>")
    out.append('        <DataArray type="UInt8" Name="types" format="ascii">')
    out.append("          " + _array([ctype] * c, "{}"))
    out.append("        </DataArray>")
    out.append("      </Cells>")
    if point_data:
        vectors = [k for k, v in point_data.items()
                   if np.asarray(v).ndim == 2 and np.asarray(v).shape[1] == 3]
        attr = f' Vectors="{vectors[0]}"' if vectors else ""
        out.append(f"      <PointData{attr}>")
        for name, data in point_data.items():
            data = np.asarray(data, dtype=np.float64)
            comp = 1 if data.ndim == 1 else data.shape[1]
            if len(data) != n:
                raise ValueError(
                    f"point data {name!r} has {len(data)} rows for {n} points")
            out.append(f'        <DataArray type="Float64" Name="{name}" '
                       f'NumberOfComponents="{comp}" format="ascii">')
            out.append("          " + _array(data.ravel()))
            out.append("        </DataArray>")
        out.append("      </PointData>")
    out.append("    </Piece>")
    out.append("  </UnstructuredGrid>")
    out.append("</VTKFile>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
