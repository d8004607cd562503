"""Zero-level-set mesh extraction and file emission.

The cube lattice is the cell-center lattice: node (i, j, k) carries the
cell-center value and sits at ``origin + ((i + 0.5) h, ...)``.  The VTK
writer records that half-cell offset in its ORIGIN line so downstream tools
place the data correctly.  All writers emit ASCII with 17 significant
digits.
"""

from dataclasses import dataclass

import numpy as np

from ._mc_tables import CUT_EDGES, TRIANGLES

# per table edge index: (axis, node offset of the edge's lower end)
_EDGE_AXIS = (0, 1, 0, 1, 0, 1, 0, 1, 2, 2, 2, 2)
_EDGE_BASE = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 0),
              (0, 0, 1), (1, 0, 1), (0, 1, 1), (0, 0, 1),
              (0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0))
_CORNER_OFFSETS = ((0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
                   (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1))


@dataclass
class IsoMesh:
    """Triangle mesh with shared vertices.

    Every vertex lies on a lattice edge where the field crosses the
    isovalue, positioned by linear interpolation.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)


def marching_cubes(phi, iso=0.0):
    """Triangulate the isosurface {phi = iso} over the cell-center lattice.

    Vertices on edges shared by adjacent cubes are welded through a global
    edge key, so the mesh of a closed surface is watertight away from the
    domain boundary.  A field with one sign everywhere yields an empty mesh.
    Degenerate triangles (possible only when a node value equals the
    isovalue exactly) are dropped.
    """
    vals = np.ascontiguousarray(phi.interior)
    nx, ny, nz = vals.shape
    below = vals < iso
    case = np.zeros((nx - 1, ny - 1, nz - 1), dtype=np.int32)
    for bit, (ci, cj, ck) in enumerate(_CORNER_OFFSETS):
        view = below[ci:ci + nx - 1, cj:cj + ny - 1, ck:ck + nz - 1]
        case |= view.astype(np.int32) << bit
    active = np.argwhere(CUT_EDGES[case] != 0)
    if len(active) == 0:
        return IsoMesh(np.empty((0, 3)), np.empty((0, 3), dtype=np.int64))

    origin = np.asarray(phi.spec.origin)
    h = phi.spec.h
    edge_vertex = {}
    vertices = []
    triangles = []
    for i, j, k in active:
        c = case[i, j, k]
        cut = int(CUT_EDGES[c])
        local = [-1] * 12
        for e in range(12):
            if not cut & (1 << e):
                continue
            axis = _EDGE_AXIS[e]
            bi, bj, bk = _EDGE_BASE[e]
            node = (i + bi, j + bj, k + bk)
            key = (axis, node)
            idx = edge_vertex.get(key)
            if idx is None:
                v1 = vals[node]
                upper = list(node)
                upper[axis] += 1
                v2 = vals[tuple(upper)]
                t = (iso - v1) / (v2 - v1)
                t = min(max(t, 0.0), 1.0)
                pos = origin + (np.array(node) + 0.5) * h
                pos[axis] += t * h
                idx = len(vertices)
                vertices.append(pos)
                edge_vertex[key] = idx
            local[e] = idx
        row = TRIANGLES[c]
        for n in range(0, 16, 3):
            if row[n] < 0:
                break
            a, b, d = local[row[n]], local[row[n + 1]], local[row[n + 2]]
            if a == b or b == d or a == d:
                continue
            triangles.append((a, b, d))
    return IsoMesh(np.array(vertices), np.array(triangles, dtype=np.int64))


def surface_area(mesh):
    """Total triangle area."""
    if mesh.n_triangles == 0:
        return 0.0
    v = mesh.vertices
    t = mesh.triangles
    cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    return 0.5 * float(np.sum(np.linalg.norm(cross, axis=1)))


def _fmt(x):
    return f"{x:.17g}"


def write_vtk_structured(phi, spec, path):
    """Legacy ASCII structured-points file with one scalar array named phi.

    ORIGIN is the first cell center; values are written x-fastest, then y,
    then z, as the structured-points convention expects.
    """
    if not path:
        raise ValueError("empty output path")
    if phi.spec != spec:
        raise ValueError("field/grid mismatch in write_vtk_structured")
    first_center = [spec.origin[a] + 0.5 * spec.h for a in range(3)]
    values = phi.interior.ravel(order="F")
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write("phaseshell scalar field\n")
        fh.write("ASCII\n")
        fh.write("DATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {spec.nx} {spec.ny} {spec.nz}\n")
        fh.write(f"ORIGIN {_fmt(first_center[0])} {_fmt(first_center[1])} {_fmt(first_center[2])}\n")
        fh.write(f"SPACING {_fmt(spec.h)} {_fmt(spec.h)} {_fmt(spec.h)}\n")
        fh.write(f"POINT_DATA {spec.n_cells}\n")
        fh.write("SCALARS phi double 1\n")
        fh.write("LOOKUP_TABLE default\n")
        for v in values:
            fh.write(_fmt(v) + "\n")


def write_obj(mesh, path):
    """Wavefront OBJ: v lines then f lines with 1-based indices."""
    if not path:
        raise ValueError("empty output path")
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def write_energy_csv(records, path):
    """Per-step diagnostics table; header plus one row per record."""
    if not path:
        raise ValueError("empty output path")
    with open(path, "w") as fh:
        fh.write("step,time,q,e_tilde,e_original,volume,gs_u,gs_v,newton_iters\n")
        for r in records:
            fh.write(",".join([
                str(r.step), _fmt(r.t), _fmt(r.q), _fmt(r.e_tilde),
                _fmt(r.e_original), _fmt(r.volume),
                str(r.gs_u), str(r.gs_v), str(r.newton_iters),
            ]) + "\n")
