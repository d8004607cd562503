"""Independent reference computations the tests check the library against.

Everything here is deliberately naive: dense matrices, O(N*M) scans, plain
fsum reductions.  None of it shares code paths with the package.
"""

import math

import numpy as np


def fsum_inner(a, b, h):
    """Exactly rounded h^3-weighted inner product of two interior arrays."""
    return h ** 3 * math.fsum((a * b).ravel().tolist())


def neumann_laplacian_matrix(shape, h):
    """Dense 7-point Laplacian with mirror boundaries, row-major over cells."""
    nx, ny, nz = shape
    n = nx * ny * nz

    def flat(i, j, k):
        return (i * ny + j) * nz + k

    lap = np.zeros((n, n))
    inv_h2 = 1.0 / h ** 2
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                row = flat(i, j, k)
                lap[row, row] -= 6.0 * inv_h2
                for di, dj, dk in ((1, 0, 0), (-1, 0, 0), (0, 1, 0),
                                   (0, -1, 0), (0, 0, 1), (0, 0, -1)):
                    ii = min(max(i + di, 0), nx - 1)
                    jj = min(max(j + dj, 0), ny - 1)
                    kk = min(max(k + dk, 0), nz - 1)
                    lap[row, flat(ii, jj, kk)] += inv_h2
    return lap


def dense_block_solve(shape, h, dt, stabilization, g, r1, r2):
    """Direct solve of the coupled per-cell 2x2 relaxation system.

    Unknowns ordered [phi..., mu...]; rows are
        phi / dt + g mu = r1
        -(S/2) phi + (1/2) lap(phi) + mu = r2
    with the mirror-boundary Laplacian.  Inputs are interior arrays.
    """
    n = int(np.prod(shape))
    lap = neumann_laplacian_matrix(shape, h)
    a = np.zeros((2 * n, 2 * n))
    a[:n, :n] = np.eye(n) / dt
    a[:n, n:] = np.diag(g.ravel())
    a[n:, :n] = 0.5 * lap - 0.5 * stabilization * np.eye(n)
    a[n:, n:] = np.eye(n)
    rhs = np.concatenate([r1.ravel(), r2.ravel()])
    sol = np.linalg.solve(a, rhs)
    return sol[:n].reshape(shape), sol[n:].reshape(shape)


def brute_force_distances(queries, points):
    """O(N*M) nearest-sample distance for each query row."""
    diff = queries[:, None, :] - points[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2)).min(axis=1)


def bisect_root(poly, lo, hi, tol=1e-12):
    """Plain bisection for a sign change of a polynomial given by coeffs
    (highest degree first)."""
    f_lo = np.polyval(poly, lo)
    f_hi = np.polyval(poly, hi)
    assert f_lo * f_hi <= 0, "oracle requires a bracketing interval"
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = np.polyval(poly, mid)
        if f_mid == 0.0 or hi - lo < tol:
            return mid
        if (f_lo < 0) == (f_mid < 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def read_vtk_structured_points(path):
    """Minimal independent reader for the legacy structured-points layout."""
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh]
    assert lines[0].startswith("# vtk DataFile")
    assert lines[2] == "ASCII"
    assert lines[3] == "DATASET STRUCTURED_POINTS"
    meta = {}
    idx = 4
    while not lines[idx].startswith("LOOKUP_TABLE"):
        key, _, rest = lines[idx].partition(" ")
        meta[key] = rest.split()
        idx += 1
    idx += 1
    dims = tuple(int(v) for v in meta["DIMENSIONS"])
    origin = tuple(float(v) for v in meta["ORIGIN"])
    spacing = tuple(float(v) for v in meta["SPACING"])
    count = int(meta["POINT_DATA"][0])
    values = np.array([float(tok) for line in lines[idx:] for tok in line.split()])
    assert len(values) == count
    # x varies fastest in the file
    field = values.reshape((dims[2], dims[1], dims[0])).transpose(2, 1, 0)
    return dims, origin, spacing, field


def read_obj(path):
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            tokens = line.split()
            if not tokens:
                continue
            if tokens[0] == "v":
                verts.append([float(t) for t in tokens[1:4]])
            elif tokens[0] == "f":
                faces.append([int(t) - 1 for t in tokens[1:4]])
    return np.array(verts).reshape(-1, 3), np.array(faces, dtype=int).reshape(-1, 3)
