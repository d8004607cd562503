"""Jit-compiled inner loops: relaxation sweeps and bucket-grid queries.

Everything here is deterministic: serial kernels accumulate in loop order,
and the parallel red-black sweep writes per-cell increments that are reduced
outside the kernel with numpy's fixed-order sum.  ``fastmath`` stays off so
results are bit-reproducible.
"""

import numba as nb
import numpy as np

_jit = {"nogil": True, "cache": True}


@nb.njit(**_jit)
def gs_sweep_serial(phi, mu, r1, r2, g, inv_dt, row2_diag, inv_2h2):
    """One lexicographic Gauss-Seidel pass over the padded interior.

    Per cell, solves the 2x2 system

        [ inv_dt     g_c ] [phi_c]   [ r1_c                          ]
        [ row2_diag  1   ] [mu_c ] = [ r2_c - inv_2h2 * (6-nb sum)   ]

    with the six stencil neighbors taken at their latest values; boundary
    neighbors are index-clamped, which realizes the mirror ghosts without
    reading the (possibly stale) padding.  Returns the raw sum of squared
    phi increments (caller scales by h^3).
    """
    nx = phi.shape[0] - 2
    ny = phi.shape[1] - 2
    nz = phi.shape[2] - 2
    acc = 0.0
    for i in range(1, nx + 1):
        im = i - 1 if i > 1 else 1
        ip = i + 1 if i < nx else nx
        for j in range(1, ny + 1):
            jm = j - 1 if j > 1 else 1
            jp = j + 1 if j < ny else ny
            for k in range(1, nz + 1):
                km = k - 1 if k > 1 else 1
                kp = k + 1 if k < nz else nz
                nbsum = (phi[im, j, k] + phi[ip, j, k]
                         + phi[i, jm, k] + phi[i, jp, k]
                         + phi[i, j, km] + phi[i, j, kp])
                b = g[i, j, k]
                rhs2 = r2[i, j, k] - inv_2h2 * nbsum
                det = inv_dt - b * row2_diag
                new_phi = (r1[i, j, k] - b * rhs2) / det
                mu[i, j, k] = (inv_dt * rhs2 - row2_diag * r1[i, j, k]) / det
                delta = new_phi - phi[i, j, k]
                acc += delta * delta
                phi[i, j, k] = new_phi
    return acc


@nb.njit(parallel=True, **_jit)
def gs_sweep_color(phi, mu, r1, r2, g, inv_dt, row2_diag, inv_2h2, color, sq_diff):
    """One color phase of a red-black sweep (color = parity of i+j+k).

    Cells of one color only read the other color, so the outer loop is safe
    to run in parallel.  Squared increments go into ``sq_diff`` per cell.
    """
    nx = phi.shape[0] - 2
    ny = phi.shape[1] - 2
    nz = phi.shape[2] - 2
    for i in nb.prange(1, nx + 1):
        im = i - 1 if i > 1 else 1
        ip = i + 1 if i < nx else nx
        for j in range(1, ny + 1):
            jm = j - 1 if j > 1 else 1
            jp = j + 1 if j < ny else ny
            for k in range(1, nz + 1):
                if (i + j + k) & 1 != color:
                    continue
                km = k - 1 if k > 1 else 1
                kp = k + 1 if k < nz else nz
                nbsum = (phi[im, j, k] + phi[ip, j, k]
                         + phi[i, jm, k] + phi[i, jp, k]
                         + phi[i, j, km] + phi[i, j, kp])
                b = g[i, j, k]
                rhs2 = r2[i, j, k] - inv_2h2 * nbsum
                det = inv_dt - b * row2_diag
                new_phi = (r1[i, j, k] - b * rhs2) / det
                mu[i, j, k] = (inv_dt * rhs2 - row2_diag * r1[i, j, k]) / det
                delta = new_phi - phi[i, j, k]
                sq_diff[i - 1, j - 1, k - 1] = delta * delta
                phi[i, j, k] = new_phi


@nb.njit(**_jit)
def nearest_dist_sq(q0, q1, q2, pts, order, start, d0, d1, d2, b0, b1, b2, bsize, best_init):
    """Squared distance from one query point to the nearest sample.

    Buckets are visited in shells of increasing Chebyshev radius around the
    query's (clamped) bucket; shell r+1 and beyond cannot hold anything
    closer than r * bsize, which gives the exact termination rule.
    ``best_init`` may carry a known upper bound (squared); passing inf
    disables it.  The result is the exact minimum either way.
    """
    ci = min(max(int(np.floor((q0 - b0) / bsize)), 0), d0 - 1)
    cj = min(max(int(np.floor((q1 - b1) / bsize)), 0), d1 - 1)
    ck = min(max(int(np.floor((q2 - b2) / bsize)), 0), d2 - 1)
    r_max = max(max(ci, d0 - 1 - ci), max(cj, d1 - 1 - cj), max(ck, d2 - 1 - ck))
    best = best_init
    for r in range(r_max + 1):
        if r > 0:
            lb = (r - 1) * bsize
            if best <= lb * lb:
                break
        # shell of buckets with Chebyshev distance exactly r from (ci,cj,ck)
        for di in range(-r, r + 1):
            i = ci + di
            if i < 0 or i >= d0:
                continue
            on_i = abs(di) == r
            for dj in range(-r, r + 1):
                j = cj + dj
                if j < 0 or j >= d1:
                    continue
                on_ij = on_i or abs(dj) == r
                if on_ij:
                    k_lo, k_step = -r, 1
                else:
                    k_lo, k_step = -r, 2 * r  # only dk = +/- r remain
                for dk in range(k_lo, r + 1, k_step):
                    k = ck + dk
                    if k < 0 or k >= d2:
                        continue
                    bid = (i * d1 + j) * d2 + k
                    s0 = start[bid]
                    s1 = start[bid + 1]
                    if s1 == s0:
                        continue
                    # prune occupied buckets whose box cannot beat the best
                    ax = b0 + i * bsize
                    gx = ax - q0 if ax > q0 else (q0 - ax - bsize if q0 > ax + bsize else 0.0)
                    ay = b1 + j * bsize
                    gy = ay - q1 if ay > q1 else (q1 - ay - bsize if q1 > ay + bsize else 0.0)
                    az = b2 + k * bsize
                    gz = az - q2 if az > q2 else (q2 - az - bsize if q2 > az + bsize else 0.0)
                    if gx * gx + gy * gy + gz * gz >= best:
                        continue
                    for n in range(s0, s1):
                        m = order[n]
                        dx = q0 - pts[m, 0]
                        dy = q1 - pts[m, 1]
                        dz = q2 - pts[m, 2]
                        dist = dx * dx + dy * dy + dz * dz
                        if dist < best:
                            best = dist
    return best


@nb.njit(**_jit)
def distance_field_eval(out, x0, y0, z0, h, pts,
                        order_f, start_f, f0, f1, f2, bf,
                        order_c, start_c, c0, c1, c2, bc,
                        b0, b1, b2, has_coarse):
    """Nearest-sample distance at every interior cell center of a padded field.

    Each cell warm-starts from already-computed face neighbors (the distance
    field is 1-Lipschitz, so neighbor + h is a rigorous upper bound; the
    tiny inflation keeps it an upper bound under rounding).  Cells far from
    the samples run the shell search on the coarse bucket level, whose
    termination ball is inspected at coarse granularity -- same exact
    minimum, far fewer bucket visits.
    """
    nx = out.shape[0] - 2
    ny = out.shape[1] - 2
    nz = out.shape[2] - 2
    coarse_above = 4.0 * bf
    for i in range(1, nx + 1):
        qx = x0 + (i - 0.5) * h
        for j in range(1, ny + 1):
            qy = y0 + (j - 0.5) * h
            for k in range(1, nz + 1):
                qz = z0 + (k - 0.5) * h
                hint = np.inf
                if k > 1 and out[i, j, k - 1] + h < hint:
                    hint = out[i, j, k - 1] + h
                if j > 1 and out[i, j - 1, k] + h < hint:
                    hint = out[i, j - 1, k] + h
                if i > 1 and out[i - 1, j, k] + h < hint:
                    hint = out[i - 1, j, k] + h
                if np.isfinite(hint):
                    hint *= 1.0 + 1e-12
                    best_init = hint * hint
                else:
                    best_init = np.inf
                if has_coarse and hint > coarse_above:
                    dsq = nearest_dist_sq(qx, qy, qz, pts, order_c, start_c,
                                          c0, c1, c2, b0, b1, b2, bc, best_init)
                else:
                    dsq = nearest_dist_sq(qx, qy, qz, pts, order_f, start_f,
                                          f0, f1, f2, b0, b1, b2, bf, best_init)
                out[i, j, k] = np.sqrt(dsq)
