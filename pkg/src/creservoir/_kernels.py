"""Numba kernels for sector-restricted state algebra.

State vectors are (dim_alpha, dim_beta) arrays: alpha strings index rows,
beta strings index columns.  All kernels run single-threaded with a fixed
loop order so results are bitwise reproducible run to run.  The same source
specializes for float64 (eigensolver vectors) and complex128 (ansatz states).
"""

import numpy as np
from numba import njit

# ---------------------------------------------------------------------------
# Two-state rotation e^{-i theta X} on paired rows/columns (complex only).
# Pair convention: (a, b) -> (c*a - i*s*b, c*b - i*s*a).


@njit(cache=True)
def givens_rows(v, rows_a, rows_b, c, s):
    nb = v.shape[1]
    for k in range(rows_a.shape[0]):
        ia = rows_a[k]
        ib = rows_b[k]
        for j in range(nb):
            a = v[ia, j]
            b = v[ib, j]
            v[ia, j] = c * a - 1j * s * b
            v[ib, j] = c * b - 1j * s * a


@njit(cache=True)
def givens_cols(v, cols_a, cols_b, c, s):
    na = v.shape[0]
    for i in range(na):
        for k in range(cols_a.shape[0]):
            ja = cols_a[k]
            jb = cols_b[k]
            a = v[i, ja]
            b = v[i, jb]
            v[i, ja] = c * a - 1j * s * b
            v[i, jb] = c * b - 1j * s * a


@njit(cache=True)
def phase_block(v, rows, cols, ph):
    for ii in range(rows.shape[0]):
        i = rows[ii]
        for jj in range(cols.shape[0]):
            v[i, cols[jj]] *= ph


# ---------------------------------------------------------------------------
# Generator overlaps for the adjoint gradient sweep.


@njit(cache=True)
def hop_overlap_rows(phi, psi, rows_a, rows_b):
    acc = 0.0 + 0.0j
    nb = phi.shape[1]
    for k in range(rows_a.shape[0]):
        ia = rows_a[k]
        ib = rows_b[k]
        for j in range(nb):
            acc += np.conj(phi[ia, j]) * psi[ib, j] + np.conj(phi[ib, j]) * psi[ia, j]
    return acc


@njit(cache=True)
def hop_overlap_cols(phi, psi, cols_a, cols_b):
    acc = 0.0 + 0.0j
    na = phi.shape[0]
    for i in range(na):
        for k in range(cols_a.shape[0]):
            ja = cols_a[k]
            jb = cols_b[k]
            acc += np.conj(phi[i, ja]) * psi[i, jb] + np.conj(phi[i, jb]) * psi[i, ja]
    return acc


@njit(cache=True)
def occ_block_overlap(phi, psi, rows, cols):
    acc = 0.0 + 0.0j
    for ii in range(rows.shape[0]):
        i = rows[ii]
        for jj in range(cols.shape[0]):
            j = cols[jj]
            acc += np.conj(phi[i, j]) * psi[i, j]
    return acc


# ---------------------------------------------------------------------------
# Sigma-vector gather/scatter over symmetrized single-excitation link tables.
#
# For an unordered orbital pair A = (p > q) the links enumerate strings with
# q occupied and p empty (src) and their images under the q->p hop (dst).
# The symmetrized transform (E_pq + E_qp) updates both directions at once.
# Diagonal pairs A = (p, p) reduce to occupation masks.


@njit(cache=True)
def sym_gather_rows(psi, out, tri_ids, offs, src, dst, sgn):
    nb = psi.shape[1]
    for ip in range(tri_ids.shape[0]):
        a = tri_ids[ip]
        for t in range(offs[ip], offs[ip + 1]):
            s_ = src[t]
            d_ = dst[t]
            g = sgn[t]
            for j in range(nb):
                out[a, d_, j] += g * psi[s_, j]
                out[a, s_, j] += g * psi[d_, j]


@njit(cache=True)
def sym_gather_cols(psi, out, tri_ids, offs, src, dst, sgn):
    na = psi.shape[0]
    for ip in range(tri_ids.shape[0]):
        a = tri_ids[ip]
        for t in range(offs[ip], offs[ip + 1]):
            s_ = src[t]
            d_ = dst[t]
            g = sgn[t]
            for i in range(na):
                out[a, i, d_] += g * psi[i, s_]
                out[a, i, s_] += g * psi[i, d_]


@njit(cache=True)
def diag_gather_rows(psi, out, tri_ids, offs, ranks):
    nb = psi.shape[1]
    for ip in range(tri_ids.shape[0]):
        a = tri_ids[ip]
        for t in range(offs[ip], offs[ip + 1]):
            r = ranks[t]
            for j in range(nb):
                out[a, r, j] += psi[r, j]


@njit(cache=True)
def diag_gather_cols(psi, out, tri_ids, offs, ranks):
    na = psi.shape[0]
    for ip in range(tri_ids.shape[0]):
        a = tri_ids[ip]
        for t in range(offs[ip], offs[ip + 1]):
            r = ranks[t]
            for i in range(na):
                out[a, i, r] += psi[i, r]


@njit(cache=True)
def sym_scatter_rows(tmat, sigma, tri_ids, offs, src, dst, sgn):
    nb = sigma.shape[1]
    for ip in range(tri_ids.shape[0]):
        a = tri_ids[ip]
        for t in range(offs[ip], offs[ip + 1]):
            s_ = src[t]
            d_ = dst[t]
            g = sgn[t]
            for j in range(nb):
                sigma[d_, j] += g * tmat[a, s_, j]
                sigma[s_, j] += g * tmat[a, d_, j]


@njit(cache=True)
def sym_scatter_cols(tmat, sigma, tri_ids, offs, src, dst, sgn):
    na = sigma.shape[0]
    for ip in range(tri_ids.shape[0]):
        a = tri_ids[ip]
        for t in range(offs[ip], offs[ip + 1]):
            s_ = src[t]
            d_ = dst[t]
            g = sgn[t]
            for i in range(na):
                sigma[i, d_] += g * tmat[a, i, s_]
                sigma[i, s_] += g * tmat[a, i, d_]


@njit(cache=True)
def diag_scatter_rows(tmat, sigma, tri_ids, offs, ranks):
    nb = sigma.shape[1]
    for ip in range(tri_ids.shape[0]):
        a = tri_ids[ip]
        for t in range(offs[ip], offs[ip + 1]):
            r = ranks[t]
            for j in range(nb):
                sigma[r, j] += tmat[a, r, j]


@njit(cache=True)
def diag_scatter_cols(tmat, sigma, tri_ids, offs, ranks):
    na = sigma.shape[0]
    for ip in range(tri_ids.shape[0]):
        a = tri_ids[ip]
        for t in range(offs[ip], offs[ip + 1]):
            r = ranks[t]
            for i in range(na):
                sigma[i, r] += tmat[a, i, r]


# ---------------------------------------------------------------------------
# Spin-raising map into the (n_alpha + 1, n_beta - 1) sector, one orbital at
# a time: out[i', j'] += s_a * s_b * v[i, j] over the per-orbital link lists.


@njit(cache=True)
def accumulate_splus(v, out, a_src, a_dst, a_sgn, b_src, b_dst, b_sgn):
    for ia in range(a_src.shape[0]):
        i0 = a_src[ia]
        i1 = a_dst[ia]
        si = a_sgn[ia]
        for jb in range(b_src.shape[0]):
            out[i1, b_dst[jb]] += si * b_sgn[jb] * v[i0, b_src[jb]]
