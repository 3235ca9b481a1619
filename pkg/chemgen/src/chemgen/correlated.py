"""Classical reference energies on active-space integrals.

FCI: sparse determinant-space matrix (own Slater-Condon assembly) fed to a
Lanczos eigensolver; affordable up to a dimension cap.  CCSD and CCSD(T):
spin-orbital equations with the full Fock matrix carried in the residuals,
so a non-canonical (e.g. ROHF) reference is handled; denominators use the
Fock diagonal.  Integrals arrive in chemists' notation over spatial MOs.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh


class CorrelationError(RuntimeError):
    """Amplitude iterations failed to converge."""


# ---------------------------------------------------------------------------
# Full configuration interaction.


def _strings(n_orb, n_elec):
    return [frozenset(c) for c in itertools.combinations(range(n_orb), n_elec)]


def _string_tuples(n_orb, n_elec):
    return list(itertools.combinations(range(n_orb), n_elec))


def _single_sign(occ_tuple, i, a):
    """Phase of the i -> a excitation on an ascending-ordered determinant."""
    lo, hi = (i, a) if i < a else (a, i)
    return -1 if sum(1 for p in occ_tuple if lo < p < hi) % 2 else 1


def _spin_singles(tuples, index_of, n_orb):
    """(rank, new_rank, i, a, sign) for every single excitation."""
    out = []
    for r, occ in enumerate(tuples):
        occ_set = set(occ)
        for i in occ:
            for a in range(n_orb):
                if a in occ_set:
                    continue
                new = tuple(sorted(occ_set - {i} | {a}))
                out.append((r, index_of[new], i, a, _single_sign(occ, i, a)))
    return out


def fci_ground(h1, eri, n_alpha, n_beta, core=0.0, k=1, max_dim=40000,
               tol=0.0):
    """Lowest k FCI eigenvalues; None when the sector exceeds ``max_dim``."""
    n = h1.shape[0]
    ta = _string_tuples(n, n_alpha)
    tb = _string_tuples(n, n_beta)
    da, db = len(ta), len(tb)
    dim = da * db
    if dim > max_dim:
        return None
    index_a = {t: r for r, t in enumerate(ta)}
    index_b = {t: r for r, t in enumerate(tb)}

    jd = np.einsum("ppqq->pq", eri)
    kd = np.einsum("pqqp->pq", eri)
    hd = np.diag(h1)

    occ_a = np.zeros((da, n))
    for r, t in enumerate(ta):
        occ_a[r, list(t)] = 1.0
    occ_b = np.zeros((db, n))
    for r, t in enumerate(tb):
        occ_b[r, list(t)] = 1.0

    def spin_diag(occ):
        return (occ @ hd + 0.5 * ((occ @ jd) * occ).sum(1)
                - 0.5 * ((occ @ kd) * occ).sum(1))

    diag = (core + spin_diag(occ_a)[:, None] + spin_diag(occ_b)[None, :]
            + occ_a @ jd @ occ_b.T).reshape(-1)

    rows = [np.arange(dim, dtype=np.int64)]
    cols = [np.arange(dim, dtype=np.int64)]
    vals = [diag]

    singles_a = _spin_singles(ta, index_a, n)
    singles_b = _spin_singles(tb, index_b, n)

    # Pure singles: one-electron part plus the spectator-summed two-electron
    # part, assembled per excitation against all strings of the other spin.
    def add_singles(singles, occ_other_mat, alpha):
        occ_self = occ_a if alpha else occ_b
        for (r, r2, i, a, sgn) in singles:
            spect = occ_self[r].copy()
            spect[i] = 0.0
            val_same = 0.0
            for p in np.nonzero(spect)[0]:
                val_same += eri[i, a, p, p] - eri[i, p, p, a]
            cross = occ_other_mat @ np.diagonal(eri[i, a])
            vals_vec = sgn * (h1[i, a] + val_same + cross)
            n_other = occ_other_mat.shape[0]
            other = np.arange(n_other, dtype=np.int64)
            if alpha:
                rows.append(r2 * db + other)
                cols.append(r * db + other)
            else:
                rows.append(other * db + r2)
                cols.append(other * db + r)
            vals.append(vals_vec)

    add_singles(singles_a, occ_b, True)
    add_singles(singles_b, occ_a, False)

    # Opposite-spin doubles, vectorized over the beta singles per alpha single.
    sb_r = np.array([x[0] for x in singles_b], dtype=np.int64)
    sb_r2 = np.array([x[1] for x in singles_b], dtype=np.int64)
    sb_i = np.array([x[2] for x in singles_b], dtype=np.int64)
    sb_a = np.array([x[3] for x in singles_b], dtype=np.int64)
    sb_s = np.array([x[4] for x in singles_b], dtype=np.float64)
    for (r, r2, i, a, sgn) in singles_a:
        v = sgn * sb_s * eri[i, a, sb_i, sb_a]
        rows.append(r2 * db + sb_r2)
        cols.append(r * db + sb_r)
        vals.append(v)

    # Same-spin doubles: sequential pair hops, second phase on the
    # intermediate determinant.
    def add_same_spin(tuples, index_of, alpha):
        dloc = db if alpha else da
        other = np.arange(da if not alpha else db, dtype=np.int64)
        for r, occ in enumerate(tuples):
            occ_set = set(occ)
            virt = [a for a in range(n) if a not in occ_set]
            for (i, j) in itertools.combinations(occ, 2):
                for a in virt:
                    inter = tuple(sorted(occ_set - {i} | {a}))
                    s1 = _single_sign(occ, i, a)
                    inter_set = set(inter)
                    for b in virt:
                        if b == a:
                            continue
                        s2 = _single_sign(inter, j, b)
                        fin = tuple(sorted(inter_set - {j} | {b}))
                        r2 = index_of[fin]
                        val = s1 * s2 * eri[i, a, j, b]
                        if val == 0.0:
                            continue
                        if alpha:
                            rows.append(r2 * db + other)
                            cols.append(r * db + other)
                        else:
                            rows.append(other * db + r2)
                            cols.append(other * db + r)
                        vals.append(np.full(len(other), val))

    add_same_spin(ta, index_a, True)
    add_same_spin(tb, index_b, False)

    hmat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim)).tocsr()
    if dim <= 400:
        w = np.linalg.eigvalsh(hmat.toarray())
        return np.asarray(w[:k])
    w = eigsh(hmat, k=k, which="SA", tol=tol,
              maxiter=5000, return_eigenvectors=False)
    return np.sort(w)[:k]


# ---------------------------------------------------------------------------
# Spin-orbital CCSD and perturbative triples.


def _spin_orbital_blocks(h1, eri, n_alpha, n_beta):
    """Antisymmetrized <pq||rs>, Fock matrix and occupation split.

    Spin orbitals are interleaved (2p = alpha, 2p+1 = beta); occupied ones
    are the aufbau set of the restricted reference.
    """
    n = h1.shape[0]
    nso = 2 * n
    h_so = np.zeros((nso, nso))
    h_so[0::2, 0::2] = h1
    h_so[1::2, 1::2] = h1

    eri_phys = np.zeros((nso, nso, nso, nso))
    # <pq|rs> = (pr|qs) with spin match p~r, q~s.
    chem = eri
    for sp1 in (0, 1):
        for sp2 in (0, 1):
            eri_phys[sp1::2, sp2::2, sp1::2, sp2::2] = chem.transpose(0, 2, 1, 3)
    anti = eri_phys - eri_phys.transpose(0, 1, 3, 2)

    occ = sorted([2 * p for p in range(n_alpha)] + [2 * p + 1 for p in range(n_beta)])
    virt = [s for s in range(nso) if s not in set(occ)]
    fock = h_so.copy()
    for s in range(nso):
        for t in range(nso):
            fock[s, t] += sum(anti[s, i, t, i] for i in occ)
    return anti, fock, np.array(occ), np.array(virt)


def ccsd_energy(h1, eri, n_alpha, n_beta, core=0.0, max_iter=200, tol=1e-10,
                do_triples=False, diis_depth=8):
    """CCSD (optionally with perturbative triples) total energy.

    Returns (e_ccsd_total, e_triples_correction or None).  Raises
    CorrelationError when the amplitude iterations do not converge.
    """
    anti, fock, o, v = _spin_orbital_blocks(h1, eri, n_alpha, n_beta)
    no, nv = len(o), len(v)
    hso = np.zeros_like(fock)
    hso[0::2, 0::2] = h1
    hso[1::2, 1::2] = h1
    e_ref = (core + float(np.sum(np.diag(hso)[o]))
             + 0.5 * float(np.einsum("ijij->", anti[np.ix_(o, o, o, o)])))

    f_oo = fock[np.ix_(o, o)]
    f_vv = fock[np.ix_(v, v)]
    f_ov = fock[np.ix_(o, v)]
    w_oovv = anti[np.ix_(o, o, v, v)]
    w_ooov = anti[np.ix_(o, o, o, v)]
    w_oooo = anti[np.ix_(o, o, o, o)]
    w_ovvv = anti[np.ix_(o, v, v, v)]
    w_vvvv = anti[np.ix_(v, v, v, v)]
    w_ovvo = anti[np.ix_(o, v, v, o)]
    w_ovov = anti[np.ix_(o, v, o, v)]
    w_oovo = anti[np.ix_(o, o, v, o)]
    w_vvvo = anti[np.ix_(v, v, v, o)]
    w_ovoo = anti[np.ix_(o, v, o, o)]
    w_vovv = anti[np.ix_(v, o, v, v)]

    d1 = np.diag(f_oo)[:, None] - np.diag(f_vv)[None, :]
    d2 = (np.diag(f_oo)[:, None, None, None] + np.diag(f_oo)[None, :, None, None]
          - np.diag(f_vv)[None, None, :, None] - np.diag(f_vv)[None, None, None, :])
    d1 = np.where(np.abs(d1) < 1e-12, np.copysign(1e-12, d1 + 1e-300), d1)
    d2 = np.where(np.abs(d2) < 1e-12, np.copysign(1e-12, d2 + 1e-300), d2)

    t1 = f_ov / d1
    t2 = w_oovv / d2

    f_vv_nd = f_vv - np.diag(np.diag(f_vv))
    f_oo_nd = f_oo - np.diag(np.diag(f_oo))

    def corr_energy(t1, t2):
        return (np.einsum("ia,ia->", f_ov, t1)
                + 0.25 * np.einsum("ijab,ijab->", w_oovv, t2)
                + 0.5 * np.einsum("ijab,ia,jb->", w_oovv, t1, t1))

    diis_t: list = []
    diis_e: list = []
    e_corr = corr_energy(t1, t2)
    for it in range(1, max_iter + 1):
        tau_t = t2 + 0.5 * (np.einsum("ia,jb->ijab", t1, t1)
                            - np.einsum("ib,ja->ijab", t1, t1))
        tau = t2 + (np.einsum("ia,jb->ijab", t1, t1)
                    - np.einsum("ib,ja->ijab", t1, t1))

        fae = (f_vv_nd - 0.5 * np.einsum("me,ma->ae", f_ov, t1)
               + np.einsum("mf,mafe->ae", t1, w_ovvv)
               - 0.5 * np.einsum("mnaf,mnef->ae", tau_t, w_oovv))
        fmi = (f_oo_nd + 0.5 * np.einsum("ie,me->mi", t1, f_ov)
               + np.einsum("ne,mnie->mi", t1, w_ooov)
               + 0.5 * np.einsum("inef,mnef->mi", tau_t, w_oovv))
        fme = f_ov + np.einsum("nf,mnef->me", t1, w_oovv)

        wmnij = (w_oooo
                 + np.einsum("je,mnie->mnij", t1, w_ooov)
                 - np.einsum("ie,mnje->mnij", t1, w_ooov)
                 + 0.25 * np.einsum("ijef,mnef->mnij", tau, w_oovv))
        wabef = (w_vvvv
                 - np.einsum("mb,amef->abef", t1, w_vovv)
                 + np.einsum("ma,bmef->abef", t1, w_vovv)
                 + 0.25 * np.einsum("mnab,mnef->abef", tau, w_oovv))
        wmbej = (w_ovvo
                 + np.einsum("jf,mbef->mbej", t1, w_ovvv)
                 - np.einsum("nb,mnej->mbej", t1, w_oovo)
                 - np.einsum("jnfb,mnef->mbej",
                             0.5 * t2 + np.einsum("jf,nb->jnfb", t1, t1), w_oovv))

        rhs1 = (f_ov
                + np.einsum("ie,ae->ia", t1, fae)
                - np.einsum("ma,mi->ia", t1, fmi)
                + np.einsum("imae,me->ia", t2, fme)
                - np.einsum("nf,naif->ia", t1, w_ovov)
                - 0.5 * np.einsum("imef,maef->ia", t2, w_ovvv)
                - 0.5 * np.einsum("mnae,nmei->ia", t2, w_oovo))

        fae_mod = fae - 0.5 * np.einsum("mb,me->be", t1, fme)
        fmi_mod = fmi + 0.5 * np.einsum("je,me->mj", t1, fme)
        rhs2 = w_oovv.copy()
        tmp = np.einsum("ijae,be->ijab", t2, fae_mod)
        rhs2 += tmp - tmp.transpose(0, 1, 3, 2)
        tmp = np.einsum("imab,mj->ijab", t2, fmi_mod)
        rhs2 -= tmp - tmp.transpose(1, 0, 2, 3)
        rhs2 += 0.5 * np.einsum("mnab,mnij->ijab", tau, wmnij)
        rhs2 += 0.5 * np.einsum("ijef,abef->ijab", tau, wabef)
        tmp = (np.einsum("imae,mbej->ijab", t2, wmbej)
               - np.einsum("ie,ma,mbej->ijab", t1, t1, w_ovvo))
        tmp = tmp - tmp.transpose(1, 0, 2, 3)
        rhs2 += tmp - tmp.transpose(0, 1, 3, 2)
        tmp = np.einsum("ie,abej->ijab", t1, w_vvvo)
        rhs2 += tmp - tmp.transpose(1, 0, 2, 3)
        tmp = np.einsum("ma,mbij->ijab", t1, w_ovoo)
        rhs2 -= tmp - tmp.transpose(0, 1, 3, 2)

        t1_new = rhs1 / d1
        t2_new = rhs2 / d2

        # Amplitude DIIS.
        flat_new = np.concatenate([t1_new.ravel(), t2_new.ravel()])
        flat_old = np.concatenate([t1.ravel(), t2.ravel()])
        diis_t.append(flat_new)
        diis_e.append(flat_new - flat_old)
        if len(diis_t) > diis_depth:
            diis_t.pop(0)
            diis_e.pop(0)
        if len(diis_t) >= 2:
            m = len(diis_t)
            b = -np.ones((m + 1, m + 1))
            b[m, m] = 0.0
            for a_ in range(m):
                for b_ in range(m):
                    b[a_, b_] = np.dot(diis_e[a_], diis_e[b_])
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                coef = np.linalg.solve(b, rhs)[:m]
                flat_new = sum(c * tt for c, tt in zip(coef, diis_t))
            except np.linalg.LinAlgError:
                pass
        t1 = flat_new[: no * nv].reshape(no, nv)
        t2 = flat_new[no * nv:].reshape(no, no, nv, nv)

        e_new = corr_energy(t1, t2)
        delta = abs(e_new - e_corr)
        rms = float(np.linalg.norm(diis_e[-1])) / max(1, diis_e[-1].size) ** 0.5
        e_corr = e_new
        if delta < tol and rms < 1e-8:
            break
    else:
        raise CorrelationError(
            f"CCSD not converged in {max_iter} iterations (dE = {delta:.2e})")

    e_total = e_ref + e_corr
    if not do_triples:
        return e_total, None

    # Perturbative triples.
    d3 = (np.diag(f_oo)[:, None, None, None, None, None]
          + np.diag(f_oo)[None, :, None, None, None, None]
          + np.diag(f_oo)[None, None, :, None, None, None]
          - np.diag(f_vv)[None, None, None, :, None, None]
          - np.diag(f_vv)[None, None, None, None, :, None]
          - np.diag(f_vv)[None, None, None, None, None, :])
    d3 = np.where(np.abs(d3) < 1e-12, np.copysign(1e-12, d3 + 1e-300), d3)

    def p_i_jk(x):
        return x - x.transpose(1, 0, 2, 3, 4, 5) - x.transpose(2, 1, 0, 3, 4, 5)

    def p_a_bc(x):
        return x - x.transpose(0, 1, 2, 4, 3, 5) - x.transpose(0, 1, 2, 5, 4, 3)

    dis = p_i_jk(p_a_bc(np.einsum("ia,jkbc->ijkabc", t1, w_oovv)))
    con = p_i_jk(p_a_bc(np.einsum("jkae,eibc->ijkabc", t2,
                                  anti[np.ix_(v, o, v, v)])
                        - np.einsum("imbc,majk->ijkabc", t2, w_ovoo)))
    t3c = con / d3
    t3d = dis / d3
    e_t = float(np.einsum("ijkabc,ijkabc->", con, t3c + t3d)) / 36.0
    return e_total + e_t, e_t
