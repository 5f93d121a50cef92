"""Hot loops: continued-fraction sweeps and batched dense solves.

Every kernel exists twice, a numba version (``*_numba``) and a vectorised
numpy version (``*_numpy``). The public names bind to one of them at import
time according to :mod:`omit_chain._accel`.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

PIVOT_RTOL = 1e-14
TINY = 1e-300


# --------------------------------------------------------------------------
# continued fraction
# --------------------------------------------------------------------------

@njit(cache=True)
def cf_grid_numba(x, offsets, kappa, gamma_m, G2, hop2, atom, atom_idx):
    n = x.shape[0]
    N = kappa.shape[0]
    out = np.empty(n, dtype=np.complex128)
    bad = -1
    for k in range(n):
        D = 0j
        for j in range(N):
            xj = x[k] + offsets[j]
            B = kappa[j] - 1j * xj
            if G2[j] != 0.0:
                B += G2[j] / (gamma_m[j] - 1j * xj)
            if j == atom_idx:
                B += atom[k]
            if j == 0:
                D = B
            else:
                D = B + hop2[j - 1] / D
            if abs(D) < TINY:
                bad = k
                break
        if bad >= 0:
            break
        out[k] = 2.0 * kappa[N - 1] / D
    return out, bad


def cf_grid_numpy(x, offsets, kappa, gamma_m, G2, hop2, atom, atom_idx):
    N = kappa.shape[0]
    D = None
    ok = np.ones(x.shape[0], dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for j in range(N):
            xj = x + offsets[j]
            B = kappa[j] - 1j * xj
            if G2[j] != 0.0:
                B = B + G2[j] / (gamma_m[j] - 1j * xj)
            if j == atom_idx:
                B = B + atom
            D = B if j == 0 else B + hop2[j - 1] / D
            ok &= np.abs(D) >= TINY
        out = 2.0 * kappa[N - 1] / D
    bad = -1 if ok.all() else int(np.argmin(ok))
    return out, bad


# --------------------------------------------------------------------------
# batched Gaussian elimination with scaled row pivoting
# --------------------------------------------------------------------------

@njit(cache=True)
def solve_batch_numba(M, r):
    n, d, _ = M.shape
    u = np.zeros((n, d), dtype=np.complex128)
    singular = np.zeros(n, dtype=np.bool_)
    a = np.empty((d, d), dtype=np.complex128)
    b = np.empty(d, dtype=np.complex128)
    s = np.empty(d)
    for k in range(n):
        for i in range(d):
            b[i] = r[k, i]
            m = 0.0
            for j in range(d):
                a[i, j] = M[k, i, j]
                v = abs(a[i, j])
                if v > m:
                    m = v
            s[i] = m
        failed = False
        for c in range(d):
            p = c
            best = -1.0
            for i in range(c, d):
                if s[i] > 0.0:
                    v = abs(a[i, c]) / s[i]
                    if v > best:
                        best = v
                        p = i
            if best <= PIVOT_RTOL:
                failed = True
                break
            if p != c:
                for j in range(d):
                    t = a[c, j]
                    a[c, j] = a[p, j]
                    a[p, j] = t
                t = b[c]
                b[c] = b[p]
                b[p] = t
                ts = s[c]
                s[c] = s[p]
                s[p] = ts
            piv = a[c, c]
            for i in range(c + 1, d):
                if a[i, c] != 0.0:
                    lam = a[i, c] / piv
                    for j in range(c + 1, d):
                        a[i, j] -= lam * a[c, j]
                    b[i] -= lam * b[c]
        if failed:
            singular[k] = True
            continue
        for i in range(d - 1, -1, -1):
            acc = b[i]
            for j in range(i + 1, d):
                acc -= a[i, j] * u[k, j]
            u[k, i] = acc / a[i, i]
    return u, singular


def solve_batch_numpy(M, r):
    a = np.array(M, dtype=np.complex128, copy=True)
    b = np.array(r, dtype=np.complex128, copy=True)
    n, d, _ = a.shape
    rows = np.arange(n)
    s = np.abs(a).max(axis=2)
    singular = np.zeros(n, dtype=bool)
    for c in range(d):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(s[:, c:] > 0.0, np.abs(a[:, c:, c]) / s[:, c:], -1.0)
        p = c + np.argmax(ratio, axis=1)
        singular |= ratio[rows, p - c] <= PIVOT_RTOL
        swap = p != c
        if swap.any():
            idx = rows[swap]
            pc = p[swap]
            a[idx, c], a[idx, pc] = a[idx, pc].copy(), a[idx, c].copy()
            b[idx, c], b[idx, pc] = b[idx, pc].copy(), b[idx, c].copy()
            s[idx, c], s[idx, pc] = s[idx, pc].copy(), s[idx, c].copy()
        piv = np.where(singular, 1.0, a[:, c, c])
        lam = a[:, c + 1:, c] / piv[:, None]
        a[:, c + 1:, c:] -= lam[:, :, None] * a[:, c:c + 1, c:]
        b[:, c + 1:] -= lam * b[:, c:c + 1]
    u = np.zeros((n, d), dtype=np.complex128)
    diag = np.where(singular[:, None], 1.0, np.diagonal(a, axis1=1, axis2=2))
    for i in range(d - 1, -1, -1):
        acc = b[:, i] - np.einsum("kj,kj->k", a[:, i, i + 1:], u[:, i + 1:])
        u[:, i] = acc / diag[:, i]
    u[singular] = 0.0
    return u, singular


if USE_NUMBA:
    cf_grid = cf_grid_numba
    solve_batch = solve_batch_numba
    BACKEND = "numba"
else:
    cf_grid = cf_grid_numpy
    solve_batch = solve_batch_numpy
    BACKEND = "numpy"
