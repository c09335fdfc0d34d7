"""Pure numpy versions of the hot loops.

Each function has the same signature and semantics as its counterpart in the
compiled ``_ckernels`` module; :mod:`juliathermo.kernels` picks one at import.
"""

import numpy as np


def series_terms(orbit, d, pair_ptr, pair_b, pair_g, shift_pos, shift_k):
    """Solve the conjugacy coefficients along angle-multiplication orbits.

    ``orbit[p, n]`` is the n-th image of the p-th base point under z -> z**d.
    Returns ``out[a, p]``, the a-th coefficient function at ``orbit[p, 0]``
    (row 0 is the identity term z itself).
    """
    orbit = np.asarray(orbit, dtype=np.complex128)
    npts, L = orbit.shape
    A = len(pair_ptr) - 1
    zp = np.empty((d + 1, npts, L), dtype=np.complex128)
    zp[0] = 1.0
    for k in range(1, d + 1):
        zp[k] = zp[k - 1] * orbit
    F = np.zeros((d + 1, A, npts, L), dtype=np.complex128)
    F[:, 0] = zp
    dz = d * zp[d - 1]
    for a in range(1, A):
        lo, hi = pair_ptr[a], pair_ptr[a + 1]
        for k in range(2, d + 1):
            acc = np.zeros((npts, L), dtype=np.complex128)
            for q in range(lo, hi):
                acc += F[k - 1, pair_b[q]] * F[1, pair_g[q]]
            F[k, a] = acc
        Q = F[d, a].copy()
        for j, k in enumerate(shift_k):
            b = shift_pos[a, j]
            if b >= 0:
                Q += F[k, b]
        f = np.zeros(npts, dtype=np.complex128)
        for n in range(L - 1, -1, -1):
            f = (f - Q[:, n]) / dz[:, n]
            F[1, a, :, n] = f
        for k in range(2, d + 1):
            F[k, a] += k * zp[k - 1] * F[1, a]
    return np.ascontiguousarray(F[1, :, :, 0])


def _horner(coef, w):
    acc = np.full_like(w, coef[-1])
    for c in coef[-2::-1]:
        acc = acc * w + c
    return acc


def _horner_deriv(coef, w):
    deg = len(coef) - 1
    acc = np.full_like(w, deg * coef[deg])
    for k in range(deg - 1, 0, -1):
        acc = acc * w + k * coef[k]
    return acc


def _preimages(coef, d, z, theta):
    """Preimages of ``z`` ordered by angle (theta + j)/d; second value flags failures."""
    j = np.arange(d)
    seeds = np.exp(2j * np.pi * (theta[:, None] + j) / d)
    if d == 2:
        r = np.sqrt(z - coef[0])
        work = np.stack([r, -r], axis=1)
    else:
        work = seeds.copy()
        for _ in range(100):
            delta = np.zeros(len(z))
            for jj in range(d):
                num = _horner(coef, work[:, jj]) - z
                den = np.ones(len(z), dtype=np.complex128)
                for i in range(d):
                    if i != jj:
                        den = den * (work[:, jj] - work[:, i])
                r = num / den
                # Gauss-Seidel order, matching the compiled kernel
                work[:, jj] = work[:, jj] - r
                delta = np.maximum(delta, np.abs(r))
            if np.all(delta < 1e-15):
                break
        for jj in range(d):
            for _ in range(2):
                den = _horner_deriv(coef, work[:, jj])
                ok = np.abs(den) > 0
                upd = (_horner(coef, work[:, jj]) - z) / np.where(ok, den, 1.0)
                work[:, jj] = np.where(ok, work[:, jj] - upd, work[:, jj])
    dist = np.abs(work[:, None, :] - seeds[:, :, None])  # [chain, seed, root]
    best = np.argmin(dist, axis=2)
    bestd = np.take_along_axis(dist, best[:, :, None], axis=2)[:, :, 0]
    roots = np.take_along_axis(work, best, axis=1)
    rr = np.abs(work[:, None, :] - roots[:, :, None])
    rr[np.arange(len(z))[:, None], np.arange(d)[None, :], best] = np.inf
    sep = rr.min(axis=2)
    bad = np.any(bestd >= 0.5 * sep, axis=1)
    sb = np.sort(best, axis=1)
    bad |= np.any(sb[:, 1:] == sb[:, :-1], axis=1)
    return roots, bad


def mc_chains(coef, d, z0, theta0, digits, burn_in):
    """Backward random orbits; returns per-chain means of -log|P'| and failure steps."""
    coef = np.asarray(coef, dtype=np.complex128)
    digits = np.asarray(digits)
    nch, steps = digits.shape
    z = np.full(nch, z0, dtype=np.complex128)
    theta = np.full(nch, float(theta0))
    acc = np.zeros(nch)
    status = np.zeros(nch, dtype=np.int64)
    alive = np.ones(nch, dtype=bool)
    rows = np.arange(nch)
    for t in range(steps):
        k = digits[:, t].astype(np.intp)
        roots, bad = _preimages(coef, d, z, theta)
        newly = bad & alive
        status[newly] = t + 1
        alive &= ~bad
        z = np.where(alive, roots[rows, k], z)
        theta = np.where(alive, (theta + k) / d, theta)
        if t >= burn_in:
            acc = np.where(alive, acc - np.log(np.abs(_horner_deriv(coef, z))), acc)
        if not alive.any():
            break
    return acc / (steps - burn_in), status


def newton_periodic(seeds, coef, n, maxit, tol):
    """Newton on P^n(z) - z from each seed; iteration count -1 marks divergence."""
    coef = np.asarray(coef, dtype=np.complex128)
    z = np.array(seeds, dtype=np.complex128)
    iters = np.full(len(z), -1, dtype=np.int64)
    active = np.ones(len(z), dtype=bool)
    for it in range(maxit):
        if not active.any():
            break
        za = z[active]
        w = za.copy()
        dw = np.ones_like(za)
        for _ in range(n):
            dw = dw * _horner_deriv(coef, w)
            w = _horner(coef, w)
        step = (w - za) / (dw - 1.0)
        za = za - step
        z[active] = za
        done = np.abs(step) <= tol * (1.0 + np.abs(za))
        idx = np.flatnonzero(active)
        iters[idx[done]] = it + 1
        active[idx[done]] = False
    w = z.copy()
    dw = np.ones_like(z)
    for _ in range(n):
        dw = dw * _horner_deriv(coef, w)
        w = _horner(coef, w)
    return z, dw, iters
