# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Signatures mirror :mod:`juliathermo._pykernels` exactly."""

import numpy as np

from libc.math cimport sqrt, log, cos, sin, hypot, fabs, copysign, M_PI


cdef inline double cabs_(double complex z) noexcept nogil:
    return hypot(z.real, z.imag)


cdef inline double complex csqrt_(double complex z) noexcept nogil:
    cdef double x = z.real, y = z.imag, r, t
    r = hypot(x, y)
    if r == 0.0:
        return 0.0
    if x >= 0.0:
        t = sqrt(0.5 * (r + x))
        return t + 1j * (y / (2.0 * t))
    t = sqrt(0.5 * (r - x))
    return fabs(y) / (2.0 * t) + 1j * copysign(t, y)


# helpers take raw pointers: a memoryview argument costs an atomic refcount per call
cdef inline double complex horner(const double complex* coef, Py_ssize_t m, double complex w) noexcept nogil:
    cdef Py_ssize_t k
    cdef double complex acc = coef[m - 1]
    for k in range(m - 2, -1, -1):
        acc = acc * w + coef[k]
    return acc


cdef inline double complex horner_deriv(const double complex* coef, Py_ssize_t m, double complex w) noexcept nogil:
    cdef Py_ssize_t k, deg = m - 1
    cdef double complex acc = deg * coef[deg]
    for k in range(deg - 1, 0, -1):
        acc = acc * w + k * coef[k]
    return acc


def series_terms(const double complex[:, ::1] orbit, int d,
                 const Py_ssize_t[::1] pair_ptr, const Py_ssize_t[::1] pair_b,
                 const Py_ssize_t[::1] pair_g, const Py_ssize_t[:, ::1] shift_pos,
                 const Py_ssize_t[::1] shift_k):
    cdef Py_ssize_t npts = orbit.shape[0], L = orbit.shape[1]
    cdef Py_ssize_t A = pair_ptr.shape[0] - 1, m = shift_k.shape[0]
    cdef Py_ssize_t p, n, k, a, q, j, b, g, base_k, base_km1
    cdef double complex s, f

    out = np.empty((A, npts), dtype=np.complex128)
    cdef double complex[:, ::1] outv = out
    cdef double complex[::1] F = np.zeros((d + 1) * A * L, dtype=np.complex128)
    cdef double complex[::1] zp = np.empty((d + 1) * L, dtype=np.complex128)
    cdef double complex[::1] Q = np.empty(L, dtype=np.complex128)

    with nogil:
        for p in range(npts):
            for n in range(L):
                zp[n] = 1.0
                for k in range(1, d + 1):
                    zp[k * L + n] = zp[(k - 1) * L + n] * orbit[p, n]
            for k in range(d + 1):
                for n in range(L):
                    F[(k * A) * L + n] = zp[k * L + n]
            for a in range(1, A):
                for n in range(L):
                    F[(A + a) * L + n] = 0.0
                for k in range(2, d + 1):
                    base_k = (k * A + a) * L
                    base_km1 = (k - 1) * A
                    for n in range(L):
                        s = 0.0
                        for q in range(pair_ptr[a], pair_ptr[a + 1]):
                            s = s + F[(base_km1 + pair_b[q]) * L + n] * F[(A + pair_g[q]) * L + n]
                        F[base_k + n] = s
                for n in range(L):
                    Q[n] = F[(d * A + a) * L + n]
                for j in range(m):
                    b = shift_pos[a, j]
                    if b >= 0:
                        k = shift_k[j]
                        for n in range(L):
                            Q[n] = Q[n] + F[(k * A + b) * L + n]
                f = 0.0
                for n in range(L - 1, -1, -1):
                    f = (f - Q[n]) / (d * zp[(d - 1) * L + n])
                    F[(A + a) * L + n] = f
                for k in range(2, d + 1):
                    base_k = (k * A + a) * L
                    for n in range(L):
                        F[base_k + n] = F[base_k + n] + k * zp[(k - 1) * L + n] * F[(A + a) * L + n]
            for a in range(A):
                outv[a, p] = F[(A + a) * L]
    return out


cdef int preimages(const double complex* coef, Py_ssize_t m, int d, double complex z, double theta,
                   double complex* roots, double complex* seeds, double complex* work) noexcept nogil:
    """Fill ``roots[j]`` with the preimage of ``z`` whose angle is (theta + j)/d."""
    cdef int j, i, it, best
    cdef double complex num, den, r
    cdef double ang, delta, dist, bestd, sep
    for j in range(d):
        ang = 2.0 * M_PI * (theta + j) / d
        seeds[j] = cos(ang) + 1j * sin(ang)
    if d == 2:
        r = csqrt_(z - coef[0])
        work[0] = r
        work[1] = -r
    else:
        for j in range(d):
            work[j] = seeds[j]
        for it in range(100):
            delta = 0.0
            for j in range(d):
                num = horner(coef, m, work[j]) - z
                den = 1.0
                for i in range(d):
                    if i != j:
                        den = den * (work[j] - work[i])
                r = num / den
                work[j] = work[j] - r
                if cabs_(r) > delta:
                    delta = cabs_(r)
            if delta < 1e-15:
                break
        for j in range(d):
            for it in range(2):
                den = horner_deriv(coef, m, work[j])
                if cabs_(den) > 0.0:
                    work[j] = work[j] - (horner(coef, m, work[j]) - z) / den
    # match each seed to its nearest root; the matching must be a bijection
    for j in range(d):
        best = -1
        bestd = 1e300
        for i in range(d):
            dist = cabs_(work[i] - seeds[j])
            if dist < bestd:
                bestd = dist
                best = i
        roots[j] = work[best]
        sep = 1e300
        for i in range(d):
            if i != best:
                dist = cabs_(work[i] - work[best])
                if dist < sep:
                    sep = dist
        if bestd >= 0.5 * sep:
            return -1
    for j in range(d):
        for i in range(j + 1, d):
            if roots[i] == roots[j]:
                return -1
    return 0


def mc_chains(const double complex[::1] coef, int d, double complex z0, double theta0,
              const signed char[:, ::1] digits, Py_ssize_t burn_in):
    cdef Py_ssize_t nch = digits.shape[0], steps = digits.shape[1]
    cdef Py_ssize_t c, t
    cdef int k, rc
    cdef double complex z
    cdef double theta, acc
    cdef double complex roots[16]
    cdef double complex seeds[16]
    cdef double complex work[16]
    means = np.zeros(nch, dtype=np.float64)
    status = np.zeros(nch, dtype=np.int64)
    cdef double[::1] mv = means
    cdef long long[::1] sv = status
    if d > 16:
        raise ValueError("degree too large for compiled chain kernel")
    cdef const double complex* cp = &coef[0]
    cdef Py_ssize_t m = coef.shape[0]
    with nogil:
        for c in range(nch):
            z = z0
            theta = theta0
            acc = 0.0
            for t in range(steps):
                k = digits[c, t]
                rc = preimages(cp, m, d, z, theta, roots, seeds, work)
                if rc != 0:
                    sv[c] = t + 1
                    break
                z = roots[k]
                theta = (theta + k) / d
                if t >= burn_in:
                    acc = acc - log(cabs_(horner_deriv(cp, m, z)))
            mv[c] = acc / (steps - burn_in)
    return means, status


def newton_periodic(const double complex[::1] seeds, const double complex[::1] coef,
                    int n, int maxit, double tol):
    cdef Py_ssize_t npts = seeds.shape[0], p
    cdef int it, i
    cdef double complex z, w, dw, step
    roots = np.empty(npts, dtype=np.complex128)
    mults = np.empty(npts, dtype=np.complex128)
    iters = np.full(npts, -1, dtype=np.int64)
    cdef double complex[::1] rv = roots
    cdef double complex[::1] mvv = mults
    cdef long long[::1] iv = iters
    cdef const double complex* cp = &coef[0]
    cdef Py_ssize_t m = coef.shape[0]
    with nogil:
        for p in range(npts):
            z = seeds[p]
            for it in range(maxit):
                w = z
                dw = 1.0
                for i in range(n):
                    dw = dw * horner_deriv(cp, m, w)
                    w = horner(cp, m, w)
                step = (w - z) / (dw - 1.0)
                z = z - step
                if cabs_(step) <= tol * (1.0 + cabs_(z)):
                    iv[p] = it + 1
                    break
            w = z
            dw = 1.0
            for i in range(n):
                dw = dw * horner_deriv(cp, m, w)
                w = horner(cp, m, w)
            rv[p] = z
            mvv[p] = dw
    return roots, mults, iters
