# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Mirrors ``qsync._fallback`` function for function."""
import numpy as np

from libc.math cimport fabs, isfinite
from libc.stdint cimport uint64_t


cdef extern from "complex.h" nogil:
    double complex csqrt(double complex)
    double complex cexp(double complex)
    double complex ccosh(double complex)
    double complex csinh(double complex)
    double cabs(double complex)
    double creal(double complex)
    double cimag(double complex)


cdef double SERIES_THRESHOLD = 1e-6
cdef double GROWTH_LIMIT = 20.0


cdef inline double complex _h(double lam, double delta, double gamma, double t) nogil:
    cdef double complex a = lam - 1j * delta
    cdef double complex omega = csqrt(a * a - 2.0 * gamma * lam)
    cdef double complex x = omega * (0.5 * t)
    cdef double complex at2 = a * (0.5 * t)
    cdef double complex x2, r
    if cabs(x) < SERIES_THRESHOLD:
        x2 = x * x
        return cexp(-at2) * (1.0 + at2 + x2 * (0.5 + at2 / 6.0) + x2 * x2 * (1.0 / 24.0 + at2 / 120.0))
    if fabs(creal(x)) <= GROWTH_LIMIT:
        return cexp(-at2) * (ccosh(x) + at2 * csinh(x) / x)
    if creal(omega) < 0:
        omega = -omega
    r = a / omega
    return 0.5 * (1.0 + r) * cexp((omega - a) * (0.5 * t)) + 0.5 * (1.0 - r) * cexp(-(omega + a) * (0.5 * t))


def h_closed_form_array(lam, delta, gamma, t):
    cdef double[::1] lv = np.ascontiguousarray(lam, dtype=np.float64).ravel()
    cdef double[::1] dv = np.ascontiguousarray(delta, dtype=np.float64).ravel()
    cdef double[::1] gv = np.ascontiguousarray(gamma, dtype=np.float64).ravel()
    cdef double[::1] tv = np.ascontiguousarray(t, dtype=np.float64).ravel()
    cdef Py_ssize_t n = tv.shape[0], i
    if not (lv.shape[0] == dv.shape[0] == gv.shape[0] == n):
        raise ValueError("input arrays must have equal length")
    out = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] ov = out
    with nogil:
        for i in range(n):
            ov[i] = _h(lv[i], dv[i], gv[i], tv[i])
    return out


def volterra_recursive(double gamma, double lam, double delta, double dt, Py_ssize_t n):
    cdef double complex a = lam - 1j * delta
    cdef double c = 0.5 * gamma * lam
    cdef double complex q = cexp(-a * dt)
    cdef double denom = 1.0 + c * dt * dt / 4.0
    cdef double complex z = 1.0, integral = 0.0, acc, hn
    cdef Py_ssize_t k
    cdef bint bad = False
    out = np.empty(n + 1, dtype=np.complex128)
    cdef double complex[::1] h = out
    h[0] = 1.0
    with nogil:
        for k in range(1, n + 1):
            acc = c * dt * (q * z - 0.5 * cexp(-a * (k * dt)) * h[0])
            hn = (h[k - 1] - 0.5 * dt * (integral + acc)) / denom
            if not (isfinite(creal(hn)) and isfinite(cimag(hn))):
                bad = True
                break
            h[k] = hn
            integral = acc + 0.5 * c * dt * hn
            z = q * z + hn
    if bad:
        raise FloatingPointError(f"non-finite amplitude at step {k}")
    return out


def volterra_direct(double gamma, double lam, double delta, double dt, Py_ssize_t n):
    cdef double complex a = lam - 1j * delta
    cdef double c = 0.5 * gamma * lam
    cdef double denom = 1.0 + c * dt * dt / 4.0
    cdef double complex integral = 0.0, acc, hn
    cdef Py_ssize_t k, j
    cdef bint bad = False
    out = np.empty(n + 1, dtype=np.complex128)
    table = np.empty(n + 1, dtype=np.complex128)
    cdef double complex[::1] h = out
    cdef double complex[::1] kern = table
    h[0] = 1.0
    with nogil:
        for k in range(n + 1):
            kern[k] = cexp(-a * (k * dt))
        for k in range(1, n + 1):
            acc = 0.5 * kern[k] * h[0]
            for j in range(1, k):
                acc = acc + kern[k - j] * h[j]
            acc = c * dt * acc
            hn = (h[k - 1] - 0.5 * dt * (integral + acc)) / denom
            if not (isfinite(creal(hn)) and isfinite(cimag(hn))):
                bad = True
                break
            h[k] = hn
            integral = acc + 0.5 * c * dt * hn
    if bad:
        raise FloatingPointError(f"non-finite amplitude at step {k}")
    return out


def fnv1a64(const unsigned char[:] data):
    cdef uint64_t hval = 0xcbf29ce484222325ULL
    cdef Py_ssize_t i, n = data.shape[0]
    with nogil:
        for i in range(n):
            hval = hval ^ data[i]
            hval = hval * 0x100000001b3ULL
    return int(hval)
