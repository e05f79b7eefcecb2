"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and semantics; selected by :mod:`qsync._core` when the
extension is unavailable.
"""
import cmath

import numpy as np

SERIES_THRESHOLD = 1e-6
GROWTH_LIMIT = 20.0

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def h_closed_form_array(lam, delta, gamma, t):
    lam = np.ascontiguousarray(lam, dtype=np.float64).ravel()
    delta = np.ascontiguousarray(delta, dtype=np.float64).ravel()
    gamma = np.ascontiguousarray(gamma, dtype=np.float64).ravel()
    t = np.ascontiguousarray(t, dtype=np.float64).ravel()
    if not (lam.shape == delta.shape == gamma.shape == t.shape):
        raise ValueError("input arrays must have equal length")

    a = lam - 1j * delta
    omega = np.sqrt(a * a - 2.0 * gamma * lam + 0j)
    x = omega * (0.5 * t)
    at2 = a * (0.5 * t)
    out = np.empty(t.shape, dtype=np.complex128)

    series = np.abs(x) < SERIES_THRESHOLD
    moderate = ~series & (np.abs(x.real) <= GROWTH_LIMIT)
    large = ~series & ~moderate

    with np.errstate(all="ignore"):
        xs, ats = x[series], at2[series]
        x2 = xs * xs
        out[series] = np.exp(-ats) * (1.0 + ats + x2 * (0.5 + ats / 6.0) + x2 * x2 * (1.0 / 24.0 + ats / 120.0))

        xm, atm = x[moderate], at2[moderate]
        out[moderate] = np.exp(-atm) * (np.cosh(xm) + atm * np.sinh(xm) / xm)

        om, al, tl = omega[large], a[large], t[large]
        om = np.where(om.real < 0, -om, om)
        r = al / om
        out[large] = 0.5 * (1.0 + r) * np.exp((om - al) * (0.5 * tl)) + 0.5 * (1.0 - r) * np.exp(
            -(om + al) * (0.5 * tl)
        )
    return out


def _step_check(hn, k):
    if not (np.isfinite(hn.real) and np.isfinite(hn.imag)):
        raise FloatingPointError(f"non-finite amplitude at step {k}")


def volterra_recursive(gamma, lam, delta, dt, n):
    a = complex(lam, -delta)
    c = 0.5 * gamma * lam
    q = cmath.exp(-a * dt)
    denom = 1.0 + c * dt * dt / 4.0
    h = [1.0 + 0j] * (n + 1)
    z = 1.0 + 0j
    integral = 0j
    prev = h[0]
    for k in range(1, n + 1):
        acc = c * dt * (q * z - 0.5 * cmath.exp(-a * (k * dt)))
        hn = (prev - 0.5 * dt * (integral + acc)) / denom
        _step_check(hn, k)
        h[k] = hn
        integral = acc + 0.5 * c * dt * hn
        z = q * z + hn
        prev = hn
    return np.array(h, dtype=np.complex128)


def volterra_direct(gamma, lam, delta, dt, n):
    a = complex(lam, -delta)
    c = 0.5 * gamma * lam
    denom = 1.0 + c * dt * dt / 4.0
    kernel = np.exp(-a * dt * np.arange(n + 1))
    h = np.empty(n + 1, dtype=np.complex128)
    h[0] = 1.0
    integral = 0j
    for k in range(1, n + 1):
        # history sum over j = 1..k-1 pairs h[j] with kernel[k-j]
        acc = 0.5 * kernel[k] * h[0] + np.dot(kernel[k - 1:0:-1], h[1:k])
        acc = c * dt * acc
        hn = (h[k - 1] - 0.5 * dt * (integral + acc)) / denom
        _step_check(hn, k)
        h[k] = hn
        integral = acc + 0.5 * c * dt * hn
    return h


def fnv1a64(data):
    hval = _FNV_OFFSET
    for byte in bytes(data):
        hval = ((hval ^ byte) * _FNV_PRIME) & _MASK64
    return hval
