"""The compiled core and the pure-Python fallback must agree."""
import numpy as np
import pytest

from qsync import _core, _fallback

try:
    from qsync import _kernels
except ImportError:  # extension not built
    _kernels = None

BACKENDS = [_fallback] + ([_kernels] if _kernels is not None else [])
needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled core not built")


@pytest.mark.parametrize("impl", BACKENDS)
@pytest.mark.parametrize(
    "data, expected",
    [
        (b"", 0xCBF29CE484222325),
        (b"a", 0xAF63DC4C8601EC8C),
        (b"foobar", 0x85944171F73967E8),
    ],
)
def test_fnv1a64_reference_vectors(impl, data, expected):
    assert impl.fnv1a64(data) == expected


@needs_ext
def test_fnv_backends_agree_on_random_bytes():
    data = np.random.default_rng(7).integers(0, 256, 10_000, dtype=np.uint8).tobytes()
    assert _kernels.fnv1a64(data) == _fallback.fnv1a64(data)


@needs_ext
def test_closed_form_backends_agree():
    rng = np.random.default_rng(3)
    n = 5000
    lam = 10 ** rng.uniform(-3, 2, n)
    delta = rng.uniform(-3, 3, n)
    gamma = rng.uniform(0.01, 3, n)
    t = rng.uniform(0, 600, n)
    lam[:10], delta[:10], gamma[:10] = 2.0, 0.0, 1.0  # degenerate omega
    a = _kernels.h_closed_form_array(lam, delta, gamma, t)
    b = _fallback.h_closed_form_array(lam, delta, gamma, t)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)


@needs_ext
@pytest.mark.parametrize("name", ["volterra_recursive", "volterra_direct"])
def test_volterra_backends_agree(name):
    a = getattr(_kernels, name)(1.0, 0.2, 0.7, 0.01, 400)
    b = getattr(_fallback, name)(1.0, 0.2, 0.7, 0.01, 400)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-13)


@pytest.mark.parametrize("impl", BACKENDS)
def test_zero_steps(impl):
    np.testing.assert_array_equal(impl.volterra_recursive(1.0, 1.0, 0.0, 0.1, 0), [1.0])
    np.testing.assert_array_equal(impl.volterra_direct(1.0, 1.0, 0.0, 0.1, 0), [1.0])


@pytest.mark.parametrize("impl", BACKENDS)
def test_length_mismatch_rejected(impl):
    with pytest.raises(ValueError):
        impl.h_closed_form_array([1.0], [0.0], [1.0], [0.0, 1.0])


def test_backend_reported():
    assert _core.BACKEND in ("cython", "python")
