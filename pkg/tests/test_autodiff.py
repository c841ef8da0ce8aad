import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonholo import autodiff as ad
from nonholo.errors import DomainError
from nonholo.scenarios import s1_free_linear, s2_chaplygin_sleigh, s3_nonlinear_quadratic

from corpus import corpus, corpus_worst, fd_gradient, relative_error


def test_gradient_of_square():
    val, grad = ad.gradient(lambda x: x[0] ** 2, [3.0])
    assert val == 9.0
    np.testing.assert_array_equal(grad, [6.0])


def test_gradient_product_plus_sine():
    val, grad = ad.gradient(lambda x: x[0] * x[1] + ad.sin(x[0]), [0.0, 5.0])
    assert val == 0.0
    np.testing.assert_allclose(grad, [6.0, 0.0], atol=0)


def test_gradient_of_s3_kinetic_energy_matches_fd():
    model = s3_nonlinear_quadratic().model
    q = np.zeros(3)

    def T(u):
        v = [u[0], u[1], *model.alpha(q, u)]
        return 0.5 * sum(vi * vi for vi in v)

    _, grad = ad.gradient(T, [1.0, 0.0])
    assert relative_error(grad, fd_gradient(T, np.array([1.0, 0.0]))) < 1e-6


@pytest.mark.parametrize(
    "f, x, expected",
    [
        (lambda x: x[0] ** 2 * x[1], [2.0, 3.0], [[6.0, 4.0], [4.0, 0.0]]),
        (lambda x: ad.sin(x[0]), [0.0], [[0.0]]),
        (lambda u: u[0] ** 2, [1.5, -2.0], [[2.0, 0.0], [0.0, 0.0]]),
    ],
)
def test_hessian_examples(f, x, expected):
    _, _, H = ad.hessian(f, x)
    np.testing.assert_array_equal(H, expected)


def test_jacobian_linear_map():
    J = ad.jacobian(lambda x: [x[0] + x[1], x[0] - x[1]], [0.3, -7.0])
    np.testing.assert_array_equal(J, [[1.0, 1.0], [1.0, -1.0]])


def test_jacobian_sleigh_chart_theta_column():
    model = s2_chaplygin_sleigh(d=1.5).model
    J = ad.jacobian(model.chart, [0.2, 0.0, -0.4])
    # P2 = (x + d cos th, y + d sin th, 0); theta is coordinate 1
    np.testing.assert_allclose(J[3:, 1], [0.0, 1.5, 0.0], atol=0)
    np.testing.assert_array_equal(J[:3, 1], 0.0)


def test_jacobian_identity_chart():
    J = ad.jacobian(s1_free_linear().model.chart, [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(J, np.eye(3))


def test_domain_error_names_primitive():
    with pytest.raises(DomainError) as info:
        ad.gradient(lambda x: ad.log(x[0] - 1.0), [1.0])
    assert info.value.primitive == "log"


@pytest.mark.parametrize("fn, x", [(ad.sqrt, -1.0), (ad.log, 0.0), (lambda a: 1.0 / a, 0.0)])
def test_domain_errors_on_duals(fn, x):
    with pytest.raises(DomainError):
        ad.hessian(lambda v: fn(v[0]), [x])


def test_mixed_orders_rejected():
    a = ad.seed1([1.0])[0]
    b = ad.seed2([1.0])[0]
    with pytest.raises(TypeError):
        a + b


def test_constant_function_has_zero_derivatives():
    val, grad, H = ad.hessian(lambda x: 4.0, [1.0, 2.0])
    assert val == 4.0
    assert not grad.any() and not H.any()


def test_numpy_ufuncs_on_object_arrays():
    xs = ad.seed1([0.5, 1.0])
    y = np.sin(xs[0]) * np.exp(xs[1])
    assert math.isclose(y.grad[0], math.cos(0.5) * math.e)


def test_random_corpus_against_finite_differences():
    worst_g, worst_h = corpus_worst(1000)
    assert worst_g < 1e-5
    assert worst_h < 1e-5


@pytest.mark.parametrize("f, x", corpus(50, seed=11))
def test_hessian_bitwise_symmetric(f, x):
    _, _, H = ad.hessian(f, x)
    assert np.array_equal(H, H.T)


@settings(max_examples=200, deadline=None)
@given(
    a=st.floats(-5, 5),
    b=st.floats(-5, 5),
    x=st.lists(st.floats(-2, 2), min_size=2, max_size=2),
)
def test_gradient_is_linear(a, b, x):
    f = lambda v: ad.sin(v[0]) * v[1] + v[0] ** 3
    g = lambda v: ad.exp(v[1]) / (2.0 + ad.cos(v[0]))
    _, gf = ad.gradient(f, x)
    _, gg = ad.gradient(g, x)
    _, gc = ad.gradient(lambda v: a * f(v) + b * g(v), x)
    np.testing.assert_allclose(gc, a * gf + b * gg, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("c", [0.0, 1.0, 2.0, 3.0, -1.0, 0.5])
def test_power_rule(c):
    x0 = 1.7
    _, g, H = ad.hessian(lambda v: v[0] ** c, [x0])
    assert math.isclose(g[0], c * x0 ** (c - 1), rel_tol=1e-14, abs_tol=1e-300)
    assert math.isclose(H[0, 0], c * (c - 1) * x0 ** (c - 2), rel_tol=1e-14, abs_tol=1e-300)


def test_vector_jet_shapes():
    vals, J, H = ad.vector_jet(lambda x: [x[0] * x[1], x[1] ** 2, 1.0], [2.0, 3.0])
    assert vals.shape == (3,) and J.shape == (3, 2) and H.shape == (3, 2, 2)
    np.testing.assert_array_equal(H[0], [[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(H[2], 0.0)
