import argparse
import textwrap

import numpy as np
import pytest

from nonholo.config import ConfigError, compile_expression, from_sources, load_file, model_from_section
from nonholo.integrator import accelerations
from nonholo.model import GeneralizedState
from nonholo.scenarios import s1_free_linear, s3_nonlinear_quadratic


def _args(**kw):
    base = dict(scenario=None, model_file=None, formulation=None, t_end=None, dt=None, seed=None,
                samples=None, out_csv=None, out_json=None, gravity=None, q0=None, u0=None, check=None)
    base.update(kw)
    return argparse.Namespace(**base)


def _write(tmp_path, text):
    path = tmp_path / "run.ini"
    path.write_text(textwrap.dedent(text))
    return str(path)


@pytest.mark.parametrize(
    "text, env, expected",
    [
        ("q1 * 2 + 1", {"q1": 3.0}, 7.0),
        ("sin(q1) ** 2 + cos(q1) ** 2", {"q1": 0.4}, 1.0),
        ("-u1 / 4", {"u1": 2.0}, -0.5),
        ("pi", {}, np.pi),
    ],
)
def test_compile_expression(text, env, expected):
    f = compile_expression(text, set(env))
    assert f(env) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "text",
    ["__import__('os')", "q1.real", "q9", "'a'", "[q1]", "q1 if q1 else 0", "lambda: 1", "q1 +"],
)
def test_compile_expression_rejects(text):
    with pytest.raises(ConfigError):
        compile_expression(text, {"q1"})


def test_model_file_nonlinear_matches_builtin(tmp_path):
    path = _write(tmp_path, """
        [model]
        n = 3
        masses = 1
        chart = q1, q2, q3
        constraint = nonlinear
        alpha = u1**2

        [forces]
        potential = -1.5 * q3   # weight
    """)
    model = model_from_section(load_file(path))
    builtin = s3_nonlinear_quadratic(gravity=1.5).model
    for st in [GeneralizedState(np.zeros(3), [u, 0.3]) for u in (-1.0, 0.5, 2.0)]:
        np.testing.assert_allclose(accelerations(model, "voronec", st), accelerations(builtin, "voronec", st),
                                   atol=1e-15)


def test_model_file_linear(tmp_path):
    path = _write(tmp_path, """
        [model]
        n = 3
        chart = q1, q2, q3
        constraint = linear
        coeffs = 0.5, 0
    """)
    model = model_from_section(load_file(path))
    assert model.constraints.linear
    st = GeneralizedState(np.zeros(3), [2.0, 1.0])
    np.testing.assert_array_equal(model.alpha(st.q, st.u).astype(float), s1_free_linear().model.alpha(st.q, st.u))


def test_single_mass_replicated(tmp_path):
    path = _write(tmp_path, """
        [model]
        n = 3
        masses = 2
        chart = q1, q2, 0, q1 + cos(q2), sin(q2), q3
        constraint = linear
        coeffs = 1, 0
    """)
    model = model_from_section(load_file(path))
    assert model.masses == (2.0, 2.0)


@pytest.mark.parametrize(
    "body",
    [
        "[model]\nchart = q1\n",
        "[model]\nn = 3\nchart = q1, q2, q3\nconstraint = linear\n",
        "[model]\nn = 3\nchart = q1, q2, q3\nconstraint = linear\ncoeffs = 1, 2, 3\n",
        "[model]\nn = 3\nchart = q1, q2, q3\nconstraint = quadratic\nalpha = u1\n",
        "[model]\nn = 3\nchart = q1, q2, q3\nalpha = u3\n",
    ],
)
def test_model_file_errors(tmp_path, body):
    with pytest.raises(ConfigError):
        model_from_section(load_file(_write(tmp_path, body)))


def test_flags_override_file(tmp_path):
    path = _write(tmp_path, """
        [scenario]
        id = nonlinear-quadratic
        gravity = 2

        [initial]
        q = 0, 0, 0
        u = 1, 0

        [run]
        formulation = appell
        t_end = 2
        dt = 0.01
        seed = 5
    """)
    rc = from_sources(_args(model_file=path, dt=0.1, formulation="oracle"))
    assert rc.scenario_id == "nonlinear-quadratic" and rc.scenario_params == {"gravity": 2.0}
    assert rc.dt == 0.1 and rc.t_end == 2.0 and rc.seed == 5 and rc.formulation == "oracle"
    assert rc.u0 == [1.0, 0.0]
    rc = from_sources(_args(model_file=path, gravity=3.0))
    assert rc.scenario_params == {"gravity": 3.0} and rc.formulation == "appell"


@pytest.mark.parametrize(
    "kw",
    [
        dict(),
        dict(scenario="sleigh", dt=-1.0),
        dict(scenario="sleigh", dt=2.0, t_end=1.0),
        dict(scenario="sleigh", t_end=float("nan")),
        dict(scenario="nowhere"),
        dict(scenario="sleigh", gravity=1.0),
        dict(scenario="sleigh", samples=0),
        dict(scenario="sleigh", q0="0, x, 0"),
    ],
)
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        from_sources(_args(**kw))


def test_missing_file():
    with pytest.raises(ConfigError):
        from_sources(_args(model_file="/nonexistent/run.ini"))


def test_initial_state_override():
    rc = from_sources(_args(scenario="sleigh", q0="1, 0.2, 3", u0="0.5, -1"))
    st = rc.initial_state(rc.scenario())
    np.testing.assert_array_equal(st.q, [1.0, 0.2, 3.0])
    np.testing.assert_array_equal(st.u, [0.5, -1.0])
