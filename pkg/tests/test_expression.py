import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgeworth import ExpressionSyntaxError, UnknownVariableError, parse


@pytest.mark.parametrize("text, z, expected", [
    ("z1 + z2 * z3", [1, 2, 3], 7),
    ("(z1 + z2) * z3", [1, 2, 3], 9),
    ("-z1^2", [3], -9),
    ("z1^-1", [4], 0.25),
    ("z1^(-2)", [2], 0.25),
    ("(2^3)^2", [0], 64),
    ("z1 / z2 / 2", [8, 2], 2),
    ("sqrt(z1) + log(exp(z2))", [16, 1.5], 5.5),
    ("1.5e1 - .5", [0], 14.5),
    ("+z1 - -z2", [1, 2], 3),
    ("(z5 - z1*z2)/sqrt((z3 - z1^2)*(z4 - z2^2))", [1, 1, 3, 3, 2], 0.5),
])
def test_evaluation(text, z, expected):
    assert parse(text)(np.array(z, dtype=float)) == pytest.approx(expected)


def test_vectorized_over_leading_axes():
    e = parse("z1 * z2")
    z = np.arange(24.0).reshape(3, 4, 2)
    np.testing.assert_array_equal(e(z), z[..., 0] * z[..., 1])
    assert parse("3")(z).shape == (3, 4)


def test_variables_and_min_k():
    e = parse("z1 + z4 * z2")
    assert e.variables == {0, 1, 3}
    assert e.min_k == 4


@pytest.mark.parametrize("text, offset", [
    ("z1 +", 4), ("(z1", 3), ("z1 z2", 3), ("z1 ^ 1.5", 5), ("2 * # 3", 4),
    ("sqrt z1", 5), ("", 0), ("z1^z2", 3), ("2^3^1", 3),
])
def test_syntax_errors_report_offsets(text, offset):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse(text)
    assert info.value.offset == offset
    assert f"offset {offset}" in str(info.value)


def test_unknown_variables():
    with pytest.raises(UnknownVariableError) as info:
        parse("z1 + z6", k=5)
    assert info.value.offset == 5
    with pytest.raises(UnknownVariableError):
        parse("z0")
    with pytest.raises(UnknownVariableError):
        parse("x + 1")
    with pytest.raises(UnknownVariableError):
        parse("sin(z1)")


def test_undefined_values_propagate_without_warnings():
    e = parse("log(z1) + 1/z2")
    with np.errstate(all="raise"):
        out = e(np.array([[-1.0, 1.0], [1.0, 0.0]]))
    assert np.isnan(out[0]) and np.isinf(out[1])


# random arithmetic trees compared with Python's own evaluation
_leaf = st.one_of(st.sampled_from(["z1", "z2", "z3"]),
                  st.integers(1, 9).map(str))


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*"]), children)
        .map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(children, st.integers(0, 3)).map(lambda t: f"({t[0]}^{t[1]})"),
        children.map(lambda c: f"-{c}"),
    )


@settings(max_examples=150, deadline=None)
@given(st.recursive(_leaf, _combine, max_leaves=8),
       st.lists(st.floats(-2, 2, allow_nan=False), min_size=3, max_size=3))
def test_matches_python_arithmetic(text, z):
    env = {"z1": z[0], "z2": z[1], "z3": z[2]}
    expected = eval(text.replace("^", "**"), {}, env)
    got = parse(text, k=3)(np.array(z))
    assert got == pytest.approx(expected, rel=1e-9, abs=1e-9)
