import numpy as np
import pytest

from boxdyn import ParseError, parse_expression


def _iv(expr, lo, hi, lam=0.0, variables=("x",)):
    p = parse_expression(expr, variables)
    lo = np.atleast_2d(np.asarray(lo, dtype=float).reshape(1, -1))
    hi = np.atleast_2d(np.asarray(hi, dtype=float).reshape(1, -1))
    out_lo, out_hi = p.eval_interval(lo, hi, lam)
    return float(out_lo[0]), float(out_hi[0])


def test_affine_interval_exact():
    assert _iv("1 - x", [0.5], [0.6]) == (0.4, 0.5)


def test_caret_power_and_lam():
    lo, hi = _iv("x^2 + lam", [-0.5], [0.5], lam=0.25)
    assert lo == 0.25 and hi == 0.5


def test_lam_interval_evaluation():
    lo, hi = _iv("x^2 + lam", [0.0], [0.0], lam=(0.0, 1.0))
    assert lo == 0.0 and hi == 1.0


def test_point_evaluation_matches():
    p = parse_expression("x*(1 + lam - x^2 - y^2) - y", ("x", "y"))
    x, y, lam = 0.3, -0.7, 0.1
    assert p.eval_point(np.array([x, y]), lam) == pytest.approx(
        x * (1 + lam - x * x - y * y) - y)


def test_interval_encloses_samples():
    rng = np.random.default_rng(7)
    p = parse_expression("y*(1 + lam - x^2 - y^2) + x", ("x", "y"))
    lo = np.array([[-0.4, 0.2]])
    hi = np.array([[0.1, 0.9]])
    out_lo, out_hi = p.eval_interval(lo, hi, 0.2)
    pts = rng.uniform(lo[0], hi[0], size=(256, 2))
    vals = [p.eval_point(pt, 0.2) for pt in pts]
    assert out_lo[0] <= min(vals) and max(vals) <= out_hi[0]


def test_division_by_constant():
    assert _iv("x / 2", [1.0], [3.0]) == (0.5, 1.5)


def test_affine_form():
    g, c = parse_expression("2*x - y + 1", ("x", "y")).affine_form()
    assert np.allclose(g, [2.0, -1.0]) and c == 1.0


def test_affine_form_rejects_nonlinear_and_lam():
    with pytest.raises(ParseError):
        parse_expression("x^2", ("x",)).affine_form()
    with pytest.raises(ParseError):
        parse_expression("x + lam", ("x",)).affine_form()


@pytest.mark.parametrize("bad", ["x + unknown", "__import__('os')", "x ** y",
                                 "x ** -1", "1 / x", "f(x)"])
def test_parse_rejects_bad_syntax(bad):
    with pytest.raises(ParseError):
        parse_expression(bad, ("x", "y"))


def test_parse_error_has_position():
    with pytest.raises(ParseError):
        parse_expression("x + + * 2", ("x",))
