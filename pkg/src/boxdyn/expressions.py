"""Polynomial expressions in the state variables and the parameter.

Right-hand sides and guard left-hand sides are written as plain text, e.g.
``"1 - x"`` or ``"x^2 + lam"``.  They are parsed through the Python ``ast``
module with a strict whitelist (names, numbers, ``+ - * ^`` and integer
powers) and evaluated either on points or on interval bound arrays.  The
parameter is always spelled ``lam``.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass

import numpy as np

from .errors import ParseError
from .intervals import iadd, imul, ineg, ipow, isub

PARAM_NAME = "lam"

_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Pow, ast.Div)
_UNOPS = (ast.USub, ast.UAdd)


@dataclass(frozen=True)
class Polynomial:
    """A parsed polynomial over named state variables and ``lam``."""

    text: str
    variables: tuple[str, ...]
    _tree: ast.expr

    def eval_interval(self, lo: np.ndarray, hi: np.ndarray, lam) -> tuple[np.ndarray, np.ndarray]:
        """Enclose the range over boxes given as (m, n) bound arrays.

        `lam` may be a scalar or an (lam_lo, lam_hi) pair for evaluation
        over a whole parameter interval.
        """
        if np.isscalar(lam) or isinstance(lam, float):
            lam_iv = (float(lam), float(lam))
        else:
            lam_iv = (float(lam[0]), float(lam[1]))
        env = {PARAM_NAME: lam_iv}
        for j, name in enumerate(self.variables):
            env[name] = (lo[..., j], hi[..., j])
        out_lo, out_hi = _eval_iv(self._tree, env)
        shape = lo.shape[:-1]
        return np.broadcast_to(out_lo, shape).astype(float), np.broadcast_to(out_hi, shape).astype(float)

    def eval_point(self, x, lam: float) -> float:
        env = {PARAM_NAME: float(lam)}
        x = np.asarray(x, dtype=float)
        for j, name in enumerate(self.variables):
            env[name] = float(x[..., j]) if x.ndim else float(x)
        return _eval_pt(self._tree, env)

    def affine_form(self) -> tuple[np.ndarray, float]:
        """Return (g, c) with the expression equal to g.x + c.

        Raises ParseError when the expression is not affine in the state
        variables or mentions ``lam``.
        """
        coeffs, const = _eval_affine(self._tree, self.variables)
        return np.asarray(coeffs, dtype=float), const

    def __str__(self):
        return self.text


def parse_expression(text: str, variables) -> Polynomial:
    """Parse `text` into a Polynomial over the given variable names."""
    variables = tuple(variables)
    source = text.replace("^", "**")
    try:
        tree = ast.parse(source, mode="eval").body
    except SyntaxError as exc:
        raise ParseError(f"bad expression {text!r}: {exc.msg}", exc.lineno, exc.offset) from None
    _check(tree, set(variables) | {PARAM_NAME}, text)
    return Polynomial(text=text, variables=variables, _tree=tree)


def _check(node: ast.expr, names: set[str], text: str):
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ParseError(f"non-numeric constant in {text!r}")
    elif isinstance(node, ast.Name):
        if node.id not in names:
            raise ParseError(f"unknown variable {node.id!r} in {text!r}")
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, _UNOPS):
        _check(node.operand, names, text)
    elif isinstance(node, ast.BinOp) and isinstance(node.op, _BINOPS):
        if isinstance(node.op, ast.Pow):
            if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)
                    and node.right.value >= 0):
                raise ParseError(f"exponent must be a non-negative integer literal in {text!r}")
            _check(node.left, names, text)
            return
        if isinstance(node.op, ast.Div):
            if not (isinstance(node.right, ast.Constant)
                    and isinstance(node.right.value, (int, float)) and node.right.value != 0):
                raise ParseError(f"division only by a non-zero constant in {text!r}")
            _check(node.left, names, text)
            return
        _check(node.left, names, text)
        _check(node.right, names, text)
    else:
        raise ParseError(f"unsupported syntax in {text!r}")


def _eval_iv(node: ast.expr, env):
    if isinstance(node, ast.Constant):
        v = float(node.value)
        return v, v
    if isinstance(node, ast.Name):
        return env[node.id]
    if isinstance(node, ast.UnaryOp):
        val = _eval_iv(node.operand, env)
        return ineg(val) if isinstance(node.op, ast.USub) else val
    left = _eval_iv(node.left, env)
    if isinstance(node.op, ast.Pow):
        return ipow(left, node.right.value)
    if isinstance(node.op, ast.Div):
        c = float(node.right.value)
        lo, hi = left
        return (lo / c, hi / c) if c > 0 else (hi / c, lo / c)
    right = _eval_iv(node.right, env)
    if isinstance(node.op, ast.Add):
        return iadd(left, right)
    if isinstance(node.op, ast.Sub):
        return isub(left, right)
    return imul(left, right)


def _eval_pt(node: ast.expr, env) -> float:
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return env[node.id]
    if isinstance(node, ast.UnaryOp):
        v = _eval_pt(node.operand, env)
        return -v if isinstance(node.op, ast.USub) else v
    left = _eval_pt(node.left, env)
    if isinstance(node.op, ast.Pow):
        return left ** node.right.value
    if isinstance(node.op, ast.Div):
        return left / float(node.right.value)
    right = _eval_pt(node.right, env)
    if isinstance(node.op, ast.Add):
        return left + right
    if isinstance(node.op, ast.Sub):
        return left - right
    return left * right


def _eval_affine(node: ast.expr, variables):
    n = len(variables)
    if isinstance(node, ast.Constant):
        return np.zeros(n), float(node.value)
    if isinstance(node, ast.Name):
        if node.id == PARAM_NAME:
            raise ParseError("guards may not depend on lam")
        g = np.zeros(n)
        g[variables.index(node.id)] = 1.0
        return g, 0.0
    if isinstance(node, ast.UnaryOp):
        g, c = _eval_affine(node.operand, variables)
        return (-g, -c) if isinstance(node.op, ast.USub) else (g, c)
    gl, cl = _eval_affine(node.left, variables)
    if isinstance(node.op, ast.Pow):
        if np.any(gl != 0) or node.right.value > 1:
            raise ParseError("guard expressions must be affine")
        return gl, cl ** node.right.value
    if isinstance(node.op, ast.Div):
        c = float(node.right.value)
        return gl / c, cl / c
    gr, cr = _eval_affine(node.right, variables)
    if isinstance(node.op, ast.Add):
        return gl + gr, cl + cr
    if isinstance(node.op, ast.Sub):
        return gl - gr, cl - cr
    # product: affine only when one side is constant
    if np.all(gl == 0):
        return cl * gr, cl * cr
    if np.all(gr == 0):
        return cr * gl, cr * cl
    raise ParseError("guard expressions must be affine")
