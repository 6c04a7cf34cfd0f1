"""Scalar expression fields with exact forward-mode derivatives.

All coordinate data (anchors, structure functions, metrics, potentials,
Hamiltonians, Lagrangians) enters the engine as parsed expressions over
named real variables.  First and second directional derivatives are
computed with dual numbers; finite differencing never happens inside the
engine, only in test oracles.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

__all__ = [
    "Expr",
    "ExprError",
    "ParseError",
    "UnknownIdentifierError",
    "ArityError",
    "DomainError",
    "FUNCTIONS",
    "parse",
    "evaluate",
    "directional",
    "second_directional",
    "to_string",
    "free_variables",
]


class ExprError(Exception):
    """Base class for expression errors; carries a byte offset when known."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


class ParseError(ExprError):
    pass


class UnknownIdentifierError(ExprError):
    pass


class ArityError(ExprError):
    pass


class DomainError(ExprError):
    pass


# ---------------------------------------------------------------------------
# Dual numbers.  Components may themselves be Dual, which yields second-order
# (nested) duals.  All environment entries are wrapped uniformly at each
# seeding level, so arithmetic never mixes duals of different depth.


class Dual:
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        self.a = a
        self.b = b

    def __add__(self, o):
        if isinstance(o, Dual):
            return Dual(self.a + o.a, self.b + o.b)
        return Dual(self.a + o, self.b)

    def __radd__(self, o):
        return Dual(o + self.a, self.b)

    def __sub__(self, o):
        if isinstance(o, Dual):
            return Dual(self.a - o.a, self.b - o.b)
        return Dual(self.a - o, self.b)

    def __rsub__(self, o):
        return Dual(o - self.a, -self.b)

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __mul__(self, o):
        if isinstance(o, Dual):
            return Dual(self.a * o.a, self.a * o.b + self.b * o.a)
        return Dual(self.a * o, self.b * o)

    def __rmul__(self, o):
        return Dual(o * self.a, o * self.b)

    def __truediv__(self, o):
        if isinstance(o, Dual):
            q = self.a / o.a
            return Dual(q, (self.b - q * o.b) / o.a)
        return Dual(self.a / o, self.b / o)

    def __rtruediv__(self, o):
        q = o / self.a
        return Dual(q, -(q * self.b) / self.a)

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"


def _real(v):
    while isinstance(v, Dual):
        v = v.a
    return v


def _all_zero(v):
    if isinstance(v, Dual):
        return _all_zero(v.a) and _all_zero(v.b)
    return v == 0.0


def _no_seed(v):
    if isinstance(v, Dual):
        return _no_seed(v.a) and _all_zero(v.b)
    return True


# Generic elementary functions (float or Dual argument).


def _gsin(x):
    if isinstance(x, Dual):
        return Dual(_gsin(x.a), _gcos(x.a) * x.b)
    return math.sin(x)


def _gcos(x):
    if isinstance(x, Dual):
        return Dual(_gcos(x.a), -_gsin(x.a) * x.b)
    return math.cos(x)


def _gexp(x):
    if isinstance(x, Dual):
        e = _gexp(x.a)
        return Dual(e, e * x.b)
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _gtanh(x):
    if isinstance(x, Dual):
        t = _gtanh(x.a)
        return Dual(t, (1.0 - t * t) * x.b)
    return math.tanh(x)


def _glog(x):
    if isinstance(x, Dual):
        return Dual(_glog(x.a), x.b / x.a)
    return math.log(x)


def _gsqrt(x):
    if isinstance(x, Dual):
        r = _gsqrt(x.a)
        return Dual(r, x.b / (2.0 * r))
    return math.sqrt(x)


def _gpow(x, p):
    # p is a plain float; integer p is valid for any base
    if isinstance(x, Dual):
        if p == 0.0:
            return 1.0
        if p == 1.0:
            return x
        return Dual(_gpow(x.a, p), (p * _gpow(x.a, p - 1.0)) * x.b)
    try:
        return math.pow(x, p)
    except OverflowError:
        return math.inf


# Offset-carrying wrappers used by compiled closures.


def _sin(x, off):
    return _gsin(x)


def _cos(x, off):
    return _gcos(x)


def _exp(x, off):
    return _gexp(x)


def _tanh(x, off):
    return _gtanh(x)


def _log(x, off):
    if _real(x) <= 0.0:
        raise DomainError("log of non-positive value", off)
    return _glog(x)


def _sqrt(x, off):
    if _real(x) < 0.0:
        raise DomainError("sqrt of negative value", off)
    return _gsqrt(x)


def _div(x, y, off):
    if _real(y) == 0.0:
        raise DomainError("division by zero", off)
    return x / y


def _pow(x, y, off):
    if isinstance(y, Dual) and not _no_seed(y):
        if _real(x) <= 0.0:
            raise DomainError("variable exponent requires positive base", off)
        return _gexp(y * _glog(x))
    p = float(_real(y))
    xr = _real(x)
    if xr < 0.0 and p != math.floor(p):
        raise DomainError("negative base with non-integer exponent", off)
    if xr == 0.0 and p < 0.0:
        raise DomainError("zero base with negative exponent", off)
    return _gpow(x, p)


FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "tanh")

_NAMESPACE = {
    "_sin": _sin,
    "_cos": _cos,
    "_exp": _exp,
    "_log": _log,
    "_sqrt": _sqrt,
    "_tanh": _tanh,
    "_div": _div,
    "_pow": _pow,
    "__builtins__": {},
}


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float
    off: int


@dataclass(frozen=True)
class Var:
    name: str
    off: int


@dataclass(frozen=True)
class Neg:
    child: object
    off: int


@dataclass(frozen=True)
class Bin:
    op: str
    left: object
    right: object
    off: int


@dataclass(frozen=True)
class Call:
    fn: str
    arg: object
    off: int


class Expr:
    """A parsed, immutable expression tree over a declared variable list."""

    __slots__ = ("root", "variables", "text", "_fn")

    def __init__(self, root, variables, text):
        self.root = root
        self.variables = tuple(variables)
        self.text = text
        self._fn = None

    def eval_env(self, env):
        """Evaluate at an environment whose values are floats or Duals."""
        fn = self._fn
        if fn is None:
            fn = self._fn = _compile(self.root)
        try:
            return fn(env)
        except KeyError as exc:
            raise ExprError(f"environment missing variable {exc.args[0]!r}") from None
        except ZeroDivisionError:
            raise DomainError("division by zero") from None
        except OverflowError:
            return float("inf")
        except ValueError as exc:
            raise DomainError(str(exc)) from None

    def __repr__(self):
        return f"Expr({to_string(self)!r})"


def _codegen(node):
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return f"E[{node.name!r}]"
    if isinstance(node, Neg):
        return f"(-{_codegen(node.child)})"
    if isinstance(node, Bin):
        left = _codegen(node.left)
        right = _codegen(node.right)
        if node.op == "+":
            return f"({left}+{right})"
        if node.op == "-":
            return f"({left}-{right})"
        if node.op == "*":
            return f"({left}*{right})"
        if node.op == "/":
            return f"_div({left},{right},{node.off})"
        return f"_pow({left},{right},{node.off})"
    return f"_{node.fn}({_codegen(node.arg)},{node.off})"


def _compile(root):
    return eval(f"lambda E: {_codegen(root)}", dict(_NAMESPACE))


# ---------------------------------------------------------------------------
# Parser (recursive descent over the fixed grammar)

_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
)


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text, variables):
        self.text = text
        self.variables = frozenset(variables)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, off = self.peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", off)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", off)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, val, off = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                node = Bin(val, node, self.term(), off)
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, val, off = self.peek()
            if kind == "op" and val in "*/":
                self.advance()
                node = Bin(val, node, self.factor(), off)
            else:
                return node

    def factor(self):
        kind, val, off = self.peek()
        if kind == "op" and val == "-":
            self.advance()
            return Neg(self.factor(), off)
        return self.power()

    def power(self):
        node = self.atom()
        kind, val, off = self.peek()
        if kind == "op" and val == "^":
            self.advance()
            node = Bin("^", node, self.factor(), off)
        return node

    def atom(self):
        kind, val, off = self.advance()
        if kind == "num":
            return Num(float(val), off)
        if kind == "ident":
            nkind, nval, _ = self.peek()
            if nkind == "op" and nval == "(":
                if val not in FUNCTIONS:
                    if val in self.variables:
                        raise ArityError(f"{val!r} is a variable, not a function", off)
                    raise UnknownIdentifierError(f"unknown function {val!r}", off)
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return Call(val, arg, off)
            if val in self.variables:
                return Var(val, off)
            if val in FUNCTIONS:
                raise ArityError(f"function {val!r} used without arguments", off)
            raise UnknownIdentifierError(f"unknown identifier {val!r}", off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected token {val!r}" if val else "unexpected end of input", off)


def parse(text, variables):
    """Parse `text` over the declared variable names into an Expr."""
    root = _Parser(text, variables).parse()
    return Expr(root, variables, text)


# ---------------------------------------------------------------------------
# Evaluation and derivatives


def evaluate(e, env):
    r = e.eval_env(env)
    return float(r)


def directional(e, env, seed):
    """Value and exact directional derivative of `e` at `env` along `seed`."""
    denv = {k: Dual(float(v), float(seed.get(k, 0.0))) for k, v in env.items()}
    r = e.eval_env(denv)
    if isinstance(r, Dual):
        return float(r.a), float(r.b)
    return float(r), 0.0


def _split(v):
    if isinstance(v, Dual):
        return v.a, v.b
    return v, 0.0


def second_directional(e, env, seed1, seed2):
    """Exact mixed second directional derivative via nested duals."""
    denv = {
        k: Dual(
            Dual(float(v), float(seed1.get(k, 0.0))),
            Dual(float(seed2.get(k, 0.0)), 0.0),
        )
        for k, v in env.items()
    }
    r = e.eval_env(denv)
    _, outer = _split(r)
    _, mixed = _split(outer)
    return float(mixed)


def free_variables(e):
    found = set()
    stack = [e.root]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            found.add(node.name)
        elif isinstance(node, Neg):
            stack.append(node.child)
        elif isinstance(node, Bin):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Call):
            stack.append(node.arg)
    return found


# ---------------------------------------------------------------------------
# Printing (round-trips through parse with identical tree shape)

_PREC = {Num: 5, Var: 5, Call: 5, Bin: None, Neg: 3}


def _prec(node):
    if isinstance(node, Bin):
        if node.op == "^":
            return 4
        if node.op in "*/":
            return 2
        return 1
    return _PREC[type(node)]


def _render(node):
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({_render(node.arg)})"
    if isinstance(node, Neg):
        inner = _render(node.child)
        if _prec(node.child) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    p = _prec(node)
    left = _render(node.left)
    right = _render(node.right)
    if node.op == "^":
        # the grammar takes an atom on the left and a factor on the right
        if _prec(node.left) < 5:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left}{node.op}{right}"


def to_string(e):
    return _render(e.root)
