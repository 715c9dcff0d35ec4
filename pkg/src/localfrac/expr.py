"""Expression language for functions of ``t``.

Grammar, loosest to tightest binding::

    +  -        (binary, left-associative)
    *  /        (binary, left-associative)
    -          (unary)
    ^           (right-associative)
    f(x)  (x)   calls and parentheses

so ``-t^2`` means ``-(t^2)``. Supported calls are ``sin cos tan exp ln sqrt
abs``; ``pi`` and ``e`` are constants. A unary minus applied directly to a
numeric literal (``-2``, but not ``-2^2`` or ``-(2)``) folds into a negative
constant.

Trees are immutable dataclasses and hashable, so compiled evaluators and
derivatives are cached per tree.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Union

from .errors import DomainError, ParseError

__all__ = [
    "Token",
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ExprAst",
    "FUNCTIONS",
    "CONSTANTS",
    "tokenize",
    "parse",
    "eval_ast",
    "compile_ast",
    "diff_ast",
    "simplify",
    "to_text",
    "free_variables",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "sqrt", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}
BINARY_OPS = ("+", "-", "*", "/", "^")

_MAX_DEPTH = 200


@dataclass(frozen=True)
class Token:
    kind: str  # number | identifier | operator | paren | comma
    lexeme: str
    position: int


# -- tree ---------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float
    pos: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str = "t"
    pos: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "ExprAst"
    pos: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"
    pos: int | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "ExprAst"
    pos: int | None = field(default=None, compare=False, repr=False)


ExprAst = Union[Const, Var, Neg, BinOp, Call]

T = Var("t")
ZERO = Const(0.0)
ONE = Const(1.0)
TWO = Const(2.0)


def free_variables(node: ExprAst) -> frozenset[str]:
    if isinstance(node, Var):
        return frozenset((node.name,))
    if isinstance(node, Const):
        return frozenset()
    if isinstance(node, BinOp):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Neg):
        return free_variables(node.operand)
    return free_variables(node.arg)


def _depends_on(node: ExprAst, var: str) -> bool:
    return var in free_variables(node)


# -- lexer --------------------------------------------------------------------

_NUMBER = re.compile(r"(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens with 1-based column positions."""
    tokens: list[Token] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if m := _NUMBER.match(source, i):
            lexeme = m.group()
            if not math.isfinite(float(lexeme)):
                raise ParseError(f"numeric literal {lexeme!r} is out of range", i + 1)
            tokens.append(Token("number", lexeme, i + 1))
            i = m.end()
        elif m := _IDENT.match(source, i):
            tokens.append(Token("identifier", m.group(), i + 1))
            i = m.end()
        elif ch in "+-*/^":
            tokens.append(Token("operator", ch, i + 1))
            i += 1
        elif ch in "()":
            tokens.append(Token("paren", ch, i + 1))
            i += 1
        elif ch == ",":
            tokens.append(Token("comma", ch, i + 1))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", i + 1, "number, name, operator or parenthesis")
    return tokens


# -- parser -------------------------------------------------------------------

_INFIX_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}
_UNARY_BP = 30


class _Parser:
    def __init__(self, source: str, variables: tuple[str, ...]):
        self.source = source
        self.tokens = tokenize(source)
        self.variables = variables
        self.index = 0
        self.depth = 0

    def peek(self, offset: int = 0) -> Token | None:
        j = self.index + offset
        return self.tokens[j] if j < len(self.tokens) else None

    def position(self) -> int:
        tok = self.peek()
        return tok.position if tok is not None else len(self.source) + 1

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.position(), "expression")
        self.index += 1
        return tok

    def expect(self, lexeme: str) -> Token:
        tok = self.peek()
        if tok is None or tok.lexeme != lexeme:
            found = "end of input" if tok is None else repr(tok.lexeme)
            raise ParseError(f"found {found}", self.position(), repr(lexeme))
        self.index += 1
        return tok

    def parse(self) -> ExprAst:
        if not self.tokens:
            raise ParseError("empty expression", 1, "expression")
        node = self.expression(0)
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected {tok.lexeme!r}", tok.position, "operator or end of input")
        return node

    def expression(self, rbp: int) -> ExprAst:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            raise ParseError("expression nested too deeply", self.position())
        try:
            left = self.nud(self.advance())
            while True:
                tok = self.peek()
                if tok is None or tok.kind != "operator" or _INFIX_BP[tok.lexeme] <= rbp:
                    break
                self.index += 1
                bp = _INFIX_BP[tok.lexeme]
                right = self.expression(bp - 1 if tok.lexeme == "^" else bp)
                left = BinOp(tok.lexeme, left, right, tok.position)
            return left
        finally:
            self.depth -= 1

    def nud(self, tok: Token) -> ExprAst:
        if tok.kind == "number":
            return Const(float(tok.lexeme), tok.position)
        if tok.kind == "identifier":
            return self.identifier(tok)
        if tok.lexeme == "(":
            node = self.expression(0)
            self.expect(")")
            return node
        if tok.lexeme == "-":
            nxt, after = self.peek(), self.peek(1)
            if nxt is not None and nxt.kind == "number" and (after is None or after.lexeme != "^"):
                self.index += 1
                return Const(-float(nxt.lexeme), tok.position)
            return Neg(self.expression(_UNARY_BP), tok.position)
        raise ParseError(f"unexpected {tok.lexeme!r}", tok.position, "expression")

    def identifier(self, tok: Token) -> ExprAst:
        name = tok.lexeme
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expression(0)
            self.expect(")")
            return Call(name, arg, tok.position)
        if name in self.variables:
            return Var(name, tok.position)
        if name in CONSTANTS:
            return Const(CONSTANTS[name], tok.position)
        supported = ", ".join((*self.variables, *CONSTANTS, *FUNCTIONS))
        raise ParseError(f"unknown identifier {name!r}", tok.position, f"one of: {supported}")


def parse(source: str, variables: tuple[str, ...] = ("t",)) -> ExprAst:
    """Parse expression text into a tree.

    ``variables`` lists the admissible free variables; function bodies use only
    ``t``, ODE right-hand sides use ``("t", "y")``.

    >>> to_text(parse("2*t + 1"))
    '2*t + 1'
    """
    return _Parser(source, variables).parse()


# -- evaluation ---------------------------------------------------------------


def _checked(value: float, pos: int | None, what: str) -> float:
    if not math.isfinite(value):
        raise DomainError(f"non-finite result in {what}", pos)
    return value


def _pow(base: float, expo: float, pos: int | None) -> float:
    if base == 0.0 and expo < 0.0:
        raise DomainError("zero raised to a negative power", pos)
    if base < 0.0 and expo != math.floor(expo):
        raise DomainError("negative base with non-integer exponent", pos)
    try:
        return _checked(math.pow(base, expo), pos, "power")
    except OverflowError:
        raise DomainError("overflow in power", pos) from None


def _div(num: float, den: float, pos: int | None) -> float:
    if den == 0.0:
        raise DomainError("division by zero", pos)
    return _checked(num / den, pos, "division")


def _ln(x: float, pos: int | None) -> float:
    if x <= 0.0:
        raise DomainError(f"ln of non-positive value {x!r}", pos)
    return math.log(x)


def _sqrt(x: float, pos: int | None) -> float:
    if x < 0.0:
        raise DomainError(f"sqrt of negative value {x!r}", pos)
    return math.sqrt(x)


def _exp(x: float, pos: int | None) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise DomainError("overflow in exp", pos) from None


def _tan(x: float, pos: int | None) -> float:
    return _checked(math.tan(x), pos, "tan")


_CALLS: dict[str, Callable[[float, int | None], float]] = {
    "sin": lambda x, pos: math.sin(x),
    "cos": lambda x, pos: math.cos(x),
    "tan": _tan,
    "exp": _exp,
    "ln": _ln,
    "sqrt": _sqrt,
    "abs": lambda x, pos: abs(x),
}


def _compile(node: ExprAst) -> Callable[[float, float], float]:
    # closures of (t, y); y is ignored unless the tree references it
    pos = node.pos
    if isinstance(node, Const):
        value = node.value
        return lambda t, y: value
    if isinstance(node, Var):
        if node.name == "t":
            return lambda t, y: t
        if node.name == "y":
            return lambda t, y: y
        raise ValueError(f"cannot evaluate variable {node.name!r}")
    if isinstance(node, Neg):
        inner = _compile(node.operand)
        return lambda t, y: -inner(t, y)
    if isinstance(node, Call):
        inner = _compile(node.arg)
        fn = _CALLS[node.func]
        return lambda t, y: fn(inner(t, y), pos)
    lhs, rhs = _compile(node.left), _compile(node.right)
    op = node.op
    if op == "+":
        return lambda t, y: _checked(lhs(t, y) + rhs(t, y), pos, "sum")
    if op == "-":
        return lambda t, y: _checked(lhs(t, y) - rhs(t, y), pos, "difference")
    if op == "*":
        return lambda t, y: _checked(lhs(t, y) * rhs(t, y), pos, "product")
    if op == "/":
        return lambda t, y: _div(lhs(t, y), rhs(t, y), pos)
    return lambda t, y: _pow(lhs(t, y), rhs(t, y), pos)


@functools.lru_cache(maxsize=1024)
def compile_ast(ast: ExprAst) -> Callable[[float, float], float]:
    """Return a fast evaluator ``g(t, y)`` for ``ast``."""
    return _compile(ast)


def eval_ast(ast: ExprAst, t: float, y: float | None = None) -> float:
    """Evaluate ``ast`` at ``t`` (and ``y`` for two-variable trees).

    Raises :class:`DomainError` instead of returning NaN or infinity.

    >>> eval_ast(parse("-t^2"), 3.0)
    -9.0
    """
    if y is None:
        if "y" in free_variables(ast):
            raise ValueError("expression references y but no value was given")
        y = 0.0
    return compile_ast(ast)(float(t), float(y))


# -- symbolic differentiation -------------------------------------------------


def _add(a, b):
    return BinOp("+", a, b)


def _sub(a, b):
    return BinOp("-", a, b)


def _mul(a, b):
    return BinOp("*", a, b)


def _div_node(a, b):
    return BinOp("/", a, b)


def _pow_node(a, b):
    return BinOp("^", a, b)


def _derive(node: ExprAst, var: str) -> ExprAst:
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.name == var else ZERO
    if isinstance(node, Neg):
        return Neg(_derive(node.operand, var))
    if isinstance(node, Call):
        u = node.arg
        du = _derive(u, var)
        name = node.func
        if name == "sin":
            outer = Call("cos", u)
        elif name == "cos":
            outer = Neg(Call("sin", u))
        elif name == "tan":
            return _div_node(du, _pow_node(Call("cos", u), TWO))
        elif name == "exp":
            outer = node
        elif name == "ln":
            return _div_node(du, u)
        elif name == "sqrt":
            return _div_node(du, _mul(TWO, node))
        else:  # abs: sign(u) written as u/abs(u), undefined at 0
            return _div_node(_mul(u, du), node)
        return _mul(outer, du)
    u, v = node.left, node.right
    du, dv = _derive(u, var), _derive(v, var)
    op = node.op
    if op == "+":
        return _add(du, dv)
    if op == "-":
        return _sub(du, dv)
    if op == "*":
        return _add(_mul(du, v), _mul(u, dv))
    if op == "/":
        return _div_node(_sub(_mul(du, v), _mul(u, dv)), _pow_node(v, TWO))
    if not _depends_on(v, var):
        return _mul(_mul(v, _pow_node(u, _sub(v, ONE))), du)
    # u^v = exp(v*ln(u)), so (u^v)' = u^v * (v*ln(u))'
    return _mul(node, _derive(_mul(v, Call("ln", u)), var))


@functools.lru_cache(maxsize=1024)
def diff_ast(ast: ExprAst, var: str = "t") -> ExprAst:
    """Symbolic derivative with respect to ``var``, simplified.

    >>> to_text(diff_ast(parse("sqrt(t)")))
    '1/(2*sqrt(t))'
    """
    return simplify(_derive(ast, var))


# -- simplification -----------------------------------------------------------


def _is_const(node: ExprAst, value: float | None = None) -> bool:
    return isinstance(node, Const) and (value is None or node.value == value)


def _fold(node: ExprAst) -> ExprAst:
    try:
        return Const(compile_ast(node)(0.0, 0.0))
    except (DomainError, ValueError):
        return node


def _rewrite(node: ExprAst) -> ExprAst:
    if isinstance(node, Neg):
        inner = node.operand
        if isinstance(inner, Neg):
            return inner.operand
        if isinstance(inner, Const):
            return Const(-inner.value)
        return node
    if isinstance(node, Call):
        return _fold(node) if isinstance(node.arg, Const) else node
    if not isinstance(node, BinOp):
        return node
    a, b, op = node.left, node.right, node.op
    if isinstance(a, Const) and isinstance(b, Const):
        folded = _fold(node)
        if folded is not node:
            return folded
    if op == "+":
        if _is_const(a, 0.0):
            return b
        if _is_const(b, 0.0):
            return a
    elif op == "-":
        if _is_const(b, 0.0):
            return a
        if _is_const(a, 0.0):
            return Neg(b)
    elif op == "*":
        if _is_const(a, 0.0) or _is_const(b, 0.0):
            return ZERO
        if _is_const(a, 1.0):
            return b
        if _is_const(b, 1.0):
            return a
    elif op == "/":
        if _is_const(b, 1.0):
            return a
    elif op == "^":
        if _is_const(b, 1.0):
            return a
        if _is_const(b, 0.0):
            return ONE
    return node


def _simplify_once(node: ExprAst) -> ExprAst:
    if isinstance(node, Neg):
        node = Neg(_simplify_once(node.operand), node.pos)
    elif isinstance(node, Call):
        node = Call(node.func, _simplify_once(node.arg), node.pos)
    elif isinstance(node, BinOp):
        node = BinOp(node.op, _simplify_once(node.left), _simplify_once(node.right), node.pos)
    return _rewrite(node)


def simplify(ast: ExprAst) -> ExprAst:
    """Constant folding plus the identities x+0, x*1, x*0, x^1, x^0.

    Iterated to a fixed point, hence idempotent.

    >>> to_text(simplify(parse("0*sin(t)+t")))
    't'
    """
    while True:
        nxt = _simplify_once(ast)
        if nxt == ast:
            return nxt
        ast = nxt


# -- printing -----------------------------------------------------------------

_ATOM = 100


def _prec(node: ExprAst) -> int:
    if isinstance(node, Const):
        return _UNARY_BP if node.value < 0 else _ATOM
    if isinstance(node, Neg):
        return _UNARY_BP
    if isinstance(node, BinOp):
        return _INFIX_BP[node.op]
    return _ATOM


def _number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def to_text(ast: ExprAst) -> str:
    """Render ``ast`` so that ``parse(to_text(ast)) == ast``.

    >>> to_text(Neg(BinOp("^", Var("t"), Const(2.0))))
    '-(t^2)'
    """
    if isinstance(ast, Const):
        return _number(ast.value)
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Call):
        return f"{ast.func}({to_text(ast.arg)})"
    if isinstance(ast, Neg):
        inner = ast.operand
        if isinstance(inner, (Var, Call)):
            return "-" + to_text(inner)
        return f"-({to_text(inner)})"
    op = ast.op
    bp = _INFIX_BP[op]
    left, right = to_text(ast.left), to_text(ast.right)
    lp, rp = _prec(ast.left), _prec(ast.right)
    if lp < bp or (op == "^" and lp == bp):
        left = f"({left})"
    if rp < bp or (op != "^" and rp == bp):
        right = f"({right})"
    if op in "+-":
        return f"{left} {op} {right}"
    return f"{left}{op}{right}"
