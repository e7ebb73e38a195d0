"""Right-hand-side expressions and the ``.prob`` problem-file format.

Expressions are written in the variables ``t`` (alias ``x``), ``u``, ``up``
(alias ``u'``) and ``upp`` (alias ``u''``) with ``+ - * / ^``, parentheses and
the functions exp, sin, cos, log, sqrt, abs. Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | VARIABLE | NAME '(' expr ')' | '(' expr ')'

so ``-u^2`` is ``-(u^2)`` and ``2^3^2`` is ``2^9``. Multiplication must be
explicit.

A problem file is a list of ``key = value`` lines; ``#`` starts a comment.
``f`` and ``exact`` take quoted expressions, the numeric keys ``c1 c2 c3 M L0
L1 L2`` take a number or a constant expression such as ``sin(1)``::

    f = "t^4*u - u^2"
    c1 = 0
    c2 = -1
    c3 = sin(1)
    exact = "(t-1)*sin(t)"
"""

from __future__ import annotations

import enum
import math
import os
import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .solver import Problem


class TokenKind(enum.Enum):
    NUMBER = "number"
    IDENT = "identifier"
    PLUS = "'+'"
    MINUS = "'-'"
    STAR = "'*'"
    SLASH = "'/'"
    CARET = "'^'"
    LPAREN = "'('"
    RPAREN = "')'"
    COMMA = "','"
    END = "end of input"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    position: int


class ExpressionError(ValueError):
    """Base class for lexing/parsing failures; ``position`` is a byte offset."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} at offset {position}")


class UnknownCharacter(ExpressionError):
    pass


class MalformedNumber(ExpressionError):
    pass


class UnexpectedToken(ExpressionError):
    def __init__(self, found: Token, expected: tuple[str, ...]):
        self.found = found
        self.expected = expected
        what = found.lexeme or found.kind.value
        super().__init__(f"unexpected {what!r}, expected {' or '.join(expected)}", found.position)


class UnknownFunction(ExpressionError):
    def __init__(self, name: str, position: int):
        self.name = name
        super().__init__(f"unknown function {name!r}", position)


class UnknownVariable(ExpressionError):
    def __init__(self, name: str, position: int):
        self.name = name
        super().__init__(f"unknown variable {name!r}", position)


class TrailingInput(ExpressionError):
    def __init__(self, token: Token):
        super().__init__(f"trailing input {token.lexeme!r}", token.position)


# ---------------------------------------------------------------- lexing

_SINGLE = {
    "+": TokenKind.PLUS,
    "-": TokenKind.MINUS,
    "*": TokenKind.STAR,
    "/": TokenKind.SLASH,
    "^": TokenKind.CARET,
    "(": TokenKind.LPAREN,
    ")": TokenKind.RPAREN,
    ",": TokenKind.COMMA,
}
_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9']*")


def _byte_offset(src: str, index: int) -> int:
    return len(src[:index].encode("utf-8"))


def tokenize(src: str) -> list[Token]:
    """Split ``src`` into tokens (maximal munch, whitespace skipped).

    The returned list does not include an END marker.
    """
    tokens: list[Token] = []
    i = 0
    while i < len(src):
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _SINGLE:
            tokens.append(Token(_SINGLE[ch], ch, _byte_offset(src, i)))
            i += 1
            continue
        if ch.isascii() and (ch.isdigit() or ch == "."):
            m = _NUMBER.match(src, i)
            end = m.end() if m else i
            # an exponent marker without digits, or a second '.', is malformed
            if m is None or (end < len(src) and (src[end] in "eE." or src[end].isdigit())):
                raise MalformedNumber("malformed number", _byte_offset(src, i))
            tokens.append(Token(TokenKind.NUMBER, src[i:end], _byte_offset(src, i)))
            i = end
            continue
        m = _IDENT.match(src, i) if ch.isascii() else None
        if m:
            tokens.append(Token(TokenKind.IDENT, m.group(), _byte_offset(src, i)))
            i = m.end()
            continue
        raise UnknownCharacter(f"unknown character {ch!r}", _byte_offset(src, i))
    return tokens


# ---------------------------------------------------------------- syntax tree

VARIABLES = ("t", "u", "up", "upp")
_ALIASES = {"t": "t", "x": "t", "u": "u", "up": "up", "u'": "up", "upp": "upp", "u''": "upp"}

FUNCTIONS: dict[str, Callable] = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
}

_BINARY: dict[str, Callable] = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"


Expr = Union[Constant, Variable, Unary, Binary, Call]


# ---------------------------------------------------------------- parsing


class _Parser:
    def __init__(self, tokens: list[Token], end: int):
        self.tokens = tokens
        self.pos = 0
        self.end = Token(TokenKind.END, "", end)

    def peek(self) -> Token:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else self.end

    def take(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, kind: TokenKind) -> Token:
        tok = self.peek()
        if tok.kind is not kind:
            raise UnexpectedToken(tok, (kind.value,))
        return self.take()

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind in (TokenKind.PLUS, TokenKind.MINUS):
            op = self.take().lexeme
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek().kind in (TokenKind.STAR, TokenKind.SLASH):
            op = self.take().lexeme
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.peek().kind is TokenKind.MINUS:
            self.take()
            return Unary("-", self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().kind is TokenKind.CARET:
            self.take()
            return Binary("^", base, self.factor())
        return base

    def atom(self) -> Expr:
        tok = self.peek()
        if tok.kind is TokenKind.NUMBER:
            self.take()
            return Constant(float(tok.lexeme))
        if tok.kind is TokenKind.LPAREN:
            self.take()
            node = self.expr()
            self.expect(TokenKind.RPAREN)
            return node
        if tok.kind is TokenKind.IDENT:
            self.take()
            if self.peek().kind is TokenKind.LPAREN:
                if tok.lexeme not in FUNCTIONS:
                    raise UnknownFunction(tok.lexeme, tok.position)
                self.take()
                arg = self.expr()
                self.expect(TokenKind.RPAREN)
                return Call(tok.lexeme, arg)
            if tok.lexeme not in _ALIASES:
                if tok.lexeme in FUNCTIONS:
                    raise UnexpectedToken(self.peek(), (TokenKind.LPAREN.value,))
                raise UnknownVariable(tok.lexeme, tok.position)
            return Variable(_ALIASES[tok.lexeme])
        raise UnexpectedToken(tok, ("number", "variable", "function call", "'('"))


def parse(tokens: list[Token] | str) -> Expr:
    """Parse a token list (or source string) into an expression tree."""
    if isinstance(tokens, str):
        end = len(tokens.encode("utf-8"))
        tokens = tokenize(tokens)
    else:
        end = tokens[-1].position + len(tokens[-1].lexeme.encode("utf-8")) if tokens else 0
    parser = _Parser(tokens, end)
    node = parser.expr()
    if parser.peek().kind is not TokenKind.END:
        raise TrailingInput(parser.peek())
    return node


def variables(e: Expr) -> set[str]:
    if isinstance(e, Variable):
        return {e.name}
    if isinstance(e, Constant):
        return set()
    if isinstance(e, Unary):
        return variables(e.operand)
    if isinstance(e, Call):
        return variables(e.arg)
    return variables(e.left) | variables(e.right)


# ---------------------------------------------------------------- evaluation


def evaluate(e: Expr, t=0.0, u=0.0, up=0.0, upp=0.0):
    """Evaluate with numpy semantics; bad operations give inf/nan, not exceptions."""
    env = {"t": t, "u": u, "up": up, "upp": upp}
    with np.errstate(all="ignore"):
        return _eval(e, env)


def _eval(e: Expr, env: dict):
    if isinstance(e, Constant):
        return np.float64(e.value)
    if isinstance(e, Variable):
        return env[e.name]
    if isinstance(e, Unary):
        return np.negative(_eval(e.operand, env))
    if isinstance(e, Binary):
        return _BINARY[e.op](_eval(e.left, env), _eval(e.right, env))
    return FUNCTIONS[e.name](_eval(e.arg, env))


def compile_expr(e: Expr) -> Callable:
    """Turn a tree into a closure ``f(t, u, up, upp)``; works on arrays."""

    def build(node: Expr) -> Callable:
        if isinstance(node, Constant):
            value = np.float64(node.value)
            return lambda env: value
        if isinstance(node, Variable):
            idx = VARIABLES.index(node.name)
            return lambda env: env[idx]
        if isinstance(node, Unary):
            inner = build(node.operand)
            return lambda env: np.negative(inner(env))
        if isinstance(node, Binary):
            op, left, right = _BINARY[node.op], build(node.left), build(node.right)
            return lambda env: op(left(env), right(env))
        fn, inner = FUNCTIONS[node.name], build(node.arg)
        return lambda env: fn(inner(env))

    body = build(e)

    def f(t, u=0.0, up=0.0, upp=0.0):
        with np.errstate(all="ignore"):
            return body((t, u, up, upp))

    return f


# ---------------------------------------------------------------- printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return _PREC["neg"]
    return _ATOM


def to_source(e: Expr) -> str:
    """Print with the fewest parentheses that re-parse to the same tree."""
    if isinstance(e, Constant):
        return repr(float(e.value))
    if isinstance(e, Variable):
        return e.name
    if isinstance(e, Call):
        return f"{e.name}({to_source(e.arg)})"
    if isinstance(e, Unary):
        inner = to_source(e.operand)
        return f"-{inner}" if _prec(e.operand) >= _PREC["neg"] else f"-({inner})"
    if e.op == "^":
        base = to_source(e.left)
        if _prec(e.left) < _ATOM:
            base = f"({base})"
        expo = to_source(e.right)
        if _prec(e.right) < _PREC["neg"]:
            expo = f"({expo})"
        return f"{base}^{expo}"
    p = _PREC[e.op]
    left = to_source(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = to_source(e.right)
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


# ---------------------------------------------------------------- problem files


class ProblemFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", offset {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class MissingKey(ProblemFileError):
    def __init__(self, key: str):
        self.key = key
        super().__init__(f"missing required key {key!r}")


class DuplicateKey(ProblemFileError):
    def __init__(self, key: str, line: int):
        self.key = key
        super().__init__(f"duplicate key {key!r}", line)


class UnknownKey(ProblemFileError):
    def __init__(self, key: str, line: int):
        self.key = key
        super().__init__(f"unknown key {key!r}", line)


_STRING_KEYS = ("f", "exact")
_NUMBER_KEYS = ("c1", "c2", "c3", "M", "L0", "L1", "L2")
_REQUIRED = ("f", "c1", "c2", "c3")
_LINE = re.compile(r"\s*([A-Za-z][A-Za-z0-9_]*)\s*=\s*")


def _split_value(text: str, start: int, lineno: int) -> tuple[str, int, bool]:
    """Return (value, column, quoted) with any trailing comment removed."""
    rest = text[start:]
    if rest[:1] in ("'", '"'):
        quote = rest[0]
        close = rest.find(quote, 1)
        if close < 0:
            raise ProblemFileError("unterminated string", lineno, _byte_offset(text, start))
        tail = rest[close + 1 :].strip()
        if tail and not tail.startswith("#"):
            raise ProblemFileError(f"unexpected text after string: {tail!r}", lineno, _byte_offset(text, start + close + 1))
        return rest[1:close], start + 1, True
    value = rest.split("#", 1)[0].rstrip()
    return value, start, False


@dataclass
class ProblemFile:
    """Raw contents of a problem file, before compilation."""

    f: str
    c1: float
    c2: float
    c3: float
    exact: str | None = None
    M: float | None = None
    L0: float | None = None
    L1: float | None = None
    L2: float | None = None


def parse_problem_text(text: str) -> ProblemFile:
    seen: dict[str, int] = {}
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        m = _LINE.match(raw)
        if not m:
            raise ProblemFileError("expected 'key = value'", lineno, 0)
        key = m.group(1)
        if key not in _STRING_KEYS and key not in _NUMBER_KEYS:
            raise UnknownKey(key, lineno)
        if key in seen:
            raise DuplicateKey(key, lineno)
        seen[key] = lineno
        value, col, quoted = _split_value(raw, m.end(), lineno)
        try:
            expr = parse(value)
        except ExpressionError as exc:
            raise ProblemFileError(
                f"in {key}: {exc.args[0].rsplit(' at offset', 1)[0]}",
                lineno,
                _byte_offset(raw, col) + exc.position,
            ) from exc
        names = variables(expr)
        if key == "f":
            values[key] = value
        elif key == "exact":
            if names - {"t"}:
                raise ProblemFileError(f"exact may only use t, found {sorted(names - {'t'})}", lineno)
            values[key] = value
        else:
            if quoted:
                raise ProblemFileError(f"{key} takes a number, not a string", lineno)
            if names:
                raise ProblemFileError(f"{key} must be a constant, found variables {sorted(names)}", lineno)
            number = float(evaluate(expr))
            if not math.isfinite(number):
                raise ProblemFileError(f"{key} is not finite", lineno)
            values[key] = number
    for key in _REQUIRED:
        if key not in values:
            raise MissingKey(key)
    return ProblemFile(**values)


def build_problem(spec: ProblemFile) -> Problem:
    rhs_expr = compile_expr(parse(spec.f))

    def rhs(t, x, y, z):
        return rhs_expr(t, x, y, z)

    exact = None
    if spec.exact is not None:
        exact_expr = compile_expr(parse(spec.exact))

        def exact(t):
            t = np.asarray(t, dtype=float)
            return np.broadcast_to(exact_expr(t), t.shape) * 1.0

    return Problem(
        rhs=rhs,
        c1=spec.c1,
        c2=spec.c2,
        c3=spec.c3,
        exact=exact,
        M=spec.M,
        L0=spec.L0,
        L1=spec.L1,
        L2=spec.L2,
    )


def read_problem_file(source: Union[str, os.PathLike]) -> Problem:
    """Load a problem from a path, or from the file text itself.

    A ``str`` containing a newline or ``=`` is taken as file contents.
    """
    if isinstance(source, str) and ("\n" in source or "=" in source):
        text = source
    else:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    return build_problem(parse_problem_text(text))
