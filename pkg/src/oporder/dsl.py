"""Textual language for operator words and chain inequalities.

Grammar (whitespace separates tokens, ``#`` starts a line comment):

    chain  := word rel word          rel := '>=' | '<='
    word   := factor+                juxtaposition is product, left assoc
    factor := atom ['^' '{' sexpr '}']
    atom   := 'A' int | '(' word ')'
    sexpr  := ['-'] sterm (('+'|'-') sterm)*
    sterm  := name | number | name '/' number | number '/' number
    name   := 'r' | 't'<int> | 'p'<int> | 'w'<int>

Canonical output uses single spaces between product factors and braces
around every exponent, e.g. ``(A3^{r/2} (A2^{-t1/2} A1^{p1} A2^{-t1/2})^{p2}
A3^{r/2})^{w1}``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from types import MappingProxyType
from typing import Mapping, Union

import numpy as np

from .chains import (
    ONE,
    ChainInequality,
    Direction,
    OperatorWord,
    Power,
    Product,
    ScalarExpr,
    Symbol,
)
from .spectral import HermitianMatrix, matrix_power

# A product of symbol powers is generally not Hermitian; intermediate
# results are plain arrays and only coerced back at power nodes and at the
# top level, where palindromic words must land within this residual.
HERMITIZE_RTOL = 1e-8

_NAME_RE = re.compile(r"^(r|[tpw][0-9]+)$")


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class EvaluationError(Exception):
    pass


class UnboundNameError(EvaluationError):
    pass


class NonHermitianResultError(EvaluationError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    length = len(text)
    while i < length:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < length and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch == "A":
            j = i + 1
            while j < length and text[j].isdigit():
                j += 1
            if j == i + 1:
                raise ParseError("operator symbol 'A' requires an index", line, col)
            tokens.append(Token("SYMBOL", int(text[i + 1:j]), line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < length and (text[j].isalnum()):
                j += 1
            tokens.append(Token("NAME", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit():
            j = i
            while j < length and text[j].isdigit():
                j += 1
            if j < length and text[j] == "." and j + 1 < length and text[j + 1].isdigit():
                j += 1
                while j < length and text[j].isdigit():
                    j += 1
            tokens.append(Token("NUMBER", Fraction(text[i:j]), line, start_col))
            col += j - i
            i = j
            continue
        if ch in "<>":
            if i + 1 < length and text[i + 1] == "=":
                tokens.append(Token("GE" if ch == ">" else "LE", ch + "=", line, start_col))
                i += 2
                col += 2
                continue
            raise ParseError(f"expected '{ch}='", line, col)
        simple = {"(": "LPAREN", ")": "RPAREN", "^": "CARET", "{": "LBRACE",
                  "}": "RBRACE", "+": "PLUS", "-": "MINUS", "/": "SLASH"}
        if ch in simple:
            tokens.append(Token(simple[ch], ch, line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", None, line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.kind}", tok.line, tok.col)
        return self.advance()

    def parse_top(self) -> Union[OperatorWord, ChainInequality]:
        lhs = self.parse_word()
        tok = self.peek()
        if tok.kind in ("GE", "LE"):
            self.advance()
            rhs = self.parse_word()
            self.expect("EOF")
            direction = Direction.GE if tok.kind == "GE" else Direction.LE
            return ChainInequality(None, None, lhs, rhs, direction)
        self.expect("EOF")
        return lhs

    def parse_word(self) -> OperatorWord:
        factors = [self.parse_factor()]
        while self.peek().kind in ("SYMBOL", "LPAREN"):
            factors.append(self.parse_factor())
        if len(factors) == 1:
            return factors[0]
        return Product(tuple(factors))

    def parse_factor(self) -> OperatorWord:
        tok = self.peek()
        if tok.kind == "SYMBOL":
            self.advance()
            bare_symbol = True
            index = tok.value
            inner: OperatorWord | None = None
        elif tok.kind == "LPAREN":
            self.advance()
            inner = self.parse_word()
            self.expect("RPAREN")
            bare_symbol = False
            index = -1
        else:
            raise ParseError(
                f"expected 'A<i>' or '(', found {tok.kind}", tok.line, tok.col
            )
        if self.peek().kind == "CARET":
            self.advance()
            self.expect("LBRACE")
            expr = self.parse_sexpr()
            self.expect("RBRACE")
            if bare_symbol:
                return Symbol(index, expr)
            return Power(inner, expr)
        return Symbol(index, ONE) if bare_symbol else inner

    def parse_sexpr(self) -> ScalarExpr:
        negate = False
        if self.peek().kind == "MINUS":
            self.advance()
            negate = True
        expr = self.parse_sterm()
        if negate:
            expr = -expr
        while self.peek().kind in ("PLUS", "MINUS"):
            op = self.advance()
            term = self.parse_sterm()
            expr = expr + term if op.kind == "PLUS" else expr - term
        return expr

    def parse_sterm(self) -> ScalarExpr:
        tok = self.peek()
        if tok.kind == "NAME":
            self.advance()
            if not _NAME_RE.match(str(tok.value)):
                raise ParseError(
                    f"name {tok.value!r} is outside the exponent vocabulary "
                    f"(r, t<i>, p<i>, w<i>)",
                    tok.line, tok.col,
                )
            coeff = Fraction(1)
            if self.peek().kind == "SLASH":
                self.advance()
                denom = self.expect("NUMBER")
                if denom.value == 0:
                    raise ParseError("division by zero", denom.line, denom.col)
                coeff = Fraction(1) / denom.value
            return ScalarExpr.variable(str(tok.value), coeff)
        if tok.kind == "NUMBER":
            self.advance()
            value = tok.value
            if self.peek().kind == "SLASH":
                self.advance()
                denom = self.expect("NUMBER")
                if denom.value == 0:
                    raise ParseError("division by zero", denom.line, denom.col)
                value = value / denom.value
            return ScalarExpr.number(value)
        raise ParseError(
            f"expected a name or number in exponent, found {tok.kind}",
            tok.line, tok.col,
        )


def parse(src: str) -> Union[OperatorWord, ChainInequality]:
    """Parse a word or (with a relation token) a chain inequality."""
    return _Parser(tokenize(src)).parse_top()


def parse_word(src: str) -> OperatorWord:
    out = parse(src)
    if isinstance(out, ChainInequality):
        raise ParseError("expected a word, found a chain inequality", 1, 1)
    return out


def parse_lines(text: str) -> list[ChainInequality]:
    """One inequality per line; blank lines and '#' comments are skipped."""
    chains_out = []
    for ln, raw in enumerate(text.splitlines(), 1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        out = parse(stripped)
        if not isinstance(out, ChainInequality):
            raise ParseError("expected an inequality on this line", ln, 1)
        chains_out.append(out)
    return chains_out


def _factor_text(word: OperatorWord) -> str:
    text = pretty_print(word)
    if isinstance(word, Product):
        return f"({text})"
    return text


def pretty_print(obj) -> str:
    """Canonical text for a word or chain; parsing it back yields a
    structurally equal AST."""
    if isinstance(obj, ChainInequality):
        return f"{pretty_print(obj.lhs)} {obj.direction.value} {pretty_print(obj.rhs)}"
    if isinstance(obj, Symbol):
        if obj.exponent == ONE:
            return f"A{obj.index}"
        return f"A{obj.index}^{{{obj.exponent.render()}}}"
    if isinstance(obj, Product):
        return " ".join(_factor_text(f) for f in obj.factors)
    if isinstance(obj, Power):
        return f"({pretty_print(obj.base)})^{{{obj.exponent.render()}}}"
    raise TypeError(f"not a printable node: {obj!r}")


@dataclass(frozen=True)
class Environment:
    """Immutable binding of scalar names and matrix symbols.

    All bound matrices must share one dimension; any name or index a word
    mentions must be bound before evaluation.
    """

    scalars: Mapping[str, float]
    matrices: Mapping[int, HermitianMatrix]

    def __post_init__(self):
        object.__setattr__(self, "scalars", MappingProxyType(dict(self.scalars)))
        object.__setattr__(self, "matrices", MappingProxyType(dict(self.matrices)))
        dims = {m.dim for m in self.matrices.values()}
        if len(dims) > 1:
            raise ValueError(f"bound matrices disagree on dimension: {sorted(dims)}")

    @property
    def dim(self) -> int:
        if not self.matrices:
            raise ValueError("environment binds no matrices")
        return next(iter(self.matrices.values())).dim

    def matrix(self, index: int) -> HermitianMatrix:
        try:
            return self.matrices[index]
        except KeyError:
            raise UnboundNameError(f"matrix symbol A{index} is not bound") from None

    def scalar_value(self, expr: ScalarExpr) -> float:
        try:
            return expr.evaluate(self.scalars)
        except KeyError as exc:
            raise UnboundNameError(f"scalar name {exc.args[0]!r} is not bound") from None


def _coerce_hermitian(arr: np.ndarray, what: str) -> HermitianMatrix:
    scale = max(1.0, float(np.linalg.norm(arr)))
    resid = float(np.linalg.norm(arr - arr.conj().T))
    if resid > HERMITIZE_RTOL * scale:
        raise NonHermitianResultError(
            f"{what} is not Hermitian (residual {resid:.3e} at scale {scale:.3e}); "
            f"only palindromic sandwich words evaluate to Hermitian matrices"
        )
    return HermitianMatrix(0.5 * (arr + arr.conj().T))


def _eval_raw(word: OperatorWord, env: Environment) -> np.ndarray:
    if isinstance(word, Symbol):
        base = env.matrix(word.index)
        return matrix_power(base, env.scalar_value(word.exponent)).entries
    if isinstance(word, Product):
        return reduce(np.matmul, (_eval_raw(f, env) for f in word.factors))
    if isinstance(word, Power):
        inner = _coerce_hermitian(_eval_raw(word.base, env), "power base")
        return matrix_power(inner, env.scalar_value(word.exponent)).entries
    raise TypeError(f"not an evaluable node: {word!r}")


def evaluate(word: OperatorWord, env: Environment) -> HermitianMatrix:
    """Evaluate a word against an environment.

    Products multiply left to right; powers go through the spectral
    calculus of the coerced Hermitian base and so require strictly positive
    intermediates for fractional or negative exponents.
    """
    return _coerce_hermitian(_eval_raw(word, env), "word value")
