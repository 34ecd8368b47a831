"""Combinatorics of the nested power-sandwich inequality families.

For k strictly positive operators A_1 .. A_k (k = 2n or 2n+1) the
hypothesis set consists of k - 1 inequalities between a single power of an
outer operator and a nested sandwich word.  The ascending family saturates
layer indices upward at k; the descending family walks indices down and
floors them at 1.  This module builds those words symbolically; numeric
evaluation lives in the DSL and the verifier.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Union


class Family(Enum):
    ASCENDING = "ascending"
    DESCENDING = "descending"


class Direction(Enum):
    GE = ">="
    LE = "<="


@dataclass(frozen=True)
class ScalarExpr:
    """Rational linear form over parameter names plus a constant.

    The closed vocabulary is {t1..tn, p1..p2n, r, w1..w(k-1)} with division
    by literals only; that is exactly the set of exponent shapes the chain
    words use, so no general symbolic algebra is needed.
    """

    terms: tuple[tuple[str, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def variable(name: str, coeff=1) -> "ScalarExpr":
        c = Fraction(coeff)
        if c == 0:
            return ScalarExpr()
        return ScalarExpr(terms=((name, c),))

    @staticmethod
    def number(value) -> "ScalarExpr":
        return ScalarExpr(const=Fraction(value))

    def __post_init__(self):
        merged: dict[str, Fraction] = {}
        for name, coeff in self.terms:
            merged[name] = merged.get(name, Fraction(0)) + Fraction(coeff)
        normal = tuple(sorted((n, c) for n, c in merged.items() if c != 0))
        object.__setattr__(self, "terms", normal)
        object.__setattr__(self, "const", Fraction(self.const))

    def __add__(self, other: "ScalarExpr") -> "ScalarExpr":
        return ScalarExpr(terms=self.terms + other.terms, const=self.const + other.const)

    def __sub__(self, other: "ScalarExpr") -> "ScalarExpr":
        return self + (-other)

    def __neg__(self) -> "ScalarExpr":
        return ScalarExpr(
            terms=tuple((n, -c) for n, c in self.terms), const=-self.const
        )

    def free_names(self) -> frozenset[str]:
        return frozenset(n for n, _ in self.terms)

    def evaluate(self, bindings) -> float:
        total = float(self.const)
        for name, coeff in self.terms:
            total += float(coeff) * float(bindings[name])
        return total

    def render(self) -> str:
        """Canonical text form, e.g. ``-t1/2``, ``r-t2``, ``1/2``."""
        pieces: list[str] = []
        for name, coeff in self.terms:
            if abs(coeff.numerator) != 1:
                raise ValueError(f"coefficient {coeff} of {name} has no textual form")
            body = name if coeff.denominator == 1 else f"{name}/{coeff.denominator}"
            pieces.append(("-" if coeff < 0 else "+") + body)
        if self.const != 0 or not pieces:
            c = self.const
            body = str(abs(c.numerator)) if c.denominator == 1 else \
                f"{abs(c.numerator)}/{c.denominator}"
            pieces.append(("-" if c < 0 else "+") + body)
        text = pieces[0].lstrip("+") + "".join(pieces[1:])
        return text


ONE = ScalarExpr.number(1)


@dataclass(frozen=True)
class Symbol:
    """A_i raised to a scalar-expression exponent."""

    index: int
    exponent: ScalarExpr = ONE

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"symbol index must be >= 1, got {self.index}")


@dataclass(frozen=True)
class Product:
    factors: tuple["OperatorWord", ...]

    def __post_init__(self):
        if len(self.factors) < 2:
            raise ValueError("a product needs at least two factors")


@dataclass(frozen=True)
class Power:
    base: "OperatorWord"
    exponent: ScalarExpr


OperatorWord = Union[Symbol, Product, Power]


@dataclass(frozen=True)
class ChainInequality:
    """One member of a hypothesis family: lhs <rel> rhs.

    family/member are None for inequalities recovered from parsed text,
    where the provenance is unknown.
    """

    family: Family | None
    member: int | None
    lhs: OperatorWord
    rhs: OperatorWord
    direction: Direction


@dataclass(frozen=True)
class ParamSet:
    """Scalar parameters of a size-k chain: n, k, t_1..t_n, p_1..p_2n, r,
    w_1..w_(k-1), with the range constraints checked at construction."""

    n: int
    k: int
    t: tuple[float, ...]
    p: tuple[float, ...]
    r: float
    w: tuple[float, ...]

    def __post_init__(self):
        n, k = self.n, self.k
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if k not in (2 * n, 2 * n + 1):
            raise ValueError(f"k must be 2n or 2n+1 for n={n}, got {k}")
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        object.__setattr__(self, "w", tuple(float(v) for v in self.w))
        if len(self.t) != n:
            raise ValueError(f"expected {n} t-values, got {len(self.t)}")
        if len(self.p) != 2 * n:
            raise ValueError(f"expected {2 * n} p-values, got {len(self.p)}")
        if len(self.w) != k - 1:
            raise ValueError(f"expected {k - 1} w-values, got {len(self.w)}")
        if any(not 0.0 <= v <= 1.0 for v in self.t):
            raise ValueError(f"every t must lie in [0, 1], got {self.t}")
        if any(v < 1.0 for v in self.p):
            raise ValueError(f"every p must be >= 1, got {self.p}")
        if any(not 0.0 <= v <= 1.0 for v in self.w):
            raise ValueError(f"every w must lie in [0, 1], got {self.w}")
        if not self.r > self.t[-1]:
            raise ValueError(f"r must exceed t_n = {self.t[-1]}, got r = {self.r}")


def chain_exponent(t, p) -> float:
    """Aggregate exponent of the fully nested chain word.

    Defined by the recurrence b_0 = 1, b_j = (b_(j-1) * p_(2j-1) - t_j) *
    p_(2j) + t_j, returning b_n.  Computed in exact rational arithmetic so
    the all-ones telescoping case returns exactly 1.0.
    """
    t = tuple(t)
    p = tuple(p)
    if len(p) != 2 * len(t):
        raise ValueError(f"need twice as many p as t values, got {len(p)} and {len(t)}")
    if any(not 0.0 <= float(v) <= 1.0 for v in t):
        raise ValueError(f"every t must lie in [0, 1], got {t}")
    if any(float(v) < 1.0 for v in p):
        raise ValueError(f"every p must be >= 1, got {p}")
    b = Fraction(1)
    for j, tj in enumerate(t):
        tf = Fraction(tj)
        b = (b * Fraction(p[2 * j]) - tf) * Fraction(p[2 * j + 1]) + tf
    return float(b)


def necessity_weight_from(t, p, r: float) -> float:
    """Weight (r - t_n) / (psi - t_n + r) at which the hypothesis family is
    expected to be equivalent to the operator order."""
    t = tuple(t)
    psi = chain_exponent(t, p)
    t_n = float(t[-1])
    if not r > t_n:
        raise ValueError(f"r must exceed t_n = {t_n}, got r = {r}")
    denom = psi - t_n + r
    if denom <= 0.0:
        # unreachable when p >= 1 and t in [0, 1]; guarded anyway
        raise ValueError(f"degenerate weight denominator {denom}")
    return (r - t_n) / denom


def necessity_weight(params: ParamSet) -> float:
    return necessity_weight_from(params.t, params.p, params.r)


def ascending_index(member: int, layer: int, k: int) -> int:
    """Operator index at ``layer`` of ascending member ``member``; layer 0
    is the innermost base symbol.  Indices saturate at k."""
    n = k // 2
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if not 1 <= member <= n:
        raise ValueError(f"ascending member must be in 1..{n}, got {member}")
    if not 0 <= layer <= 2 * n - 1:
        raise ValueError(f"layer must be in 0..{2 * n - 1}, got {layer}")
    return min(member + layer, k)


def descending_index(member: int, layer: int, k: int) -> int:
    """Operator index at ``layer`` of descending member ``member``; the
    innermost base sits at n+1+member and indices floor at 1."""
    n = k // 2
    q_max = n if k == 2 * n + 1 else n - 1
    if not 1 <= member <= q_max:
        raise ValueError(f"descending member must be in 1..{q_max}, got {member}")
    if not 0 <= layer <= 2 * n - 1:
        raise ValueError(f"layer must be in 0..{2 * n - 1}, got {layer}")
    return max(n + 1 + member - layer, 1)


def layer_exponent(layer: int, n: int) -> ScalarExpr:
    """Alternating exponent schedule: odd layers carry -t_i/2, even layers
    +t_i/2, with i stepping up every other layer."""
    if not 1 <= layer <= 2 * n - 1:
        raise ValueError(f"layer must be in 1..{2 * n - 1}, got {layer}")
    if layer % 2:
        i = (layer + 1) // 2
        return ScalarExpr.variable(f"t{i}", Fraction(-1, 2))
    i = layer // 2
    return ScalarExpr.variable(f"t{i}", Fraction(1, 2))


def weight_index(family: Family, member: int, n: int) -> int:
    """Position of the member's weight: ascending members use w_member,
    descending members continue the numbering at w_(n+member)."""
    return member if family is Family.ASCENDING else n + member


def build_chain(family: Family, member: int, params: ParamSet) -> ChainInequality:
    """Construct one hypothesis inequality as a symbolic word pair.

    The core starts as the base symbol to the p1, then gains one sandwich
    layer per step, each raised to the next p; the outer sandwich uses
    r/2 and is raised to the member's weight.
    """
    n, k = params.n, params.k
    if family is Family.ASCENDING:
        index_at = lambda j: ascending_index(member, j, k)
        outer = k
        direction = Direction.GE
    else:
        index_at = lambda j: descending_index(member, j, k)
        outer = 1
        direction = Direction.LE

    core: OperatorWord = Symbol(index_at(0), ScalarExpr.variable("p1"))
    for j in range(1, 2 * n):
        wrap = Symbol(index_at(j), layer_exponent(j, n))
        core = Power(
            Product((wrap, core, wrap)), ScalarExpr.variable(f"p{j + 1}")
        )
    r_half = ScalarExpr.variable("r", Fraction(1, 2))
    outer_sym = Symbol(outer, r_half)
    w_name = f"w{weight_index(family, member, n)}"
    rhs = Power(Product((outer_sym, core, outer_sym)), ScalarExpr.variable(w_name))
    lhs = Symbol(outer, ScalarExpr.variable("r") - ScalarExpr.variable(f"t{n}"))
    return ChainInequality(family, member, lhs, rhs, direction)


def hypothesis_set(params: ParamSet) -> list[ChainInequality]:
    """All hypothesis inequalities for the chain: n ascending members plus
    n descending for odd k, n - 1 descending for even k."""
    n, k = params.n, params.k
    members = [build_chain(Family.ASCENDING, m, params) for m in range(1, n + 1)]
    q_max = n if k == 2 * n + 1 else n - 1
    members += [build_chain(Family.DESCENDING, q, params) for q in range(1, q_max + 1)]
    return members


def hypothesis_core(chain: ChainInequality) -> OperatorWord:
    """The bracketed word between the outer r/2 sandwich factors of a
    built chain (outermost nested power included)."""
    rhs = chain.rhs
    if not isinstance(rhs, Power) or not isinstance(rhs.base, Product) \
            or len(rhs.base.factors) != 3:
        raise ValueError("not a sandwich-shaped chain right-hand side")
    return rhs.base.factors[1]


def placeholder_params(k: int, t=None, r: float | None = None) -> ParamSet:
    """A valid ParamSet for purely structural uses (printing, word shape);
    p and w values are irrelevant placeholders."""
    n = k // 2
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    tv = tuple(t) if t is not None else (0.5,) * n
    rv = float(r) if r is not None else float(tv[-1]) + 1.0
    return ParamSet(n=n, k=k, t=tv, p=(1.0,) * (2 * n), r=rv, w=(0.5,) * (k - 1))
