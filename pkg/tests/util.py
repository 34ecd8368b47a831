"""Shared test helpers: independent scalar oracles and seeded generators.

The scalar word evaluator here is deliberately a separate implementation
from the package's evaluator: on diagonal matrices every operation acts
entrywise, so it serves as the oracle for the matrix path.
"""
from __future__ import annotations

import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from oporder.chains import Power, Product, ScalarExpr, Symbol

REPO_ROOT = Path(__file__).resolve().parents[1]
GOLDEN_DIR = REPO_ROOT / "golden" / "v1"

_NAMES = ("r", "t1", "t2", "t3", "p1", "p2", "p3", "p4", "w1", "w2")
_COEFFS = (Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(-1, 2), Fraction(1, 3))
_NUMBERS = (Fraction(0), Fraction(1), Fraction(2), Fraction(1, 2), Fraction(3, 4))


def random_scalar_expr(rng: np.random.Generator) -> ScalarExpr:
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return ScalarExpr.number(_NUMBERS[rng.integers(0, len(_NUMBERS))])
    name = _NAMES[rng.integers(0, len(_NAMES))]
    coeff = _COEFFS[rng.integers(0, len(_COEFFS))]
    expr = ScalarExpr.variable(name, coeff)
    if kind == 2:
        # distinct second name keeps every coefficient renderable
        other = _NAMES[rng.integers(0, len(_NAMES))]
        if other != name:
            expr = expr + ScalarExpr.variable(other, _COEFFS[rng.integers(0, len(_COEFFS))])
    elif kind == 3:
        expr = expr - ScalarExpr.number(_NUMBERS[rng.integers(0, len(_NUMBERS))])
    return expr


def random_word(rng: np.random.Generator, depth: int = 0):
    roll = int(rng.integers(0, 6))
    if depth >= 3 or roll <= 2:
        return Symbol(int(rng.integers(1, 6)), random_scalar_expr(rng))
    if roll <= 4:
        count = int(rng.integers(2, 4))
        return Product(tuple(random_word(rng, depth + 1) for _ in range(count)))
    return Power(random_word(rng, depth + 1), random_scalar_expr(rng))


def scalar_word_value(word, scalars: dict, diag: dict) -> tuple:
    """Entrywise evaluation on diagonal matrices, independent of the
    package evaluator; diag maps symbol index -> tuple of diagonal entries."""
    if isinstance(word, Symbol):
        e = word.exponent.evaluate(scalars)
        return tuple(v ** e for v in diag[word.index])
    if isinstance(word, Product):
        columns = zip(*(scalar_word_value(f, scalars, diag) for f in word.factors))
        return tuple(math.prod(col) for col in columns)
    if isinstance(word, Power):
        e = word.exponent.evaluate(scalars)
        return tuple(v ** e for v in scalar_word_value(word.base, scalars, diag))
    raise TypeError(f"unexpected node {word!r}")


def random_spd_array(rng: np.random.Generator, dim: int, ridge: float = 0.1) -> np.ndarray:
    g = rng.standard_normal((dim, dim))
    a = g.T @ g + ridge * np.eye(dim)
    return 0.5 * (a + a.T)


def ordered_pair_arrays(rng: np.random.Generator, dim: int):
    """(P, Q) with P >= Q >= 0 by construction."""
    q = random_spd_array(rng, dim)
    h = rng.standard_normal((dim, dim))
    p = q + h.T @ h
    return 0.5 * (p + p.T), q


def power_iteration_norm(arr: np.ndarray, iterations: int = 2000) -> float:
    """Independent spectral-norm oracle for symmetric input."""
    rng = np.random.default_rng(0)
    v = rng.standard_normal(arr.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iterations):
        w = arr @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam = norm
    return float(lam)
