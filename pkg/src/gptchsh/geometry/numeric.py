"""Scalar handling shared by the exact (rational) and approximate (float) paths."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

EXACT = "exact"
APPROX = "approx"
DEFAULT_TOL = 1e-9


def check_mode(mode: str) -> str:
    if mode not in (EXACT, APPROX):
        raise ValueError(f"mode must be 'exact' or 'approx', got {mode!r}")
    return mode


def to_fraction(x) -> Fraction:
    """Convert ints, Fractions, numpy integers and "p/q" strings losslessly.

    Floats are converted exactly (binary expansion), which is what the
    random samplers want; callers who need short rationals pass strings.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


def format_scalar(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.10g}"


def exact_array(values) -> np.ndarray:
    """Object array of Fractions with the same shape as ``values``."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_fraction(v)
    return out


def as_array(values, mode: str) -> np.ndarray:
    if mode == EXACT:
        return exact_array(values)
    return np.asarray(values, dtype=float)


def lcm(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


def integer_row(row: Sequence) -> list[int]:
    """Positive multiple of a rational vector with coprime integer entries."""
    fr = [to_fraction(v) for v in row]
    m = lcm(f.denominator for f in fr)
    ints = [int(f * m) for f in fr]
    g = math.gcd(*ints) if ints else 0
    if g > 1:
        ints = [v // g for v in ints]
    return ints


def primitive(vec: Sequence[int]) -> list[int]:
    g = math.gcd(*vec) if len(vec) else 0
    if g > 1:
        return [v // g for v in vec]
    return list(vec)


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form over the rationals.

    Returns ``(matrix, pivot_columns)``.
    """
    mat = [[to_fraction(v) for v in r] for r in rows]
    if ncols is None:
        ncols = len(mat[0]) if mat else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
        if p is None:
            continue
        mat[r], mat[p] = mat[p], mat[r]
        piv = mat[r][c]
        mat[r] = [v / piv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return mat[:r], pivots


def rank_exact(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    if len(rows) == 0:
        return 0
    return len(rref(rows, ncols)[1])


def nullspace_exact(rows: Sequence[Sequence], ncols: int) -> list[list[int]]:
    """Integer basis of {x : rows @ x = 0}."""
    if len(rows) == 0:
        return [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * ncols
        vec[f] = Fraction(1)
        for row, p in zip(red, pivots):
            vec[p] = -row[f]
        basis.append(integer_row(vec))
    return basis


def rank_approx(mat, tol: float = DEFAULT_TOL) -> int:
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if mat.size == 0:
        return 0
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def nullspace_approx(mat, ncols: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as rows) of the null space of ``mat``."""
    mat = np.asarray(mat, dtype=float).reshape(-1, ncols)
    if mat.shape[0] == 0:
        return np.eye(ncols)
    _, s, vt = np.linalg.svd(mat)
    rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
    return vt[rank:]
