"""Geometry of the Sierpinski simplex: contractions, cell words, measure.

Cells are addressed by words over the alphabet ``1..d``.  A word ``w`` of
length ``m`` names the cell ``F_w(K) = f_{w[0]} o f_{w[1]} o ... o f_{w[-1]}(K)``;
the leftmost letter is the outermost map.  Words of equal length are ordered
lexicographically and that order is the row order of every matrix in the
package.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidLetterError

Word = tuple[int, ...]

INT64_MAX = np.iinfo(np.int64).max


def _regular_simplex(d: int) -> np.ndarray:
    # Unit-edge simplex: e_i / sqrt(2) in R^d, projected onto the sum-zero
    # hyperplane with an orthonormal (Helmert) basis.
    basis = np.zeros((d, d - 1))
    for k in range(1, d):
        basis[:k, k - 1] = 1.0
        basis[k, k - 1] = -k
        basis[:, k - 1] /= math.sqrt(k * (k + 1))
    pts = np.eye(d) / math.sqrt(2.0)
    pts -= pts.mean(axis=0)
    return pts @ basis


@dataclass(frozen=True)
class SimplexSpace:
    """The ``d`` fixed points ``P_0..P_{d-1}`` of the IFS, in R^(d-1)."""

    d: int
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        pts = np.asarray(self.points, dtype=float)
        if pts.shape != (self.d, self.d - 1):
            raise ValueError(f"expected {self.d} points of dimension {self.d - 1}, got shape {pts.shape}")
        if np.linalg.matrix_rank(pts[1:] - pts[0], tol=1e-12) != self.d - 1:
            raise ValueError("fixed points are affinely dependent (degenerate simplex)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def regular(cls, d: int) -> "SimplexSpace":
        if d < 2:
            raise ValueError(f"d must be >= 2, got {d}")
        return cls(d, _regular_simplex(d))

    @property
    def centroid(self) -> np.ndarray:
        return self.points.mean(axis=0)


def check_letter(d: int, i: int) -> None:
    if not 1 <= i <= d:
        raise InvalidLetterError(f"letter {i} outside alphabet 1..{d}")


def check_word(d: int, word: Sequence[int]) -> Word:
    for letter in word:
        check_letter(d, letter)
    return tuple(word)


def apply_contraction(space: SimplexSpace, i: int, x) -> np.ndarray:
    """``f_i(x) = (x + P_{i-1}) / 2``."""
    check_letter(space.d, i)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != space.d - 1:
        raise ValueError(f"point has dimension {x.shape[-1]}, expected {space.d - 1}")
    return 0.5 * (x + space.points[i - 1])


def apply_word(space: SimplexSpace, word: Sequence[int], x) -> np.ndarray:
    """Apply ``F_w``; the rightmost letter acts first."""
    word = check_word(space.d, word)
    y = np.asarray(x, dtype=float)
    for letter in reversed(word):
        y = apply_contraction(space, letter, y)
    return y


def cell_barycenter(space: SimplexSpace, word: Sequence[int]) -> np.ndarray:
    return apply_word(space, word, space.centroid)


def word_index(d: int, word: Sequence[int]) -> int:
    idx = 0
    for letter in check_word(d, word):
        idx = idx * d + (letter - 1)
    return idx


def index_word(d: int, m: int, index: int) -> Word:
    if not 0 <= index < d**m:
        raise IndexError(f"cell index {index} out of range for d={d}, m={m}")
    letters = []
    for _ in range(m):
        index, r = divmod(index, d)
        letters.append(r + 1)
    return tuple(reversed(letters))


def words(d: int, m: int) -> Iterator[Word]:
    """All words of length ``m`` in canonical (lexicographic) order."""
    return itertools.product(range(1, d + 1), repeat=m)


def word_str(word: Sequence[int]) -> str:
    # Letters above 9 would make the digit string ambiguous.
    if any(letter > 9 for letter in word):
        return ".".join(str(letter) for letter in word)
    return "".join(str(letter) for letter in word)


def vertex_count(d: int, m: int) -> int:
    """Number of vertices of the level-``m`` vertex graph, ``(d^(m+1) + d) / 2``."""
    if d < 2 or m < 0:
        raise ValueError(f"need d >= 2 and m >= 0, got d={d}, m={m}")
    n = (d ** (m + 1) + d) // 2
    if n > INT64_MAX:
        raise OverflowError(f"vertex count for d={d}, m={m} exceeds the int64 index range")
    return n


def vertex_count_recursive(d: int, m: int) -> int:
    n = d
    for _ in range(m):
        n = d * n - d * (d - 1) // 2
    return n


def cell_measure(d: int, m: int) -> Fraction:
    """Standard-measure mass of any level-``m`` cell."""
    if d < 2 or m < 0:
        raise ValueError(f"need d >= 2 and m >= 0, got d={d}, m={m}")
    return Fraction(1, d**m)


@dataclass(frozen=True)
class MeasureSpec:
    """Self-similar measure weights ``mu_i = R_i ** D_H``."""

    weights: tuple[float, ...]
    ratios: tuple[float, ...]
    hausdorff_dim: float

    def __post_init__(self):
        if len(self.weights) != len(self.ratios):
            raise ValueError("weights and ratios differ in length")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be strictly positive")
        if any(not 0 < r < 1 for r in self.ratios):
            raise ValueError("contraction ratios must lie in (0, 1)")
        if self.hausdorff_dim <= 0:
            raise ValueError("Hausdorff dimension must be positive")
        if abs(math.fsum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        for w, r in zip(self.weights, self.ratios):
            if abs(w - r**self.hausdorff_dim) > 1e-12:
                raise ValueError("weights must equal ratio ** hausdorff_dim")

    @classmethod
    def standard(cls, d: int) -> "MeasureSpec":
        return cls((1.0 / d,) * d, (0.5,) * d, math.log(d) / math.log(2))

    @classmethod
    def from_ratios(cls, ratios: Sequence[float]) -> "MeasureSpec":
        """Solve ``sum R_i^s = 1`` for the similarity dimension ``s``."""
        ratios = tuple(float(r) for r in ratios)
        if any(not 0 < r < 1 for r in ratios):
            raise ValueError("contraction ratios must lie in (0, 1)")
        if len(set(ratios)) == 1:
            dim = math.log(len(ratios)) / -math.log(ratios[0])
        else:
            dim = brentq(lambda s: math.fsum(r**s for r in ratios) - 1.0, 1e-12, 1e3, xtol=1e-15)
        weights = [r**dim for r in ratios]
        total = math.fsum(weights)
        return cls(tuple(w / total for w in weights), ratios, dim)

    @property
    def is_standard(self) -> bool:
        return len(set(self.ratios)) == 1 and self.ratios[0] == 0.5


# Exact geometry in integer barycentric coordinates.  At level m every vertex of
# V_m is a point of the standard simplex whose barycentric coordinates are
# multiples of 2^-m; scaling by 2^m makes them integer vectors.

def cell_corner_coords(d: int, m: int) -> np.ndarray:
    """Integer barycentric coordinates (scaled by ``2**m``) of all cell corners.

    Returns an array of shape ``(d**m, d, d)``: ``[cell, corner j, coordinate]``
    where corner ``j`` is ``F_w(P_j)``.
    """
    base = np.eye(d, dtype=np.int64)[None, :, :]
    for _ in range(m):
        # f_a(X) = (X + e_a)/2, scaled: 2^k X + 2^k e_a at the new scale 2^(k+1)
        # reduces to X_scaled + 2^k e_a; prefix letter a is the outermost map.
        scale = base.sum(axis=2)[0, 0]
        shift = np.eye(d, dtype=np.int64) * scale
        base = (base[None, :, :, :] + shift[:, None, None, :]).reshape(-1, d, d)
    return base


def vertex_coords(d: int, word: Sequence[int], corner: int, level: int) -> tuple[int, ...]:
    """Scaled barycentric coordinates of ``F_w(P_corner)`` at resolution ``2**level``."""
    word = check_word(d, word)
    if not 0 <= corner < d:
        raise ValueError(f"corner index {corner} outside 0..{d - 1}")
    if len(word) > level:
        raise ValueError(f"vertex of a level-{len(word)} cell is not resolved at level {level}")
    x = np.zeros(d, dtype=np.int64)
    x[corner] = 1
    for letter in reversed(word):
        scale = x.sum()
        x = x.copy()
        x[letter - 1] += scale
    return tuple(int(v) * 2 ** (level - len(word)) for v in x)
