"""Explicit and implicit Euler finite volume schemes on the cell graph.

With cell averages ``U(n)`` and the combinatorial cell Laplacian ``L`` the
schemes are

    explicit:  U(n+1) = (I - h c L) U(n)
    implicit:  (I + h c L) U(n) = U(n-1)

with ``c = (d/2)(d+2)^m``.  This is the flux form
``(h / mu(C)) r^-m (d/2) sum_l (u_L - u_J)`` with ``mu(C) = d^-m`` and
``r = d/(d+2)``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from .errors import CFLViolationError, ConvergenceError, NonFiniteError, SizeBudgetError
from .graphs import BOUNDARY_MODES, DEFAULT_GHOST_INCREMENT, CellLaplacian, cell_laplacian
from .simplex import cell_corner_coords, check_word, vertex_coords
from .spectral import DENSE_BUDGET, cfl_admissible, cfl_max_h

log = logging.getLogger(__name__)

SCHEMES = ("explicit", "implicit")
CFL_POLICIES = ("enforce", "warn", "ignore")
FIGURE_STEPS = (0, 10, 100, 500)


def scheme_coefficient(d: int, m: int) -> float:
    """``c(d, m) = (d/2) (d+2)^m``, the flux coefficient per unit time."""
    return d / 2 * (d + 2) ** m


def default_snapshots(N: int) -> tuple[int, ...]:
    return tuple(sorted({k for k in FIGURE_STEPS if k <= N} | {N}))


@dataclass(frozen=True)
class SchemeConfig:
    T: float
    N: int
    scheme: str = "explicit"
    boundary_mode: str = "dirichlet-ghost"
    cfl_policy: str = "enforce"
    snapshot_steps: tuple[int, ...] | None = None
    cg_tolerance: float = 1e-10
    cg_max_iterations: int | None = None
    ghost_increment: float = DEFAULT_GHOST_INCREMENT

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not self.T > 0 or not math.isfinite(self.T):
            raise ValueError(f"T must be positive and finite, got {self.T!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ValueError(f"boundary_mode must be one of {BOUNDARY_MODES}, got {self.boundary_mode!r}")
        if self.cfl_policy not in CFL_POLICIES:
            raise ValueError(f"cfl_policy must be one of {CFL_POLICIES}, got {self.cfl_policy!r}")
        if not self.cg_tolerance > 0:
            raise ValueError("cg_tolerance must be positive")
        steps = default_snapshots(self.N) if self.snapshot_steps is None else tuple(sorted(set(self.snapshot_steps)))
        if any(s < 0 or s > self.N for s in steps):
            raise ValueError(f"snapshot steps must lie in [0, {self.N}], got {steps}")
        object.__setattr__(self, "snapshot_steps", steps)

    @property
    def h(self) -> float:
        return self.T / self.N

    @property
    def h_exact(self) -> Fraction:
        return Fraction(self.T) / self.N


@dataclass(frozen=True)
class SchemeMatrix:
    """``A = I - h c L`` (explicit) or ``A~ = I + h c L`` (implicit), kept as ``L`` plus scalars."""

    laplacian: CellLaplacian
    h: float
    scheme: str = "explicit"

    @property
    def d(self) -> int:
        return self.laplacian.d

    @property
    def m(self) -> int:
        return self.laplacian.m

    @property
    def coefficient(self) -> float:
        return scheme_coefficient(self.d, self.m)

    @property
    def hc(self) -> float:
        return self.h * self.coefficient

    @property
    def n_cells(self) -> int:
        return self.laplacian.n_cells

    @cached_property
    def _operator(self) -> sp.csr_matrix:
        sign = -1.0 if self.scheme == "explicit" else 1.0
        return (sp.identity(self.n_cells, format="csr") + sign * self.hc * self.laplacian.matrix).tocsr()

    def operator(self) -> sp.csr_matrix:
        return self._operator

    def dense(self) -> np.ndarray:
        if self.n_cells > DENSE_BUDGET:
            raise SizeBudgetError(f"refusing to densify a {self.n_cells}-cell operator (budget {DENSE_BUDGET})")
        return self.operator().toarray()


def assemble(d: int, m: int, config: SchemeConfig, laplacian: CellLaplacian | None = None) -> SchemeMatrix:
    if laplacian is None:
        laplacian = cell_laplacian(d, m, config.boundary_mode, config.ghost_increment)
    elif (laplacian.d, laplacian.m) != (d, m):
        raise ValueError(f"laplacian is for d={laplacian.d}, m={laplacian.m}, not d={d}, m={m}")
    if config.scheme == "explicit" and not cfl_admissible(d, m, config.h_exact):
        bound = cfl_max_h(d, m)
        if config.cfl_policy == "enforce":
            raise CFLViolationError(config.h, bound, d, m)
        if config.cfl_policy == "warn":
            warnings.warn(str(CFLViolationError(config.h, bound, d, m)), RuntimeWarning, stacklevel=2)
    return SchemeMatrix(laplacian, config.h, config.scheme)


# ---------------------------------------------------------------------------
# Initial conditions


@dataclass(frozen=True)
class InitialCondition:
    """Initial data description.

    ``spike``: 1 on ``cell``, 0 elsewhere.
    ``vertex-spline``: the harmonic spline equal to 1 at ``F_word(P_corner)`` and 0
    at the other vertices of level ``spline_level`` (default: the solver level),
    averaged over each cell by the mean of its corner values.
    ``custom``: explicit per-cell values.
    """

    kind: str
    cell: int | None = None
    word: tuple[int, ...] = ()
    corner: int = 0
    spline_level: int | None = None
    values: tuple[float, ...] | None = None

    @classmethod
    def spike(cls, cell: int) -> "InitialCondition":
        return cls("spike", cell=cell)

    @classmethod
    def vertex_spline(cls, word: Sequence[int], corner: int, spline_level: int | None = None) -> "InitialCondition":
        return cls("vertex-spline", word=tuple(word), corner=corner, spline_level=spline_level)

    @classmethod
    def custom(cls, values) -> "InitialCondition":
        return cls("custom", values=tuple(float(v) for v in values))

    @classmethod
    def from_file(cls, path) -> "InitialCondition":
        return cls.custom(read_values(path))

    @classmethod
    def parse(cls, text: str) -> "InitialCondition":
        """Parse ``spike:<cell>``, ``spline:<word>:<corner>[@<level>]`` or ``custom:<path>``."""
        kind, _, rest = text.partition(":")
        if kind == "spike":
            return cls.spike(int(rest))
        if kind in ("spline", "vertex-spline"):
            body, _, level = rest.partition("@")
            word, _, corner = body.partition(":")
            if not corner:
                raise ValueError(f"vertex spline needs <word>:<corner>, got {text!r}")
            letters = tuple(int(c) for c in word) if word not in ("", "-") else ()
            return cls.vertex_spline(letters, int(corner), int(level) if level else None)
        if kind == "custom":
            return cls.from_file(rest)
        raise ValueError(f"unknown initial condition {text!r}")

    def describe(self) -> str:
        if self.kind == "spike":
            return f"spike:{self.cell}"
        if self.kind == "vertex-spline":
            word = "".join(map(str, self.word)) or "-"
            level = f"@{self.spline_level}" if self.spline_level is not None else ""
            return f"spline:{word}:{self.corner}{level}"
        return f"custom[{len(self.values)}]"


def read_values(path) -> list[float]:
    """Per-cell values: one number per line, or CSV with a ``value`` column."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        return []
    try:
        float(lines[0].split(",")[0])
    except ValueError:
        header = [c.strip() for c in lines[0].split(",")]
        if "value" not in header:
            raise ValueError(f"{path}: CSV header has no 'value' column")
        col = header.index("value")
        return [float(ln.split(",")[col]) for ln in lines[1:]]
    return [float(ln) for ln in lines]


def harmonic_corner_values(d: int, m: int, word: Sequence[int], corner: int,
                           spline_level: int) -> np.ndarray:
    """Corner values, shape ``(d**m, d)``, of the level-``spline_level`` harmonic spline.

    Refinement uses the harmonic extension rule on the simplex: the new vertex
    between corners ``i`` and ``j`` of a cell gets ``(a_i + a_j + sum(a)) / (d + 2)``.
    """
    if not 0 <= spline_level <= m:
        raise ValueError(f"spline level {spline_level} must lie in 0..{m}")
    target = np.array(vertex_coords(d, word, corner, spline_level))
    vals = np.all(cell_corner_coords(d, spline_level) == target, axis=2).astype(float)
    if not vals.any():
        raise ValueError("vertex not found among cell corners")
    for _ in range(spline_level, m):
        total = vals.sum(axis=1)
        # child i, corner j: (a_i + a_j + S)/(d+2); corner i of child i stays a_i
        child = (vals[:, :, None] + vals[:, None, :] + total[:, None, None]) / (d + 2)
        idx = np.arange(d)
        child[:, idx, idx] = vals
        vals = child.reshape(-1, d)
    return vals


def initial_state(spec, d: int, m: int) -> np.ndarray:
    n = d**m
    if isinstance(spec, str):
        spec = InitialCondition.parse(spec)
    if not isinstance(spec, InitialCondition):
        u = np.asarray(spec, dtype=float)
        if u.shape != (n,):
            raise ValueError(f"initial vector has shape {u.shape}, expected ({n},)")
        return u.copy()
    if spec.kind == "spike":
        if not 0 <= spec.cell < n:
            raise IndexError(f"spike cell {spec.cell} out of range 0..{n - 1}")
        u = np.zeros(n)
        u[spec.cell] = 1.0
        return u
    if spec.kind == "vertex-spline":
        check_word(d, spec.word)
        level = m if spec.spline_level is None else spec.spline_level
        return harmonic_corner_values(d, m, spec.word, spec.corner, level).mean(axis=1)
    if spec.kind == "custom":
        if len(spec.values) != n:
            raise ValueError(f"custom initial data has {len(spec.values)} values, expected {n}")
        return np.array(spec.values, dtype=float)
    raise ValueError(f"unknown initial condition kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# Time stepping


def _check_finite(u, step):
    if not np.all(np.isfinite(u)):
        raise NonFiniteError(f"non-finite values in state at step {step}", step=step)


def step_explicit(M: SchemeMatrix, u: np.ndarray, step: int | None = None) -> np.ndarray:
    if u.shape != (M.n_cells,):
        raise ValueError(f"state has shape {u.shape}, expected ({M.n_cells},)")
    _check_finite(u, step)
    return u - M.hc * (M.laplacian.matrix @ u)


def solve_implicit(M: SchemeMatrix, u: np.ndarray, tol: float = 1e-10,
                   max_iterations: int | None = None, step: int | None = None):
    """Solve ``(I + h c L) v = u`` by conjugate gradients.

    Returns ``(v, iterations, relative_residual)``.  The right-hand side is
    scaled to unit max-norm first so the relative stopping test stays
    meaningful for states decaying towards the underflow range.
    """
    if u.shape != (M.n_cells,):
        raise ValueError(f"state has shape {u.shape}, expected ({M.n_cells},)")
    _check_finite(u, step)
    scale = np.max(np.abs(u)) if u.size else 0.0
    if scale == 0.0:
        return np.zeros_like(u), 0, 0.0
    if max_iterations is None:
        max_iterations = 10 * M.n_cells
    A = M.operator()
    b = u / scale
    count = 0

    def _count(_):
        nonlocal count
        count += 1

    x, info = cg(A, b, x0=b, rtol=tol, atol=0.0, maxiter=max_iterations, callback=_count)
    residual = float(np.linalg.norm(b - A @ x) / np.linalg.norm(b))
    if info != 0:
        raise ConvergenceError(
            f"conjugate gradient stopped after {count} iterations with relative residual {residual:.3e}"
            + (f" at step {step}" if step is not None else ""),
            residual=residual, iterations=count, step=step,
        )
    return x * scale, count, residual


def step_implicit(M: SchemeMatrix, u: np.ndarray, tol: float = 1e-10,
                  max_iterations: int | None = None, step: int | None = None) -> np.ndarray:
    return solve_implicit(M, u, tol, max_iterations, step)[0]


@dataclass
class StateSeries:
    d: int
    m: int
    h: float
    scheme: str
    steps: list[int] = field(default_factory=list)
    times: list[float] = field(default_factory=list)
    values: list[np.ndarray] = field(default_factory=list)
    masses: list[float] = field(default_factory=list)
    norm_2_inf: float = 0.0  # running max over every step, not only snapshots
    cg_iterations: int = 0
    trajectory: list[np.ndarray] | None = None
    completed_steps: int = 0

    @property
    def max_norms(self) -> list[float]:
        return [float(np.max(np.abs(v))) if v.size else 0.0 for v in self.values]

    def record(self, n: int, u: np.ndarray) -> None:
        self.steps.append(n)
        self.times.append(n * self.h)
        self.values.append(u.copy())
        self.masses.append(float(u.sum()) / self.d**self.m)


def scaled_l2(u: np.ndarray, d: int, m: int) -> float:
    return float(np.sqrt(np.dot(u, u) / d**m))


def run(config: SchemeConfig, initial, d: int, m: int, laplacian: CellLaplacian | None = None,
        keep_trajectory: bool = False) -> StateSeries:
    """Advance ``N`` steps from the initial data, recording the configured snapshots.

    On a step failure the raised error carries the partial series as ``.series``.
    """
    M = assemble(d, m, config, laplacian)
    u = initial_state(initial, d, m)
    snaps = set(config.snapshot_steps)
    series = StateSeries(d, m, config.h, config.scheme)
    if keep_trajectory:
        series.trajectory = [u.copy()]
    _check_finite(u, 0)
    series.norm_2_inf = scaled_l2(u, d, m)
    if 0 in snaps:
        series.record(0, u)
    L = M.laplacian.matrix
    hc = M.hc
    # overflow is reported through the finiteness check, not numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, config.N + 1):
            try:
                if config.scheme == "explicit":
                    u = u - hc * (L @ u)
                else:
                    u, its, _ = solve_implicit(M, u, config.cg_tolerance, config.cg_max_iterations, step=n)
                    series.cg_iterations += its
                _check_finite(u, n)
            except (NonFiniteError, ConvergenceError) as exc:
                exc.series = series
                log.error("run aborted at step %d: %s", n, exc)
                raise
            series.completed_steps = n
            series.norm_2_inf = max(series.norm_2_inf, scaled_l2(u, d, m))
            if keep_trajectory:
                series.trajectory.append(u.copy())
            if n in snaps:
                series.record(n, u)
    return series
