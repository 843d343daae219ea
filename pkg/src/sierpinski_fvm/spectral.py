"""Spectral decimation, direct spectra, CFL bound and spectral radius."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, SizeBudgetError
from .graphs import CellLaplacian, cell_laplacian

DENSE_BUDGET = 4096
GROUP_TOL = 1e-8
CONFORM_TOL = 1e-8

DIRECT = "direct-eigensolver"
LIFT_MINUS = "phi-minus-lift"
LIFT_PLUS = "phi-plus-lift"


def phi(d: int, x):
    """Decimation map ``x (d + 2 - x)``."""
    return x * (d + 2 - x)


def branch_point(d: int) -> float:
    return (d + 2) ** 2 / 4


def phi_branches(d: int, x: float) -> tuple[float, float]:
    """The two preimages ``(phi-(x), phi+(x))`` of ``x`` under :func:`phi`."""
    disc = (d + 2) ** 2 - 4 * x
    if disc < 0:
        raise ValueError(f"x={x!r} exceeds the branch point (d+2)^2/4 = {branch_point(d)!r}")
    root = math.sqrt(disc)
    minus = (d + 2 - root) / 2
    # Cancellation-free form of the small root: phi-(x) = 2x / ((d+2) + root).
    if x != 0:
        minus = 2 * x / (d + 2 + root)
    return minus, (d + 2 + root) / 2


def cfl_max_h(d: int, m: int) -> float:
    """Largest explicit step with ``h (d+2)^m <= 2/d^2``."""
    if d < 2 or m < 0:
        raise ValueError(f"need d >= 2 and m >= 0, got d={d}, m={m}")
    return float(cfl_max_h_exact(d, m))


def cfl_max_h_exact(d: int, m: int) -> Fraction:
    return Fraction(2, d * d * (d + 2) ** m)


def cfl_admissible(d: int, m: int, h) -> bool:
    """Exact rational test of ``h (d+2)^m <= 2/d^2``.

    ``h`` may be a float (its exact binary value is used), an int or a
    :class:`~fractions.Fraction`.
    """
    return Fraction(h) <= cfl_max_h_exact(d, m)


@dataclass
class SpectrumReport:
    m: int
    eigenvalues: np.ndarray  # distinct values, ascending
    multiplicities: np.ndarray
    provenance: list[str]
    residuals: np.ndarray
    d: int | None = None
    boundary_mode: str | None = None

    @property
    def size(self) -> int:
        return int(self.multiplicities.sum())

    def as_dict(self) -> dict[float, int]:
        return {float(v): int(k) for v, k in zip(self.eigenvalues, self.multiplicities)}


def group_eigenvalues(values: np.ndarray, tol: float = GROUP_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Cluster sorted eigenvalues whose gaps are within ``tol``."""
    values = np.sort(np.asarray(values, dtype=float))
    if values.size == 0:
        return values, np.zeros(0, dtype=int)
    breaks = np.flatnonzero(np.diff(values) > tol) + 1
    groups = np.split(values, breaks)
    return np.array([g.mean() for g in groups]), np.array([len(g) for g in groups])


def eigenvalues(lap: CellLaplacian) -> np.ndarray:
    n = lap.n_cells
    if n > DENSE_BUDGET:
        raise SizeBudgetError(
            f"{n} cells exceeds the dense eigensolver budget of {DENSE_BUDGET}; "
            "use lifted_spectrum (decimation generation) instead"
        )
    return np.linalg.eigvalsh(lap.toarray())


def direct_spectrum(lap: CellLaplacian) -> SpectrumReport:
    vals, mult = group_eigenvalues(eigenvalues(lap))
    return SpectrumReport(lap.m, vals, mult, [DIRECT] * len(vals), np.zeros(len(vals)),
                          d=lap.d, boundary_mode=lap.boundary_mode)


def _nearest(targets: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Distance from each ``x`` to the nearest entry of ``targets``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if targets.size == 0:
        return np.full(x.shape, np.inf)
    return np.min(np.abs(x[:, None] - targets[None, :]), axis=1)


@dataclass
class DecimationReport:
    """Diagnostic comparison of ``spec(L_m)`` against ``spec(L_{m-1})``.

    ``forward_residuals[k]`` is ``dist(phi(lambda_k), spec(L_{m-1}))`` for the
    distinct level-``m`` eigenvalue ``lambda_k``; the two lift arrays hold
    ``dist(phi-(nu), spec(L_m))`` and ``dist(phi+(nu), spec(L_m))`` for each distinct
    parent eigenvalue ``nu`` (NaN above the branch point).
    """

    d: int
    m: int
    boundary_mode: str
    level: SpectrumReport
    parent: SpectrumReport
    forward_residuals: np.ndarray
    lift_minus_residuals: np.ndarray
    lift_plus_residuals: np.ndarray
    tol: float = CONFORM_TOL

    @property
    def conforming_mask(self) -> np.ndarray:
        return self.forward_residuals <= self.tol

    @property
    def conforming(self) -> dict[float, int]:
        mask = self.conforming_mask
        return {float(v): int(k) for v, k in zip(self.level.eigenvalues[mask], self.level.multiplicities[mask])}

    @property
    def exceptional(self) -> dict[float, int]:
        mask = ~self.conforming_mask
        return {float(v): int(k) for v, k in zip(self.level.eigenvalues[mask], self.level.multiplicities[mask])}

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "m": self.m,
            "boundary_mode": self.boundary_mode,
            "tol": self.tol,
            "conforming": [[v, k] for v, k in self.conforming.items()],
            "exceptional": [[v, k] for v, k in self.exceptional.items()],
            "forward_residuals": [float(r) for r in self.forward_residuals],
        }


def _lift_residuals(d, parent_vals, level_vals):
    minus = np.full(len(parent_vals), np.nan)
    plus = np.full(len(parent_vals), np.nan)
    for k, nu in enumerate(parent_vals):
        if nu <= branch_point(d):
            lo, hi = phi_branches(d, float(nu))
            minus[k], plus[k] = _nearest(level_vals, [lo, hi])
    return minus, plus


def verify_decimation(m: int, d: int, boundary_mode: str = "neumann-cells",
                      ghost_increment: float = 2, tol: float = CONFORM_TOL) -> DecimationReport:
    """Check ``lambda_{m-1} = phi(lambda_m)`` against direct spectra; reports, never asserts."""
    if m < 2:
        raise ValueError("decimation check needs m >= 2")
    level = direct_spectrum(cell_laplacian(d, m, boundary_mode, ghost_increment))
    parent = direct_spectrum(cell_laplacian(d, m - 1, boundary_mode, ghost_increment))
    forward = _nearest(parent.eigenvalues, phi(d, level.eigenvalues))
    minus, plus = _lift_residuals(d, parent.eigenvalues, level.eigenvalues)
    return DecimationReport(d, m, boundary_mode, level, parent, forward, minus, plus, tol)


def annotated_spectrum(lap: CellLaplacian, tol: float = CONFORM_TOL) -> SpectrumReport:
    """Direct spectrum with each eigenvalue tagged by the branch lift that explains it.

    An eigenvalue is ``phi-minus-lift`` (or ``phi-plus-lift``) when it lies within
    ``tol`` of ``phi-(nu)`` (``phi+(nu)``) for some eigenvalue ``nu`` of the
    level ``m-1`` Laplacian; otherwise it keeps ``direct-eigensolver`` with a
    residual of 0.
    """
    report = direct_spectrum(lap)
    if lap.m < 2:
        return report
    increment = lap.ghost_increment if lap.boundary_mode == "dirichlet-ghost" else 2
    parent = direct_spectrum(cell_laplacian(lap.d, lap.m - 1, lap.boundary_mode, increment))
    lows, highs = [], []
    for nu in parent.eigenvalues:
        if nu <= branch_point(lap.d):
            lo, hi = phi_branches(lap.d, float(nu))
            lows.append(lo)
            highs.append(hi)
    r_lo = _nearest(np.array(lows), report.eigenvalues)
    r_hi = _nearest(np.array(highs), report.eigenvalues)
    for k in range(len(report.eigenvalues)):
        if r_lo[k] <= tol and r_lo[k] <= r_hi[k]:
            report.provenance[k], report.residuals[k] = LIFT_MINUS, r_lo[k]
        elif r_hi[k] <= tol:
            report.provenance[k], report.residuals[k] = LIFT_PLUS, r_hi[k]
    return report


def lifted_spectrum(d: int, m: int, boundary_mode: str = "neumann-cells",
                    base_level: int | None = None, ghost_increment: float = 2) -> SpectrumReport:
    """Candidate eigenvalues at level ``m`` generated by the branch maps.

    Starts from the direct spectrum at ``base_level`` (default: the largest
    level within the dense budget, capped at ``m``) and lifts every value
    through both branches once per level.  Base eigenvalues that never appear
    as a lift (exceptional values) are carried along unchanged.  Multiplicities
    are unknown and reported as 0.  This is a candidate set, not a certified
    spectrum.
    """
    if base_level is None:
        base_level = min(m, int(math.floor(math.log(DENSE_BUDGET, d) + 1e-12)))
    if not 1 <= base_level <= m:
        raise ValueError(f"base level {base_level} must lie in 1..{m}")
    base = direct_spectrum(cell_laplacian(d, base_level, boundary_mode, ghost_increment))
    vals = list(base.eigenvalues)
    prov = [DIRECT] * len(vals)
    exceptional = list(base.eigenvalues)
    for _ in range(base_level, m):
        new_vals, new_prov = [], []
        for v in vals:
            if v <= branch_point(d):
                lo, hi = phi_branches(d, float(v))
                new_vals += [lo, hi]
                new_prov += [LIFT_MINUS, LIFT_PLUS]
        new_vals += exceptional
        new_prov += [DIRECT] * len(exceptional)
        order = np.argsort(new_vals, kind="stable")
        vals = [new_vals[i] for i in order]
        prov = [new_prov[i] for i in order]
        keep = [0] + [i for i in range(1, len(vals)) if vals[i] - vals[i - 1] > GROUP_TOL]
        vals = [vals[i] for i in keep]
        prov = [prov[i] for i in keep]
    return SpectrumReport(m, np.array(vals), np.zeros(len(vals), dtype=int), prov,
                          np.zeros(len(vals)), d=d, boundary_mode=boundary_mode)


def spectral_radius(M, tol: float = 1e-10, max_iterations: int = 100_000) -> float:
    """``rho(A) = max |1 - h c lambda_i|`` for a symmetric scheme matrix.

    ``M`` is a :class:`~sierpinski_fvm.solver.SchemeMatrix`; implicit matrices
    report the radius of ``A~^{-1}``, i.e. ``max 1/(1 + h c lambda_i)``.
    """
    lap = M.laplacian
    hc = M.hc
    if lap.n_cells <= DENSE_BUDGET:
        lam = eigenvalues(lap)
        lo, hi = lam[0], lam[-1]
    else:
        hi = _power_extreme(lap.matrix, tol, max_iterations)
        lo = hi - _power_extreme(hi * sp.identity(lap.n_cells, format="csr") - lap.matrix, tol, max_iterations)
    if M.scheme == "implicit":
        return float(max(1 / (1 + hc * lo), 1 / (1 + hc * hi)))
    return float(max(abs(1 - hc * lo), abs(1 - hc * hi)))


def _power_extreme(matrix, tol, max_iterations) -> float:
    """Largest eigenvalue of a symmetric positive semidefinite matrix by power iteration."""
    n = matrix.shape[0]
    x = np.cos(np.arange(n) * 0.7 + 0.3)
    x /= np.linalg.norm(x)
    estimate = 0.0
    for it in range(1, max_iterations + 1):
        y = matrix @ x
        new = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0
        x = y / norm
        if abs(new - estimate) <= tol * max(1.0, abs(new)):
            return new
        estimate = new
    raise ConvergenceError(f"power iteration did not converge in {max_iterations} iterations",
                           iterations=max_iterations)
