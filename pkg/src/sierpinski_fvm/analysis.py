"""Error norms, inter-level restriction, self-convergence and the FDM comparator.

There is no closed-form heat kernel on the simplex, so convergence is
measured against a one-level-finer reference run restricted down to each
coarse level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CFLViolationError
from .graphs import build_vertex_laplacian
from .simplex import cell_corner_coords, vertex_coords
from .solver import InitialCondition, SchemeConfig, StateSeries, initial_state, run, scheme_coefficient
from .spectral import cfl_admissible, cfl_max_h

STUDY_INITIAL = InitialCondition.vertex_spline((1,), 1, spline_level=1)


def norm_2_inf(series) -> float:
    """``max_k (d^-m sum_i |u_i^k|^2)^(1/2)`` over the recorded vectors."""
    vectors = series.values if isinstance(series, StateSeries) else list(series)
    if not vectors:
        raise ValueError("empty series")
    return max(float(np.sqrt(np.mean(np.square(v)))) for v in vectors)


def restrict(fine: np.ndarray, d: int) -> np.ndarray:
    """Measure-weighted mean of the ``d`` children ``J·i`` of each coarse cell ``J``."""
    fine = np.asarray(fine, dtype=float)
    if fine.ndim != 1 or fine.size % d:
        raise ValueError(f"length {fine.size} is not a multiple of d={d}")
    kids = fine.reshape(-1, d)
    # Mean taken as an offset from the first child, so constant blocks restrict
    # exactly and restrict(prolong(u)) == u holds bit for bit.
    first = kids[:, 0]
    return first + (kids - first[:, None]).mean(axis=1)


def restrict_to(fine: np.ndarray, d: int, levels: int) -> np.ndarray:
    for _ in range(levels):
        fine = restrict(fine, d)
    return fine


def prolong(coarse: np.ndarray, d: int) -> np.ndarray:
    """Piecewise-constant injection into the children."""
    return np.repeat(np.asarray(coarse, dtype=float), d)


def mass(u: np.ndarray) -> float:
    return float(np.mean(u))


@dataclass
class ConvergenceRow:
    m: int
    h: float
    error: float
    rate: float = math.nan
    message: str = ""


@dataclass
class ConvergenceTable:
    d: int
    scheme: str
    T: float
    m_ref: int
    rows: list[ConvergenceRow] = field(default_factory=list)
    restriction: str = "cell-mean"
    initial: str = ""

    @property
    def errors(self) -> list[float]:
        return [r.error for r in self.rows]

    @property
    def strictly_decreasing(self) -> bool:
        errs = [r.error for r in self.rows]
        return all(math.isfinite(e) for e in errs) and all(b < a for a, b in zip(errs, errs[1:]))


def _study_steps(scheme: str, d: int, m_ref: int, T: float) -> int:
    if scheme == "explicit":
        return max(1, math.ceil(T / cfl_max_h(d, m_ref)))
    return 1000


def self_convergence_study(d: int, m_list, scheme: str = "implicit", T: float = 0.1,
                           N: int | None = None, initial=STUDY_INITIAL,
                           boundary_mode: str = "dirichlet-ghost", m_ref: int | None = None) -> ConvergenceTable:
    """Discrepancy in the 2,inf norm between each level and the restricted reference.

    All levels share one step size ``h = T/N`` so the comparison isolates the
    spatial error.  ``T = 0`` compares initial data only.  An explicit run
    whose step violates its CFL bound is recorded as a row with an error
    message and NaN error; the study continues.
    """
    m_list = sorted(m_list)
    if not m_list:
        raise ValueError("empty level list")
    if m_ref is None:
        m_ref = m_list[-1] + 1
    if m_ref <= m_list[-1]:
        raise ValueError("reference level must exceed every study level")
    table = ConvergenceTable(d, scheme, T, m_ref,
                             initial=initial.describe() if isinstance(initial, InitialCondition) else "custom")

    def trajectory(m):
        if T == 0:
            return [initial_state(initial, d, m)], 0.0
        steps = N if N is not None else _study_steps(scheme, d, m_ref, T)
        cfg = SchemeConfig(T, steps, scheme=scheme, boundary_mode=boundary_mode, snapshot_steps=())
        return run(cfg, initial, d, m, keep_trajectory=True).trajectory, cfg.h

    ref, h_ref = trajectory(m_ref)
    for m in m_list:
        try:
            traj, h = trajectory(m)
        except CFLViolationError as exc:
            table.rows.append(ConvergenceRow(m, h_ref, math.nan, message=str(exc)))
            continue
        err = max(float(np.sqrt(np.mean((u - restrict_to(r, d, m_ref - m)) ** 2))) for u, r in zip(traj, ref))
        table.rows.append(ConvergenceRow(m, h, err))
    for a, b in zip(table.rows, table.rows[1:]):
        if a.error > 0 and b.error > 0 and math.isfinite(a.error) and math.isfinite(b.error):
            b.rate = math.log2(a.error / b.error)
    return table


# ---------------------------------------------------------------------------
# Finite difference comparator on the merged vertex graph


def fdm_cfl_max_h(d: int, m: int) -> float:
    """Gershgorin bound for the vertex-graph scheme: interior degree is ``2(d-1)``."""
    return 1.0 / (d * (d - 1) * (d + 2) ** m)


@dataclass
class FDMComparison:
    d: int
    m: int
    h: float
    steps: list[int] = field(default_factory=list)
    correlations: list[float] = field(default_factory=list)
    sup_differences: list[float] = field(default_factory=list)
    fvm_sup: list[float] = field(default_factory=list)
    fdm_sup: list[float] = field(default_factory=list)


def _correlation(a: np.ndarray, b: np.ndarray) -> float:
    if np.std(a) == 0 or np.std(b) == 0:
        return math.nan
    return float(np.corrcoef(a, b)[0, 1])


def fdm_compare(d: int, m: int, T: float, N: int, word=(1,), corner: int = 1,
                amplitude: float = 1.0, snapshot_steps=None) -> FDMComparison:
    """Run the FVM and a vertex-graph explicit FDM from matching vertex data.

    The FDM starts from ``amplitude`` at the vertex ``F_word(P_corner)`` with the
    boundary ``V_0`` held at zero; the FVM starts from the vertex spline of the
    same vertex.  The FDM solution is averaged per cell over the cell's
    corners and compared with the FVM cell values at each snapshot.
    Diagnostic only.
    """
    vg = build_vertex_laplacian(d, m, merged=True)
    if vg.n_vertices > 4096 * 4:
        raise ValueError(f"vertex graph with {vg.n_vertices} vertices exceeds the comparison budget")
    cfg = SchemeConfig(T, N, scheme="explicit", snapshot_steps=snapshot_steps)
    if not cfl_admissible(d, m, cfg.h_exact) or cfg.h > fdm_cfl_max_h(d, m):
        raise CFLViolationError(cfg.h, min(cfl_max_h(d, m), fdm_cfl_max_h(d, m)), d, m)

    fvm = run(cfg, InitialCondition.vertex_spline(word, corner), d, m)
    fvm_values = [amplitude * v for v in fvm.values]

    corner_vertex = vg.row_map.reshape(d**m, d)  # [cell, corner] -> vertex
    coords = cell_corner_coords(d, m)
    match = np.argwhere(np.all(coords == np.array(vertex_coords(d, word, corner, m)), axis=2))
    target = np.unique(corner_vertex[match[:, 0], match[:, 1]])
    interior = np.setdiff1d(np.arange(vg.n_vertices), vg.corner_labels)
    L = vg.laplacian.astype(float)[interior][:, interior].tocsr()
    v = np.zeros(vg.n_vertices)
    v[target] = amplitude
    v[list(vg.corner_labels)] = 0.0
    hc = cfg.h * scheme_coefficient(d, m)
    snaps = set(cfg.snapshot_steps)
    fdm_values = []
    if 0 in snaps:
        fdm_values.append(v.copy())
    w = v[interior]
    for n in range(1, N + 1):
        w = w - hc * (L @ w)
        if n in snaps:
            full = np.zeros(vg.n_vertices)
            full[interior] = w
            fdm_values.append(full)

    report = FDMComparison(d, m, cfg.h)
    for step, fv, dv in zip(fvm.steps, fvm_values, fdm_values):
        cell_avg = dv[corner_vertex].mean(axis=1)
        report.steps.append(step)
        report.correlations.append(_correlation(fv, cell_avg))
        report.sup_differences.append(float(np.max(np.abs(fv - cell_avg))))
        report.fvm_sup.append(float(np.max(np.abs(fv))))
        report.fdm_sup.append(float(np.max(np.abs(dv))))
    return report
