"""Plain-text writers: CSV snapshots, geometry, coordinate matrices, summaries."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .simplex import SimplexSpace, cell_barycenter, cell_measure, word_str, words
from .spectral import SpectrumReport


def fmt(x) -> str:
    """Shortest round-trip decimal, locale independent; integers stay integers."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def _csv(rows) -> str:
    return "".join(",".join(row) + "\n" for row in rows)


def geometry_rows(space: SimplexSpace, m: int):
    d = space.d
    header = ["word", "level"] + [f"x{k}" for k in range(1, d)] + ["measure"]
    yield header
    measure = fmt(float(cell_measure(d, m)))
    for w in words(d, m):
        bc = cell_barycenter(space, w)
        yield [word_str(w) or "-", str(m)] + [fmt(c) for c in bc] + [measure]


def write_geometry(path, space: SimplexSpace, m: int) -> Path:
    path = Path(path)
    path.write_text(_csv(geometry_rows(space, m)))
    return path


def barycenters(space: SimplexSpace, m: int) -> np.ndarray:
    return np.array([cell_barycenter(space, w) for w in words(space.d, m)]).reshape(-1, space.d - 1)


def snapshot_name(step: int) -> str:
    return f"snapshot_k{step:07d}.csv"


def write_snapshots(out_dir, space: SimplexSpace, series) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    centers = barycenters(space, series.m)
    header = ["step", "time", "word"] + [f"x{k}" for k in range(1, space.d)] + ["value"]
    labels = [word_str(w) or "-" for w in words(space.d, series.m)]
    coords = [[fmt(c) for c in row] for row in centers]
    for step, time, values in zip(series.steps, series.times, series.values):
        rows = [header]
        t = fmt(time)
        for label, xy, v in zip(labels, coords, values):
            rows.append([str(step), t, label] + xy + [fmt(v)])
        path = out_dir / snapshot_name(step)
        path.write_text(_csv(rows))
        paths.append(path)
    return paths


def read_snapshot(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    col = lines[0].split(",").index("value")
    return np.array([float(ln.split(",")[col]) for ln in lines[1:]])


def coo_text(matrix) -> str:
    """Header ``rows,cols,nnz`` then one zero-based ``row,col,value`` triple per entry."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    lines = [f"{coo.shape[0]},{coo.shape[1]},{coo.nnz}"]
    lines += [f"{coo.row[k]},{coo.col[k]},{fmt(coo.data[k])}" for k in order]
    return "\n".join(lines) + "\n"


def read_coo(text: str) -> sp.csr_matrix:
    lines = text.strip().splitlines()
    n_rows, n_cols, _ = (int(v) for v in lines[0].split(","))
    triples = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, 3)
    return sp.csr_matrix((triples[:, 2], (triples[:, 0].astype(int), triples[:, 1].astype(int))),
                         shape=(n_rows, n_cols))


def spectrum_text(report: SpectrumReport) -> str:
    rows = [["eigenvalue", "multiplicity", "provenance", "residual"]]
    for v, k, p, r in zip(report.eigenvalues, report.multiplicities, report.provenance, report.residuals):
        rows.append([fmt(float(v)), str(int(k)) if k else "", p, fmt(float(r))])
    return _csv(rows)


def key_value_text(items) -> str:
    return "".join(f"{k}: {fmt(v) if isinstance(v, (int, float, np.number)) else v}\n" for k, v in items)


def write_json(path, payload) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path
