"""Regenerate the regression baselines in tests/golden.

Run only when a change in the numbers is intended; review the diff.
"""

import argparse
from pathlib import Path

from sierpinski_fvm.analysis import fdm_compare
from sierpinski_fvm.config import parse_config
from sierpinski_fvm.io import write_json
from sierpinski_fvm.solver import run
from sierpinski_fvm.spectral import verify_decimation

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"

FDM_CASE = {"d": 3, "m": 3, "T": 0.01, "N": 100, "snapshot_steps": [0, 10, 50, 100]}


def decimation(d, m, mode="neumann-cells"):
    report = verify_decimation(m, d, mode)
    path = write_json(GOLDEN / f"decimation_d{d}_m{m}_{mode}.json", report.to_dict())
    print(f"{path.name}: {len(report.conforming)} conforming, {len(report.exceptional)} exceptional")


def fdm():
    case = dict(FDM_CASE)
    rep = fdm_compare(case["d"], case["m"], case["T"], case["N"], snapshot_steps=tuple(case["snapshot_steps"]))
    payload = {**case, "steps": rep.steps, "correlations": rep.correlations,
               "sup_differences": rep.sup_differences, "fvm_sup": rep.fvm_sup, "fdm_sup": rep.fdm_sup}
    path = write_json(GOLDEN / "fdm_d3_m3.json", payload)
    print(f"{path.name}: correlations {rep.correlations}")


def figure(m, N):
    cfg = parse_config(preset="gasket-paper", overrides={"m": m, "N": N, "snapshots": (0, 10, 100, 500)})
    series = run(cfg.scheme_config(), cfg.initial_condition(), cfg.d, cfg.m)
    payload = {"config": cfg.to_dict(), "steps": series.steps, "sup_norms": series.max_norms,
               "masses": series.masses}
    path = write_json(GOLDEN / f"figure_d3_m{m}.json", payload)
    print(f"{path.name}: sup norms {series.max_norms}")


def main():
    argparse.ArgumentParser(description=__doc__).parse_args()
    GOLDEN.mkdir(parents=True, exist_ok=True)
    for m in (2, 3):
        decimation(3, m)
    fdm()
    figure(5, 20_000)
    figure(6, 200_000)


if __name__ == "__main__":
    main()
