"""Command-line driver.

isp <command> --config <path> [--out <dir>] [--threads K] [--seed S]

Commands: validate, forward, split, rh-solve, recover-blocks, edge-forward,
edge-roundtrip, report.  Exit codes: 0 success, 1 numerical failure (the
failing operation's error name lands in the report), 2 input errors.  All
artifacts are written atomically; reports are byte-deterministic.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

_NUMERIC_ERRORS = (
    "NonConvergence",
    "SingularFactor",
    "SingularP",
    "EdgeDecayViolation",
    "SingularScattering",
    "FredholmSingular",
    "DegenerateBoundaryPair",
    "InconsistentInputs",
    "RankDeficient",
)


def _set_thread_env(threads: int):
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, str(threads))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="isp", description=__doc__)
    parser.add_argument(
        "command",
        choices=[
            "validate",
            "forward",
            "split",
            "rh-solve",
            "recover-blocks",
            "edge-forward",
            "edge-roundtrip",
            "report",
        ],
    )
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory (default $ISP_OUT_DIR or ./isp-out)")
    parser.add_argument("--threads", type=int, default=None, help="worker thread cap; 1 is the determinism reference")
    parser.add_argument("--seed", type=int, default=None, help="seed for generated fixtures")
    args = parser.parse_args(argv)

    if args.threads is not None:
        _set_thread_env(args.threads)

    # imports deferred so the thread env applies before numpy loads
    from .config import load_config
    from .errors import IspError

    try:
        cfg = load_config(args.config)
        cfg = cfg.with_overrides(out_dir=args.out, seed=args.seed, threads=args.threads)
        out_dir = Path(cfg.out_dir or os.environ.get("ISP_OUT_DIR") or "isp-out")
        report, ok = _dispatch(args.command, cfg, out_dir)
        _write_report(report, out_dir)
        return 0 if ok else 2
    except IspError as exc:
        kind = type(exc).__name__
        report = {"error": kind, "detail": str(exc)}
        for attr in ("lam", "value", "deficiency", "fraction", "rcond", "field", "path"):
            if hasattr(exc, attr):
                report[attr] = getattr(exc, attr)
        try:
            _write_report(report, Path(args.out or os.environ.get("ISP_OUT_DIR") or "isp-out"))
        except OSError:
            pass
        print(f"error: {kind}: {exc}", file=sys.stderr)
        return 1 if kind in _NUMERIC_ERRORS else 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _write_report(report: dict, out_dir: Path):
    from .serialize import atomic_write_text, render_report

    atomic_write_text(out_dir / "report.json", render_report(report))


def _write_artifact(out_dir: Path, name: str, text: str, manifest: list):
    from .serialize import atomic_write_text

    path = out_dir / name
    atomic_write_text(path, text)
    manifest.append(path)


def _dispatch(command: str, cfg, out_dir: Path):
    handlers = {
        "validate": _cmd_validate,
        "forward": _cmd_forward,
        "split": _cmd_split,
        "rh-solve": _cmd_rh_solve,
        "recover-blocks": _cmd_recover_blocks,
        "edge-forward": _cmd_edge_forward,
        "edge-roundtrip": _cmd_edge_roundtrip,
        "report": _cmd_report,
    }
    return handlers[command](cfg, out_dir)


def _require(problem: dict, key: str):
    from .errors import ValidationError

    if key not in problem:
        raise ValidationError(key, "missing from the problem description")
    return problem[key]


def _load_problem(cfg):
    from .errors import ValidationError
    from .serialize import load_problem

    if not cfg.problem:
        raise ValidationError("problem", "configuration has no problem path")
    return load_problem(cfg.problem, seed=cfg.seed)


def _cmd_validate(cfg, out_dir: Path):
    from .domain import validate_potential

    problem = _load_problem(cfg)
    pot = _require(problem, "potential")
    violations = validate_potential(pot)
    report = {
        "command": "validate",
        "valid": not violations,
        "violations": violations,
        "n": pot.n,
        "envelope": {"C": pot.envelope[0], "eps": pot.envelope[1]},
    }
    return report, not violations


def _cmd_forward(cfg, out_dir: Path):
    from . import forward as fwd
    from .domain import validate_potential
    from .errors import ValidationError
    from .linefunc import make_grid
    from .serialize import (
        file_manifest,
        kernels_to_csv,
        linefuncs_to_csv,
        render_report,
        sidecar_metadata,
        atomic_write_text,
    )

    problem = _load_problem(cfg)
    disp = _require(problem, "dispersion")
    pot = _require(problem, "potential")
    bnd = _require(problem, "boundary")
    violations = validate_potential(pot)
    if violations:
        raise ValidationError("potential", "; ".join(violations))

    x_max = cfg.resolve_x_max(pot.envelope)
    kernels = fwd.solve_kernels(
        pot,
        disp,
        step=cfg.kernel_step,
        x_max=x_max,
        tau_max=cfg.t_max,
        tail_tol=cfg.tail_tol,
        tol=cfg.iteration_tol,
        max_sweeps=cfg.max_sweeps,
    )
    grid = make_grid(cfg.lambda_max, cfg.n_lambda)
    blocks = fwd.kernel_transforms(kernels, disp, grid)
    plus, minus = fwd.boundary_parts(blocks, bnd)
    s_mat = fwd.scattering_matrix(plus, minus, singularity_tol=cfg.singularity_tol)
    p_mat, pi_mat = fwd.transmission_matrix(blocks)
    strips = fwd.strip_diagnostics(plus, minus)

    manifest: list = []
    _write_artifact(out_dir, "kernels.csv", kernels_to_csv(kernels), manifest)
    named_blocks = {
        "A11_minus": blocks.a11_minus,
        "A21_minus": blocks.a21_minus,
        "A12_plus": blocks.a12_plus,
        "A22_plus": blocks.a22_plus,
    }
    _write_artifact(out_dir, "transforms.csv", linefuncs_to_csv(named_blocks), manifest)
    named_scatter = {"S": s_mat, "plus": plus, "minus": minus}
    _write_artifact(out_dir, "scattering.csv", linefuncs_to_csv(named_scatter), manifest)
    _write_artifact(out_dir, "transmission.csv", linefuncs_to_csv({"P": p_mat, "Pi": pi_mat}), manifest)
    sidecar = sidecar_metadata(kernels=kernels, linefuncs={**named_blocks, **named_scatter})
    atomic_write_text(out_dir / "sidecar.json", render_report(sidecar))
    manifest.append(out_dir / "sidecar.json")

    report = {
        "command": "forward",
        "sweeps": kernels.sweeps,
        "theta": kernels.theta,
        "c_tilde": kernels.c_tilde,
        "min_abs_det_plus": strips["min_abs_det_plus"],
        "strip_diagnostics": strips,
        "tolerances": {
            "iteration_tol": cfg.iteration_tol,
            "tail_tol": cfg.tail_tol,
            "singularity_tol": cfg.singularity_tol,
        },
        "grid": {"lambda_max": cfg.lambda_max, "n_lambda": cfg.n_lambda},
        "manifest": file_manifest(manifest),
    }
    return report, True


def _input_linefuncs(cfg, which: str = "input"):
    from .errors import ValidationError
    from .serialize import linefuncs_from_csv

    path = cfg.input if which == "input" else cfg.inputs.get(which)
    if not path:
        raise ValidationError(which, "configuration has no input path")
    return linefuncs_from_csv(path)


def _cmd_split(cfg, out_dir: Path):
    from .rh import plemelj_split
    from .serialize import file_manifest, linefuncs_to_csv

    funcs = _input_linefuncs(cfg)
    name, f = next(iter(funcs.items()))
    plus, minus = plemelj_split(f, edge_tol=cfg.split_edge_tol)
    manifest: list = []
    _write_artifact(
        out_dir, "split.csv", linefuncs_to_csv({f"{name}_plus": plus, f"{name}_minus": minus}), manifest
    )
    report = {
        "command": "split",
        "input_block": name,
        "edge_norm": f.edge_norm(),
        "split_edge_tol": cfg.split_edge_tol,
        "manifest": file_manifest(manifest),
    }
    return report, True


def _cmd_rh_solve(cfg, out_dir: Path):
    import numpy as np

    from .rh import solve_regular_rh, split_residual
    from .serialize import file_manifest, linefuncs_to_csv

    funcs = _input_linefuncs(cfg)
    s_mat = funcs.get("S") or next(iter(funcs.values()))
    plus, minus = solve_regular_rh(
        s_mat,
        edge_tol=cfg.split_edge_tol,
        singularity_tol=cfg.singularity_tol,
        rcond_tol=cfg.rh_rcond_tol,
    )
    residual = float(
        np.abs((plus.plus_identity() @ s_mat.values) - minus.plus_identity()).max()
    )
    manifest: list = []
    _write_artifact(out_dir, "factors.csv", linefuncs_to_csv({"plus": plus, "minus": minus}), manifest)
    report = {
        "command": "rh-solve",
        "factorization_residual": residual,
        "plus_wrong_side_content": split_residual(plus, "plus"),
        "minus_wrong_side_content": split_residual(minus, "minus"),
        "manifest": file_manifest(manifest),
    }
    return report, True


def _cmd_recover_blocks(cfg, out_dir: Path):
    from .rh import recover_blocks
    from .serialize import file_manifest, linefuncs_to_csv

    problem = _load_problem(cfg)
    bnd1 = _require(problem, "boundary")
    bnd2 = _require(problem, "boundary2")
    fac1 = _input_linefuncs(cfg, "factorization1")
    fac2 = _input_linefuncs(cfg, "factorization2")
    blocks, diag = recover_blocks(
        fac1["plus"],
        fac1["minus"],
        fac2["plus"],
        fac2["minus"],
        bnd1,
        bnd2,
        singularity_tol=cfg.singularity_tol,
        consistency_tol=cfg.consistency_tol,
    )
    a11m, a12p, a21m, a22p = blocks
    manifest: list = []
    _write_artifact(
        out_dir,
        "blocks.csv",
        linefuncs_to_csv(
            {"A11_minus": a11m, "A12_plus": a12p, "A21_minus": a21m, "A22_plus": a22p}
        ),
        manifest,
    )
    report = {
        "command": "recover-blocks",
        "consistency": diag,
        "consistency_tol": cfg.consistency_tol,
        "manifest": file_manifest(manifest),
    }
    return report, True


def _cmd_edge_forward(cfg, out_dir: Path):
    from .edge_coupled import edge_scattering
    from .linefunc import make_grid
    from .serialize import file_manifest, linefuncs_to_csv

    problem = _load_problem(cfg)
    sys_ = _require(problem, "edge_system")
    bnd = _require(problem, "edge_boundary")
    grid = make_grid(cfg.lambda_max, cfg.n_lambda)
    s_mat = edge_scattering(sys_, bnd, grid)
    manifest: list = []
    _write_artifact(out_dir, "edge_scattering.csv", linefuncs_to_csv({"S": s_mat}), manifest)
    report = {
        "command": "edge-forward",
        "n": sys_.n,
        "column_sup": float(abs(s_mat.values[:, : sys_.n - 1, sys_.n - 1]).max()),
        "manifest": file_manifest(manifest),
    }
    return report, True


def _cmd_edge_roundtrip(cfg, out_dir: Path):
    from .edge_coupled import edge_roundtrip
    from .linefunc import make_grid

    problem = _load_problem(cfg)
    sys_ = _require(problem, "edge_system")
    bnd = _require(problem, "edge_boundary")
    bnd2 = _require(problem, "edge_boundary2")
    grid = make_grid(cfg.lambda_max, cfg.n_lambda)
    result = edge_roundtrip(
        sys_,
        bnd,
        bnd2,
        grid,
        compare_to=cfg.compare_to,
        split_edge_tol=cfg.split_edge_tol,
        s_step=cfg.s_step,
    )
    report = {"command": "edge-roundtrip", **result}
    return report, True


def _cmd_report(cfg, out_dir: Path):
    from .rh import solvability_report
    from .forward import strip_diagnostics

    funcs = _input_linefuncs(cfg)
    report: dict = {"command": "report"}
    if "S" in funcs or len(funcs) == 1:
        s_mat = funcs.get("S") or next(iter(funcs.values()))
        report["solvability"] = solvability_report(s_mat, singularity_tol=cfg.singularity_tol)
    if "plus" in funcs and "minus" in funcs:
        report["strips"] = strip_diagnostics(funcs["plus"], funcs["minus"])
    return report, True


if __name__ == "__main__":
    sys.exit(main())
