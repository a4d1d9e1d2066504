"""Command-line interface.

Exit status: 0 on success, 2 when the data is rejected (failed extension
condition, guard violation, unmet measure target), 3 on I/O or schema
errors. Diagnostics go to stderr unchanged.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .area_velocity import DEFAULT_SUBSET_BUDGET, av_ratio_scan
from .errors import AdmissibilityError, HeisWhitneyError, ValidationError
from .extension import DEFAULT_AV_LIMIT, DEFAULT_LEIBNIZ_TOL, check_conditions, extend_cinfty, \
    extend_horizontal
from .finiteness import finiteness_check
from .heisenberg import SampledCurve
from .jets import HorizontalJetTriple, validate_cmw
from .lusin import DEFAULT_CELLS, lusin_approximate, lusin_cinfty
from .modulus import ModulusOfContinuity
from .suite import all_fixtures, dense_grid

EXIT_OK, EXIT_REJECTED, EXIT_IO = 0, 2, 3


class SchemaError(Exception):
    """Input could not be read or does not match the expected layout."""


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    out: str | None = None
    m: int | None = None
    m_max: int | None = None
    omega: str = "linear"
    epsilon: float = 0.1
    budget: int = DEFAULT_SUBSET_BUDGET
    tol: float = DEFAULT_LEIBNIZ_TOL
    av_limit: float = DEFAULT_AV_LIMIT
    kind: str = "curve"
    resolution: int = 1000
    points: int = 17
    cells: int = DEFAULT_CELLS

    def __post_init__(self):
        for name in ("epsilon", "budget", "tol", "resolution", "points", "cells"):
            if not getattr(self, name) > 0:
                raise SchemaError(f"--{name.replace('_', '-')} must be positive")
        for name in ("m", "m_max"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise SchemaError(f"--{name.replace('_', '-')} must be nonnegative")


# ------------------------------------------------------------------ loading

def _load(path):
    if path is None:
        raise SchemaError("an input file is required")
    try:
        return io.read_json(path)
    except (OSError, ValueError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


def _schema(fn, obj, what):
    try:
        return fn(obj)
    except (KeyError, TypeError, ValueError, HeisWhitneyError) as exc:
        raise SchemaError(f"input is not a valid {what}: {exc}") from exc


def _triple(cfg):
    gamma = _schema(HorizontalJetTriple.from_json, _load(cfg.input), "jet triple")
    if cfg.m is not None:
        gamma = _schema(lambda g: g.truncate(cfg.m), gamma, "jet triple of that order")
    return gamma


def _sampled(cfg):
    return _schema(SampledCurve.from_json, _load(cfg.input), "sampled curve")


def _point_values(obj):
    """``(K, values)`` from a jet triple or a sampled curve."""
    if "grid" in obj:
        c = SampledCurve.from_json(obj)
        return c.grid, c.points
    g = HorizontalJetTriple.from_json(obj)
    return g.K.points, np.column_stack([g.F.data[0], g.G.data[0], g.H.data[0]])


def _omega(cfg):
    return _schema(ModulusOfContinuity.parse, cfg.omega, "modulus")


def _emit(cfg, payload, suffix=".json"):
    text = io.dumps(payload)
    if cfg.out:
        path = Path(cfg.out)
        if path.suffix != suffix:
            path = path.with_suffix(suffix)
        path.write_text(text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------- commands

def _validate(cfg):
    gamma, omega = _triple(cfg), _omega(cfg)
    report = {"m": gamma.m,
              "whitney": {n: validate_cmw(J, omega).to_json()
                          for n, J in (("F", gamma.F), ("G", gamma.G), ("H", gamma.H))},
              "leibniz_defect": gamma.leibniz_defect(),
              "av_scan": av_ratio_scan(gamma, omega).to_json()}
    try:
        check_conditions(gamma, omega, cfg.av_limit, cfg.tol)
    except ValidationError as exc:
        report.update(verdict="rejected", failed_condition=exc.condition, message=str(exc))
        _emit(cfg, report)
        raise
    report["verdict"] = "accepted"
    _emit(cfg, report)


def _build_curve(cfg, gamma):
    if cfg.m_max is not None:
        return extend_cinfty(gamma, m_max=cfg.m_max, av_limit=cfg.av_limit, leibniz_tol=cfg.tol)
    return extend_horizontal(gamma, _omega(cfg), av_limit=cfg.av_limit, leibniz_tol=cfg.tol)


def _extend(cfg):
    curve = _build_curve(cfg, _triple(cfg))
    rows = curve.sample_rows(cfg.resolution)
    if cfg.out:
        base = Path(cfg.out).with_suffix("")
        io.write_csv(base.with_suffix(".csv"), ["t", "x", "y", "z", "residual"], rows)
        io.write_json(base.with_suffix(".json"), curve.to_json())
    else:
        sys.stdout.write(io.dumps({"audit": curve.audit,
                                   "max_csv_residual": float(np.max(np.abs(rows[:, 4])))}))


def _finiteness(cfg):
    K, values = _schema(_point_values, _load(cfg.input), "jet triple or sampled curve")
    m = 1 if cfg.m is None else cfg.m
    _emit(cfg, finiteness_check(K, values, m, _omega(cfg), cfg.budget).to_json())


def _lusin(cfg):
    curve = _sampled(cfg)
    if cfg.m_max is not None:
        res = lusin_cinfty(curve, cfg.m_max, cfg.epsilon, cells=cfg.cells)
    else:
        m = 2 if cfg.m is None else cfg.m
        res = lusin_approximate(curve, m, _omega(cfg), cfg.epsilon, cells=cfg.cells)
    if cfg.out:
        base = Path(cfg.out).with_suffix("")
        io.write_json(base.with_suffix(".json"), res.to_json())
        io.write_csv(base.with_suffix(".csv"), ["t", "x", "y", "z", "residual"],
                     res.curve.sample_rows(cfg.resolution))
    else:
        payload = res.to_json()
        payload.pop("curve")
        sys.stdout.write(io.dumps(payload))
    if not res.success:
        raise HeisWhitneyError(f"deficit {res.agreement_measure_deficit:g} "
                               f"not below epsilon {cfg.epsilon:g}")


def _curve_suite(cfg):
    out = Path(cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    m = 3 if cfg.m is None else cfg.m
    dense = dense_grid()
    written = []
    for c in all_fixtures():
        order = min(m, 2) if c.name == "corner_curve" else m
        jets = c.uniform_jets(cfg.points, order)
        io.write_json(out / f"{c.name}.jets.json", jets.to_json())
        io.write_json(out / f"{c.name}.samples.json", c.sample(dense).to_json())
        written += [f"{c.name}.jets.json", f"{c.name}.samples.json"]
    sys.stdout.write(io.dumps({"directory": str(out), "files": written}))


def _plot_data(cfg):
    obj = _load(cfg.input)
    if not obj:
        raise SchemaError("input is empty")
    gamma = _schema(HorizontalJetTriple.from_json, obj, "jet triple")
    if cfg.m is not None:
        gamma = gamma.truncate(cfg.m)
    if cfg.kind == "av":
        rep = av_ratio_scan(gamma, _omega(cfg))
        header, rows = ["gap", "ratio"], rep.ratios_by_scale
    else:
        curve = _build_curve(cfg, gamma)
        header, rows = ["t", "x", "y", "z", "residual"], curve.sample_rows(cfg.resolution)
    text = io.csv_text(header, rows)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


COMMANDS = {"validate": _validate, "extend": _extend, "finiteness": _finiteness,
            "lusin": _lusin, "curve-suite": _curve_suite, "plot-data": _plot_data}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="heiswhitney",
                                description="Horizontal Whitney extension in the Heisenberg group")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        if name != "curve-suite":
            s.add_argument("input")
        s.add_argument("--out")
        s.add_argument("--m", type=int)
        s.add_argument("--m-max", type=int, dest="m_max")
        s.add_argument("--omega", default="linear",
                       help="linear | power:<alpha> | table:<path>")
        s.add_argument("--epsilon", type=float, default=0.1)
        s.add_argument("--budget", type=int, default=DEFAULT_SUBSET_BUDGET)
        s.add_argument("--tol", type=float, default=DEFAULT_LEIBNIZ_TOL,
                       help="tolerance for the Leibniz check on the vertical jet")
        s.add_argument("--av-limit", type=float, default=DEFAULT_AV_LIMIT, dest="av_limit")
        s.add_argument("--resolution", type=int, default=1000)
        if name == "plot-data":
            s.add_argument("--kind", choices=("curve", "av"), default="curve")
        if name == "curve-suite":
            s.add_argument("--points", type=int, default=17)
        if name == "lusin":
            s.add_argument("--cells", type=int, default=DEFAULT_CELLS)
    return p


def run(cfg: RunConfig) -> int:
    try:
        COMMANDS[cfg.command](cfg)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, AdmissibilityError, HeisWhitneyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    return EXIT_OK


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    try:
        cfg = RunConfig(**args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
