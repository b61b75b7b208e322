"""``mfspec`` command line.

Exit codes: 0 ok, 1 verification failure, 2 input error, 3 invalid system,
4 condition (Q) or (P) violated.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

from . import dimension, oracle, spectra, suite
from .errors import (
    BoundaryUnresolved,
    ConditionViolated,
    ExcludedAlpha,
    InvalidSystem,
    MfspecError,
)
from .extended import ExtendedReal
from .pressure import pressure
from .spectra import SpectrumPoint, Status
from .systems import System, load_bundle, load_system

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_SYSTEM, EXIT_CONDITION = 0, 1, 2, 3, 4

DIMENSION_KINDS = ("u", "entropy", "lyapunov", "birkhoff", "pointwise", "local-entropy")


@dataclass
class RunConfig:
    command: str
    system_path: str | None = None
    potential: str = "zero"
    psi: str | None = None
    xi_name: str | None = None
    alpha_grid: list[tuple[float, ...]] = field(default_factory=list)
    gamma: list[float] = field(default_factory=list)
    n_list: list[int] = field(default_factory=list)
    order: int = 1
    output_path: str | None = None
    tolerance: float | None = None
    workers: int = 1
    kind: str | None = None
    u_name: str = "u"


# ---------------------------------------------------------------------------
# parsing


def parse_axis(text: str) -> list[float]:
    """``A`` or ``A:B:STEP`` (inclusive of B up to rounding)."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"bad grid {text!r}; expected A or A:B:STEP")
    a, b, step = (float(p) for p in parts)
    if not step > 0:
        raise ValueError("grid step must be positive")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError(f"empty grid {text!r}")
    return [round(a + i * step, 12) for i in range(count)]


def parse_grid(text: str) -> list[tuple[float, ...]]:
    """Comma-separated axes, expanded as a row-major product."""
    axes = [parse_axis(t) for t in text.split(",")]
    return [tuple(p) for p in product(*axes)]


def parse_floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",")]


def parse_ints(text: str) -> list[int]:
    vals = [int(t) for t in text.split(",")]
    if any(v < 1 for v in vals):
        raise ValueError("n values must be at least 1")
    return vals


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _fmt_value(v: ExtendedReal | float) -> str:
    if isinstance(v, ExtendedReal):
        return v.render(12)
    if math.isnan(v):
        return "nan"
    return ExtendedReal.of(v).render(12)


# ---------------------------------------------------------------------------
# row evaluation


@dataclass(frozen=True)
class Row:
    alpha: tuple[float, ...]
    value: str
    status: str
    argmin: tuple[float, ...] | None
    iterations: int


def _row(alpha, pt: SpectrumPoint) -> Row:
    argmin = None if pt.argmin_q is None else tuple(float(x) for x in np.atleast_1d(pt.argmin_q))
    return Row(tuple(alpha), _fmt_value(pt.value), pt.status.value, argmin, int(pt.iterations))


def _guarded(func: Callable[[tuple], SpectrumPoint]) -> Callable[[tuple], Row]:
    def run(alpha):
        try:
            return _row(alpha, func(alpha))
        except BoundaryUnresolved:
            return Row(tuple(alpha), "nan", Status.BOUNDARY.value, None, 0)
        except ExcludedAlpha:
            return Row(tuple(alpha), "nan", Status.UNDEFINED.value, None, 0)

    return run


def _evaluate(func, grid, workers: int) -> list[Row]:
    run = _guarded(func)
    if workers <= 1 or len(grid) <= 1:
        return [run(a) for a in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, grid))


def rows_to_csv(rows: Sequence[Row], d: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"alpha_{i + 1}" for i in range(d)] + ["value", "status"] + [f"argmin_q_{i + 1}" for i in range(d)] + ["iterations"])
    for r in rows:
        q = [_fmt(x) for x in r.argmin] if r.argmin is not None else [""] * d
        w.writerow([_fmt(a) for a in r.alpha] + [r.value, r.status] + q + [r.iterations])
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def _system(cfg: RunConfig) -> System:
    if not cfg.system_path:
        raise ValueError("--system is required")
    return load_system(cfg.system_path)


def _problem(cfg: RunConfig, s: System):
    phi = s.vector(cfg.potential)
    psi = s.vector(cfg.psi) if cfg.psi else s.vector(",".join(["one"] * phi.d))
    if psi.d != phi.d:
        raise ValueError("--psi must name as many potentials as --potential")
    xi = s.potential(cfg.xi_name) if cfg.xi_name else None
    return phi, psi, xi


def _require_grid(cfg: RunConfig, d: int) -> list[tuple[float, ...]]:
    if not cfg.alpha_grid:
        raise ValueError("--alpha is required")
    if any(len(a) != d for a in cfg.alpha_grid):
        raise ValueError(f"--alpha needs {d} axes")
    return cfg.alpha_grid


def cmd_pressure(cfg: RunConfig) -> int:
    s = _system(cfg)
    print(f"{pressure(s.sft, s.potential(cfg.potential)):.12f}")
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    s = _system(cfg)
    phi, psi, xi = _problem(cfg, s)
    grid = _require_grid(cfg, phi.d)
    spectra._require_q(s.sft, phi, psi)
    rows = _evaluate(lambda a: spectra.predicted(s.sft, phi, psi, xi, list(a)), grid, cfg.workers)
    _emit(rows_to_csv(rows, phi.d), cfg.output_path)
    return EXIT_OK


def cmd_cvp(cfg: RunConfig) -> int:
    s = _system(cfg)
    phi, psi, xi = _problem(cfg, s)
    grid = _require_grid(cfg, phi.d)
    spectra._require_q(s.sft, phi, psi)
    rows = _evaluate(lambda a: spectra.conditional_variational(s.sft, phi, psi, xi, list(a), cfg.order), grid, cfg.workers)
    _emit(rows_to_csv(rows, phi.d), cfg.output_path)
    return EXIT_OK


def cmd_coarse(cfg: RunConfig) -> int:
    s = _system(cfg)
    phi, psi, xi = _problem(cfg, s)
    grid = _require_grid(cfg, phi.d)
    if not cfg.gamma or not cfg.n_list:
        raise ValueError("coarse needs --gamma and --n")
    if any(not g > 0 for g in cfg.gamma):
        raise ValueError("gamma must be positive")
    jobs = [(a, g, n) for a in grid for g in cfg.gamma for n in cfg.n_list]

    def run(job):
        a, g, n = job
        return spectra.coarse(s.sft, phi, psi, xi, list(a), g, n)

    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            values = list(pool.map(run, jobs))
    else:
        values = [run(j) for j in jobs]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"alpha_{i + 1}" for i in range(phi.d)] + ["gamma", "n", "value"])
    for (a, g, n), v in zip(jobs, values):
        w.writerow([_fmt(x) for x in a] + [_fmt(g), n, v.render(12)])
    _emit(buf.getvalue(), cfg.output_path)
    return EXIT_OK


def _dimension_func(cfg: RunConfig, s: System):
    kind = cfg.kind
    if kind == "local-entropy":
        phi = s.vector(cfg.potential)
        return phi.d, lambda a: dimension.local_entropy_point(s.sft, phi, list(a))
    if kind == "entropy":
        phi = s.potential(cfg.potential)
        one = s.potential("one")
        return 1, lambda a: spectra.predicted(s.sft, phi, one, None, a[0])
    if kind == "u":
        phi, psi, _ = _problem(cfg, s)
        u = s.potential(cfg.u_name)
        return phi.d, lambda a: dimension.u_dimension_point(s.sft, phi, psi, u, list(a))
    fmap = s.require_map()
    if kind == "lyapunov":
        return 1, lambda a: dimension.lyapunov_point(fmap, a[0])
    phi = s.potential(cfg.potential)
    if kind == "birkhoff":
        return 1, lambda a: dimension.birkhoff_dimension_point(fmap, phi, a[0])
    if kind == "pointwise":
        return 1, lambda a: dimension.pointwise_dimension_point(fmap, phi, a[0])
    raise ValueError(f"unknown dimension spectrum {kind!r}")


def cmd_dimension(cfg: RunConfig) -> int:
    s = _system(cfg)
    d, func = _dimension_func(cfg, s)
    grid = _require_grid(cfg, d)
    rows = _evaluate(func, grid, cfg.workers)
    _emit(rows_to_csv(rows, d), cfg.output_path)
    return EXIT_OK


def _json_num(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def cmd_domain(cfg: RunConfig) -> int:
    s = _system(cfg)
    phi, psi, _ = _problem(cfg, s)
    dom = spectra.domain(s.sft, phi, psi)
    out = {"d": dom.d, "unbounded": bool(dom.contains_unbounded_direction)}
    if dom.d == 1:
        out.update(
            lower=_json_num(dom.lower),
            upper=_json_num(dom.upper),
            lower_cycle=dom.lower_cycle,
            upper_cycle=dom.upper_cycle,
        )
    else:
        out["points"] = [[_json_num(float(x)) for x in p] for p in np.asarray(dom.points)]
    _emit(json.dumps(out, indent=2) + "\n", cfg.output_path)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    bundle = load_bundle(cfg.system_path)
    results = suite.run_suite(bundle, cfg.tolerance)
    failed = 0
    everything = []
    for name, reports in results.items():
        bad = [r for r in reports if not r.passed]
        failed += len(bad)
        everything.extend(reports)
        print(f"[{'PASS' if not bad else 'FAIL'}] criterion {name}: {len(reports) - len(bad)}/{len(reports)}")
    print()
    print(oracle.format_table(everything))
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(oracle.reports_to_json(everything) + "\n")
    print(f"\n{len(everything) - failed}/{len(everything)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


COMMANDS = {
    "pressure": cmd_pressure,
    "spectrum": cmd_spectrum,
    "cvp": cmd_cvp,
    "coarse": cmd_coarse,
    "dimension": cmd_dimension,
    "domain": cmd_domain,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# entry point


def _common(p: argparse.ArgumentParser, system_required: bool = True) -> None:
    p.add_argument("--system", required=system_required, help="system JSON file")
    p.add_argument("--potential", default="zero", help="potential name(s), comma separated")
    p.add_argument("--psi", help="denominator potential name(s); default one")
    p.add_argument("--xi", help="weight potential name")
    p.add_argument("--alpha", help="grid A[:B:STEP], one per axis, comma separated")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--workers", type=int, default=min(4, os.cpu_count() or 1))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfspec", description="Multifractal spectra of shifts of finite type.")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("pressure", help="topological pressure of a potential"))
    _common(sub.add_parser("spectrum", help="predicted spectrum over an alpha grid"))
    p = sub.add_parser("cvp", help="conditional variational pressure over an alpha grid")
    _common(p)
    p.add_argument("--order", type=int, default=1)
    p = sub.add_parser("coarse", help="finite-n coarse spectrum")
    _common(p)
    p.add_argument("--gamma", required=True)
    p.add_argument("--n", required=True)
    p = sub.add_parser("dimension", help="dimension spectra")
    p.add_argument("kind", choices=DIMENSION_KINDS)
    _common(p)
    p.add_argument("--u", dest="u_name", default="u", help="weight for the u-dimension")
    _common(sub.add_parser("domain", help="ratio domain of (potential, psi)"))
    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--system", help="bundle JSON (defaults to the packaged bundle)")
    p.add_argument("--tol", type=float, help="override every nonzero tolerance")
    p.add_argument("--out", help="write reports as JSON")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command, system_path=ns.system, output_path=getattr(ns, "out", None))
    if ns.command == "verify":
        cfg.tolerance = ns.tol
        return cfg
    cfg.potential = ns.potential
    cfg.psi = ns.psi
    cfg.xi_name = ns.xi
    cfg.workers = max(1, ns.workers)
    if ns.alpha:
        cfg.alpha_grid = parse_grid(ns.alpha)
    if ns.command == "cvp":
        if ns.order < 1:
            raise ValueError("--order must be at least 1")
        cfg.order = ns.order
    if ns.command == "coarse":
        cfg.gamma = parse_floats(ns.gamma)
        cfg.n_list = parse_ints(ns.n)
    if ns.command == "dimension":
        cfg.kind = ns.kind
        cfg.u_name = ns.u_name
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except ConditionViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.witness:
            print(f"witness cycle: {', '.join(exc.witness)}", file=sys.stderr)
        return EXIT_CONDITION
    except InvalidSystem as exc:
        print(f"error: invalid system: {exc}", file=sys.stderr)
        return EXIT_SYSTEM
    except (ValueError, KeyError, OSError, MfspecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
