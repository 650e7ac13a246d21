"""Batch experiment runner: funk-eigencheck, solve, and symmetry commands.

Outputs are files (canonical JSON reports, OBJ meshes, CSV curve tables);
every command writes a RunManifest listing each output with a content hash.
Exit codes: 0 pass, 2 verification failure, 3 non-convergence, 64 usage.
"""

from __future__ import annotations

import os

_threads = os.environ.get("ZOLLFORGE_THREADS")
if _threads:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(_var, _threads)

import argparse
import hashlib
import json
import math
import platform
import re as _re
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import (
    CatalogIntegrityError,
    ConfigurationError,
    NonConvergenceError,
    ZollforgeError,
)
from .funk import eigencheck_table
from .solver import (
    SolverConfig,
    continuation,
    equivariance_check,
    export_embedding,
    linear_deviation_order,
    verify_zoll,
)
from .sphere import OrthogonalTransform, SphereFunction, n_coeffs
from .symmetry import (
    _parse_group_name,
    build_group,
    catalog_entry,
    invariant_polynomial,
    restrict_to_sphere,
)

_EVEN_TOL = 1e-8
_ODD_TOL = 1e-10


# ---------------------------------------------------------------------------
# canonical JSON: sorted keys, floats always rendered as %.12e
# ---------------------------------------------------------------------------


def canonical_json(obj) -> str:
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ConfigurationError(f"non-finite value {obj!r} in JSON report")
        return f"{obj:.12e}"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        return (
            "{"
            + ",".join(
                json.dumps(str(k)) + ":" + canonical_json(v) for k, v in items
            )
            + "}"
        )
    raise ConfigurationError(f"cannot serialize {type(obj).__name__} to JSON")


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        fh.write(canonical_json(obj) + "\n")


# ---------------------------------------------------------------------------
# run manifest
# ---------------------------------------------------------------------------


@dataclass
class RunManifest:
    """Provenance record written next to every command's outputs."""

    command: str
    config: dict
    inputs: dict = field(default_factory=dict)
    versions: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    stage_timings: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.versions = {
            "zollforge": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        }
        self._t0 = time.perf_counter()
        self._stage_start = self._t0

    def stage(self, name: str) -> None:
        now = time.perf_counter()
        self.stage_timings[name] = now - self._stage_start
        self._stage_start = now

    def add_output(self, path: str) -> None:
        self.outputs[os.path.basename(path)] = _sha256_file(path)

    def write(self, out_dir: str) -> str:
        self.wall_clock = time.perf_counter() - self._t0
        path = os.path.join(out_dir, "manifest.json")
        _write_json(
            path,
            {
                "command": self.command,
                "config": self.config,
                "inputs": self.inputs,
                "versions": self.versions,
                "wall_clock": self.wall_clock,
                "stage_timings": self.stage_timings,
                "outputs": self.outputs,
            },
        )
        return path


def _prepare_out(out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return out_dir


def _load_config(path: str | None, overrides: dict) -> tuple[SolverConfig, dict]:
    raw = {}
    inputs = {}
    if path:
        with open(path) as fh:
            raw = json.load(fh)
        inputs["config"] = _sha256_file(path)
    config = SolverConfig.from_json_dict(raw)
    for key, value in overrides.items():
        if value is not None:
            raw[key] = value
    if overrides:
        config = SolverConfig.from_json_dict(raw)
    return config, inputs


# ---------------------------------------------------------------------------
# generator grammar: Y<l>_<m>, sums with +, scalar *, catalog:<group>
# ---------------------------------------------------------------------------

_Y_PATTERN = _re.compile(r"Y(\d+)_(-?\d+)")


def parse_f_spec(spec: str, l_max: int) -> SphereFunction:
    """Band-limited generator from a spec string.

    `catalog:<group>` means the catalog polynomial of that group restricted
    to the sphere, with the degree-1 component removed and L2-normalized.
    """
    total = np.zeros(n_coeffs(l_max))
    for chunk in str(spec).split("+"):
        term = chunk.strip()
        if not term:
            raise ConfigurationError(f"empty term in generator spec {spec!r}")
        scalar = 1.0
        if "*" in term:
            s_txt, _, term = term.partition("*")
            try:
                scalar = float(s_txt.strip())
            except ValueError as exc:
                raise ConfigurationError(
                    f"bad scalar {s_txt.strip()!r} in generator spec"
                ) from exc
            term = term.strip()
        if term.startswith("catalog:"):
            name = term[len("catalog:"):].strip()
            family, k = _parse_group_name(name, None)
            f = restrict_to_sphere(invariant_polynomial(family, k))
            f = f.remove_linear()
            nrm = f.norm()
            if nrm == 0.0:
                raise ConfigurationError(
                    f"catalog polynomial {name!r} restricts to zero"
                )
            f = f * (1.0 / nrm)
        else:
            hit = _Y_PATTERN.fullmatch(term)
            if hit is None:
                raise ConfigurationError(f"bad generator term {term!r}")
            l, m = int(hit.group(1)), int(hit.group(2))
            if abs(m) > l:
                raise ConfigurationError(f"harmonic order |{m}| exceeds degree {l}")
            f = SphereFunction.harmonic(l, m)
        if f.l_max > l_max:
            raise ConfigurationError(
                f"term {term!r} needs l_max >= {f.l_max}, config has {l_max}"
            )
        total[: f.coeffs.shape[0]] += scalar * f.coeffs
    return SphereFunction(total, l_max)


def _equivariance_transform(spec: str, f: SphereFunction) -> OrthogonalTransform:
    """Transform to test equivariance against: a generator of the catalog
    group when the spec names one, otherwise a rotation about the t-axis."""
    for chunk in str(spec).split("+"):
        term = chunk.strip()
        if "*" in term:
            term = term.partition("*")[2].strip()
        if term.startswith("catalog:"):
            group = build_group(*_parse_group_name(term[len("catalog:"):], None))
            for g in group.generators:
                if np.abs(g.matrix - np.eye(3)).max() > 1e-12:
                    return g
    return OrthogonalTransform.rotation((0.0, 0.0, 1.0), 2.0 * math.pi / 5.0)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_funk_eigencheck(args) -> int:
    out_dir = _prepare_out(args.out)
    config, inputs = _load_config(args.config, {})
    manifest = RunManifest("funk-eigencheck", config.to_json_dict(), inputs)
    rows = eigencheck_table(l_max=config.l_max, n_angles=max(config.n_angles, 256))
    manifest.stage("eigencheck")
    passed = True
    for row in rows:
        tol = _EVEN_TOL if row["l"] % 2 == 0 else _ODD_TOL
        row["tolerance"] = tol
        row["passed"] = row["max_err"] < tol
        passed = passed and row["passed"]
    report_path = os.path.join(out_dir, "funk_eigencheck.json")
    _write_json(
        report_path,
        {
            "l_max": config.l_max,
            "rows": rows,
            "passed": passed,
            "tolerances": {"even_rel_err": _EVEN_TOL, "odd_max_abs": _ODD_TOL},
        },
    )
    manifest.add_output(report_path)
    manifest.stage("write")
    manifest.write(out_dir)
    print(f"funk-eigencheck: {'pass' if passed else 'FAIL'} ({report_path})")
    return 0 if passed else 2


def cmd_solve(args) -> int:
    out_dir = _prepare_out(args.out)
    overrides = {}
    if args.t is not None:
        overrides["t_values"] = sorted(float(v) for v in args.t.split(","))
    if args.tol_h is not None:
        overrides["tol_h"] = args.tol_h
    if args.scheme is not None:
        overrides["scheme"] = args.scheme
    config, inputs = _load_config(args.config, overrides)
    inputs["f_spec"] = hashlib.sha256(args.f.encode()).hexdigest()
    manifest = RunManifest("solve", config.to_json_dict(), inputs)

    f = parse_f_spec(args.f, config.l_max)
    manifest.stage("setup")
    try:
        states = continuation(f, config)
    except NonConvergenceError as exc:
        trace_path = os.path.join(out_dir, "residual_trace.json")
        _write_json(trace_path, {"error": str(exc), "trace": exc.trace})
        manifest.add_output(trace_path)
        manifest.write(out_dir)
        print(f"solve: non-convergence: {exc}", file=sys.stderr)
        return 3
    manifest.stage("continuation")

    slope = None
    positive = [s for s in states if s.t > 0]
    if len(positive) >= 2:
        slope = linear_deviation_order(positive)
    equiv = None
    if args.check_equivariance and states:
        A = _equivariance_transform(args.f, f)
        equiv = equivariance_check(states[-1], A)
        equiv["matrix"] = A.matrix.tolist()
    manifest.stage("diagnostics")

    all_passed = True
    report_rows = []
    for state in states:
        report = verify_zoll(
            state,
            slope_fit=slope,
            equivariance=equiv if state is states[-1] else None,
        )
        all_passed = all_passed and report.passed
        tag = f"{state.t:.6f}".replace(".", "p")
        state_path = os.path.join(out_dir, f"state_t{tag}.json")
        _write_json(
            state_path,
            {
                "t": state.t,
                "iterations": state.iterations,
                "converged": state.converged,
                "residual_h": state.residual_h,
                "residual_area": state.residual_area,
                "full_h": state.full_h,
                "psi": state.psi.to_json_dict(),
                "Phi": state.Phi.to_json_dict(),
                "trace": state.trace,
            },
        )
        manifest.add_output(state_path)
        report_path = os.path.join(out_dir, f"report_t{tag}.json")
        _write_json(report_path, report.to_json_dict())
        manifest.add_output(report_path)
        report_rows.append((state.t, report.passed, state_path, report_path))
        if args.format:
            ext = {"obj": "obj", "csv": "csv", "json": "curves.json"}[args.format]
            mesh_path = os.path.join(out_dir, f"surface_t{tag}.{ext}")
            export_embedding(state, args.format, mesh_path)
            manifest.add_output(mesh_path)
    manifest.stage("export")
    manifest.write(out_dir)
    for t, ok, _, _ in report_rows:
        print(f"solve t={t:g}: {'pass' if ok else 'FAIL'}")
    if slope is not None:
        print(f"solve: linear-deviation slope {slope:.3f}")
    return 0 if all_passed else 2


def cmd_symmetry(args) -> int:
    out_dir = _prepare_out(args.out)
    manifest = RunManifest(
        "symmetry", {"group": args.group, "n": args.n, "verify": args.verify}
    )
    try:
        family, k = _parse_group_name(args.group, args.n)
    except ConfigurationError as exc:
        print(f"symmetry: {exc}", file=sys.stderr)
        return 64
    try:
        if args.verify:
            entry = catalog_entry(family, k)
            payload = entry.to_json_dict()
            payload["verification"] = {
                "element_route": entry.report.element_route,
                "max_element_margin": entry.report.max_element_margin,
                "witness_margins": list(entry.report.witness_margins),
                "scale": entry.report.scale,
                "passed": True,
            }
            name = entry.name
        else:
            group = build_group(family, k)
            P = invariant_polynomial(family, k)
            payload = {
                "group": group.name,
                "order": group.order,
                "degree": P.degree(),
                "poly": P.coefficient_rows(),
                "witnesses": [],
            }
            name = group.name
    except CatalogIntegrityError as exc:
        report_path = os.path.join(out_dir, "symmetry_failure.json")
        _write_json(report_path, {"group": args.group, "error": str(exc)})
        manifest.add_output(report_path)
        manifest.write(out_dir)
        print(f"symmetry: integrity failure: {exc}", file=sys.stderr)
        return 2
    manifest.stage("verify" if args.verify else "build")
    safe = name.replace("[", "_in_")
    report_path = os.path.join(out_dir, f"symmetry_{safe}.json")
    _write_json(report_path, payload)
    manifest.add_output(report_path)
    manifest.write(out_dir)
    print(
        f"symmetry {name}: order {payload['order']}, degree "
        f"{payload['degree']}{', verified' if args.verify else ''}"
    )
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(64, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="zollforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("funk-eigencheck", parents=[], help="round-state spectrum check")
    pe.add_argument("--config", default=None, help="config JSON path")
    pe.add_argument("--out", default="zollforge_out", help="output directory")
    pe.set_defaults(func=cmd_funk_eigencheck)

    ps = sub.add_parser("solve", help="continuation solve along t")
    ps.add_argument("--f", required=True, help="generator spec, e.g. Y3_0")
    ps.add_argument("--config", default=None)
    ps.add_argument("--t", default=None, help="comma list of t values")
    ps.add_argument("--tol-h", dest="tol_h", type=float, default=None)
    ps.add_argument("--scheme", choices=("hamilton", "gauss-newton"), default=None)
    ps.add_argument("--out", default="zollforge_out")
    ps.add_argument("--format", choices=("obj", "csv", "json"), default=None)
    ps.add_argument("--verify", action="store_true",
                    help="accepted for symmetry parity; solve always verifies")
    ps.add_argument("--check-equivariance", action="store_true")
    ps.set_defaults(func=cmd_solve)

    py = sub.add_parser("symmetry", help="catalog entry export / verification")
    py.add_argument("--group", required=True)
    py.add_argument("--n", type=int, default=None)
    py.add_argument("--verify", action="store_true")
    py.add_argument("--out", default="zollforge_out")
    py.set_defaults(func=cmd_symmetry)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"zollforge: {exc}", file=sys.stderr)
        return 64
    except ZollforgeError as exc:
        print(f"zollforge: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
