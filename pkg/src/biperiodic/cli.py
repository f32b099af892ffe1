"""Command-line entry point: ``biperiodic <command> --config FILE [--out DIR]``.

Every command writes ``manifest.json`` (full resolved configuration,
tolerances and the list of produced files) next to its own outputs.  Outputs
contain no timestamps, so identical configurations and seeds reproduce them
byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from biperiodic import __version__
from biperiodic.config import SCHEMA_VERSION, ConfigError, RunConfig, load_config

log = logging.getLogger("biperiodic")

COMMANDS = ("solve", "check-material", "scan-k", "audit", "oracle-compare")

TOLERANCES = {
    "linear_residual": 1e-10,
    "rayleigh_wood_offset": 1e-6,
    "threshold_beta": 1e-8,
    "poincare_pass": 1e-10,
}


class _Writer:
    def __init__(self, out: Path):
        self.out = out
        self.files: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def json(self, name: str, payload: dict):
        payload = {"schema_version": SCHEMA_VERSION, **payload}
        text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
        (self.out / name).write_text(text)
        self.files.append(name)

    def csv(self, name: str, header: list[str], rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        buf.write(f"# schema_version={SCHEMA_VERSION}\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        (self.out / name).write_text(buf.getvalue())
        self.files.append(name)

    def binary(self, name: str, array: np.ndarray):
        (self.out / name).write_bytes(np.ascontiguousarray(array, dtype="<c16").tobytes())
        self.files.append(name)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.floating):
        v = float(v)
    if isinstance(v, float) and not np.isfinite(v):
        return repr(v)
    return v


def _material(cfg: RunConfig, base: Path):
    return cfg.material.build(base)


def _source(cfg: RunConfig):
    if cfg.source is None:
        raise ConfigError("this command needs a 'source' section")
    return cfg.source.build()


def _discrete(cfg, m, source):
    from biperiodic.discretization import build_mesh
    from biperiodic.fourier import build_lattice

    d = cfg.discretization
    lattice = build_lattice(d.N, source.alpha, source.k)
    mesh = build_mesh(m.h, d.M, m.breakpoints, d.quad_order)
    return lattice, mesh


# ---------------------------------------------------------------------------
# commands


def cmd_solve(cfg: RunConfig, m, w: _Writer, results: dict, threads: int):
    from biperiodic.discretization import assemble_system
    from biperiodic.postprocess import GridSpec, energy_report, field_export, rayleigh_coefficients
    from biperiodic.solver import solve

    source = _source(cfg)
    lattice, mesh = _discrete(cfg, m, source)
    system = assemble_system(m, lattice, mesh, cfg.rho_value(m), source)
    rep = solve(system, tol=TOLERANCES["linear_residual"])
    H = rep.solution
    w.json("rayleigh.json", rayleigh_coefficients(H).to_dict())
    energy = energy_report(H, source)
    w.csv(
        "flux.csv",
        ["n1", "n2", "beta", "flux", "relative_flux"],
        [[r["n1"], r["n2"], r["beta"], r["flux"], r["relative_flux"]] for r in energy.to_rows()],
    )
    z = np.linspace(0.0, m.h, cfg.export.nz)
    grid = GridSpec(max(cfg.export.resolution, 2 * lattice.truncation_order + 1), z)
    field = field_export(H, grid)
    w.binary("field.bin", field)
    w.json(
        "field.json",
        {
            "dtype": "<c16",
            "shape": list(field.shape),
            "axes": ["x1", "x2", "x3", "component"],
            "x1": {"start": 0.0, "step": 2 * np.pi / grid.resolution, "count": grid.resolution},
            "x2": {"start": 0.0, "step": 2 * np.pi / grid.resolution, "count": grid.resolution},
            "x3": z.tolist(),
            "frame": "physical (multiplied by exp(i alpha.x))",
            "alpha": lattice.alpha.tolist(),
        },
    )
    results.update(
        {
            "linear_residual": rep.linear_residual,
            "divergence_residual": rep.divergence_residual,
            "dtn_residual": rep.dtn_residual,
            "energy_balance": energy.balance,
            "stats": rep.stats,
        }
    )


def cmd_check_material(cfg: RunConfig, m, w: _Writer, results: dict, threads: int):
    from biperiodic.material import check_conditions

    rep = check_conditions(m, cfg.condition_density)
    w.json("conditions.json", {"status": "PASS" if rep.all_pass else "FAIL", "material": m.description, **rep.to_dict()})
    results["status"] = "PASS" if rep.all_pass else "FAIL"


def cmd_scan_k(cfg: RunConfig, m, w: _Writer, results: dict, threads: int):
    from biperiodic.solver import refine_scan, scan_k

    s = cfg.scan
    d = cfg.discretization
    rho = "default" if cfg.rho == "default" else complex(cfg.rho.re, cfg.rho.im)
    curve = scan_k((s.k_min, s.k_max, s.count), m, d.N, d.M, rho, alpha=s.alpha, workers=threads)
    w.csv(
        "scan.csv",
        ["k", "sigma_min", "threshold_flag"],
        zip(curve.k, curve.sigma_min, curve.threshold_flag),
    )
    results["points"] = int(curve.k.size)
    if curve.k.size:
        results["median_sigma_min"] = curve.median()
        results["dip_depth_orders"] = curve.dip_depth()
    if s.refine and curve.k.size >= 3:
        ref = refine_scan(curve, m, d.N, d.M, rho, alpha=s.alpha, top=s.refine)
        results["refined_minima"] = [{"k": k, "sigma_min": v} for k, v in ref]


def cmd_audit(cfg: RunConfig, m, w: _Writer, results: dict, threads: int):
    from biperiodic import audit as au
    from biperiodic.discretization import build_mesh
    from biperiodic.fourier import build_lattice

    a = cfg.audit
    rng = np.random.default_rng(cfg.seed)
    out = {}
    # pointwise curl splitting
    worst = 0.0
    for _ in range(a.random_fields):
        F = au.random_trig_field(rng)
        pts = rng.uniform(0, 1, (16, 3)) * [2 * np.pi, 2 * np.pi, m.h]
        worst = max(worst, au.audit_curl_decomposition(F, pts).residual)
    out["curl_decomposition"] = {"fields": a.random_fields, "max_residual": worst}
    # Poincare-type inequality
    nodes = np.sort(np.concatenate([[0.0, m.h], rng.uniform(0, m.h, 30)]))
    ratios = []
    for _ in range(a.poincare_samples):
        vals = rng.normal(size=(2, nodes.size)) + 1j * rng.normal(size=(2, nodes.size))
        vals[:, 0] = 0
        ratios.append(au.audit_poincare(au.NodalScalar(nodes, vals)).residual)
    lin = au.audit_poincare((lambda z: z / m.h, lambda z: np.full_like(z, 1 / m.h)), m.h)
    sine = au.audit_poincare(
        (lambda z: np.sin(np.pi * z / (2 * m.h)), lambda z: np.pi / (2 * m.h) * np.cos(np.pi * z / (2 * m.h))), m.h
    )
    out["poincare"] = {
        "samples": a.poincare_samples,
        "max_ratio": float(max(ratios)),
        "linear_ratio": lin.residual,
        "sine_ratio": sine.residual,
    }
    # Garding fit
    alpha = cfg.source.build().alpha if cfg.source is not None else np.zeros(2)
    d = cfg.discretization
    mesh = build_mesh(m.h, d.M, m.breakpoints, d.quad_order)
    out["garding"] = [
        au.garding_audit(m, build_lattice(d.N, alpha, k), mesh, cfg.rho_value(m), samples=a.garding_samples, rng=rng).to_dict()
        for k in a.garding_k
    ]
    # integral identities on a manufactured field
    H = au.random_trig_field(rng, n_terms=3, max_mode=2, max_degree=3)
    for name, fn in (("lemma2", au.audit_lemma2), ("lemma1", au.audit_lemma1)):
        out[name] = au.convergence_study(fn, H, m, tuple(a.identity_elements), lateral=a.lateral).to_dict()
    w.json("audits.json", out)
    results["audits"] = sorted(out)


def cmd_oracle_compare(cfg: RunConfig, m, w: _Writer, results: dict, threads: int):
    from biperiodic.discretization import assemble_system, specular_index
    from biperiodic.oracle import layered_from_material, layered_solve
    from biperiodic.postprocess import energy_report
    from biperiodic.solver import solve

    source = _source(cfg)
    lattice, mesh = _discrete(cfg, m, source)
    system = assemble_system(m, lattice, mesh, cfg.rho_value(m), source)
    H = solve(system).solution
    ref = layered_solve(layered_from_material(m), source, cfg.oracle.resolution)
    ours = H.top()[specular_index(source, lattice)]
    err = float(np.linalg.norm(ours - ref.scattered) / np.linalg.norm(ref.scattered)) if np.linalg.norm(ref.scattered) else float(np.linalg.norm(ours))
    payload = {
        "solver_coefficient": ours,
        "oracle_coefficient": ref.scattered,
        "relative_error": err,
        "solver_balance": energy_report(H, source).balance,
        "oracle_balance": ref.balance,
    }
    w.json("oracle_compare.json", payload)
    results.update({"relative_error": err, "oracle_balance": ref.balance})


HANDLERS = {
    "solve": cmd_solve,
    "check-material": cmd_check_material,
    "scan-k": cmd_scan_k,
    "audit": cmd_audit,
    "oracle-compare": cmd_oracle_compare,
}


def run(cfg: RunConfig, command: str, out: Path, *, base: Path = Path("."), threads: int = 1) -> int:
    """Runs one command; returns the process exit status."""
    w = _Writer(out)
    results: dict = {}
    status = 0
    error = None
    try:
        m = _material(cfg, base)
        HANDLERS[command](cfg, m, w, results, threads)
    except ConfigError as exc:
        error = {"kind": "config", "message": str(exc)}
        status = 2
    except Exception as exc:  # noqa: BLE001 - reported in the diagnostic file
        error = {"kind": type(exc).__name__, "message": str(exc)}
        sigma = getattr(exc, "sigma_min", None)
        if sigma is not None:
            error["sigma_min"] = sigma
        status = 1
    if error is not None:
        w.json("diagnostics.json", error)
        print(f"error: {error['message']}", file=sys.stderr)
    manifest = {
        "command": command,
        "version": __version__,
        "config": cfg.model_dump(mode="json", by_alias=True),
        "tolerances": TOLERANCES,
        "results": results,
        "status": "ok" if status == 0 else "error",
        "outputs": sorted(w.files) + ["manifest.json"],
    }
    w.json("manifest.json", manifest)
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="biperiodic", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, type=Path, help="YAML run configuration")
    p.add_argument("--out", type=Path, default=None, help="output directory (default: config output_dir or ./out)")
    p.add_argument("--seed", type=int, default=None, help="override the configuration seed")
    p.add_argument("--threads", type=int, default=1, help="parallel workers for wave-number scans")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"{args.config}: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})
    if args.threads < 1:
        print("--threads must be at least 1", file=sys.stderr)
        return 2
    out = args.out or Path(cfg.output_dir or "out")
    return run(cfg, args.command, out, base=args.config.parent, threads=args.threads)


if __name__ == "__main__":
    sys.exit(main())
