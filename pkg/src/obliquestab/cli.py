"""Command-line surface: dispersion scans, perturbation tables, conjecture
harness runs, simulations, and post-hoc mode analysis.

Every file-emitting command requires ``--out DIR`` and writes a
``manifest.json`` there with the post-merge configuration, the package
version, and the command line, so a run is reproducible from its output
directory alone.  Exit codes: 0 success, 1 runtime/numerical failure (with
partial artifacts), 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, fileio, matkit, perturb, solver, stability, swe
from .solver import Grid2D, RunConfig
from .swe import SweParams


class ConfigError(Exception):
    pass


def _set_threads(n):
    if n and n > 0:
        import numba

        try:
            numba.set_num_threads(n)
        except ValueError as err:
            raise ConfigError(f"invalid thread count {n}: {err}") from None


def _ensure_outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(outdir: Path, args, merged: dict, **extra):
    manifest = {
        "command": args.command,
        "argv": list(getattr(args, "_argv", [])),
        "config": merged,
        "version": __version__,
    }
    manifest.update(extra)
    fileio.write_json(outdir / "manifest.json", manifest)


def _parse_matrix(text, name):
    try:
        m = np.asarray(json.loads(text), dtype=np.float64)
    except (json.JSONDecodeError, TypeError, ValueError) as err:
        raise ConfigError(f"could not parse matrix {name}: {err}") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"matrix {name} must be square, got shape {m.shape}")
    return m


def _load_matrices(args, names):
    mats = {}
    if args.matrix_file:
        try:
            with open(args.matrix_file) as fh:
                payload = json.load(fh)
        except OSError as err:
            raise ConfigError(f"cannot read matrix file: {err}") from None
        except json.JSONDecodeError as err:
            raise ConfigError(
                f"malformed matrix file {args.matrix_file}: line {err.lineno} col {err.colno}: {err.msg}"
            ) from None
        for name in names:
            if name in payload:
                mats[name] = _parse_matrix(json.dumps(payload[name]), name)
    for name in names:
        inline = getattr(args, name.lower(), None)
        if inline is not None:
            mats[name] = _parse_matrix(inline, name)
    return mats


# --- dispersion ----------------------------------------------------------------


def cmd_dispersion(args) -> int:
    _set_threads(args.threads)
    out = _ensure_outdir(args)
    eps_list = args.eps or [1.0]
    gamma_list = args.gamma or [0.5]
    k_grid = stability.default_k_grid(args.k_max, args.k_points)
    summary = {}
    for eps in eps_list:
        params = SweParams(g=args.g, h0=args.h0, eps=eps, delta=args.delta)
        for gamma in gamma_list:
            spec = stability.swe_oblique_spec(params, gamma)
            if args.reflect_y:
                spec = spec.reflect_y()
            curve = stability.growth_curve(spec, k_grid)
            tag = f"eps{eps:g}_gamma{gamma:g}"
            fileio.write_growth_curve(out / f"dispersion_{tag}.csv", curve)
            interval = curve.positive_interval()
            summary[tag] = {
                "eps": eps,
                "gamma": gamma,
                "max_sigma": curve.max_sigma,
                "argmax_k": curve.argmax_k,
                "positive_interval": list(interval) if interval else None,
            }
    fileio.write_json(out / "summary.json", summary)
    _write_manifest(
        out,
        args,
        {
            "g": args.g,
            "h0": args.h0,
            "delta": args.delta,
            "eps": list(eps_list),
            "gamma": list(gamma_list),
            "k_max": args.k_max,
            "k_points": args.k_points,
            "reflect_y": bool(args.reflect_y),
            "threads": args.threads,
        },
    )
    return 0


# --- perturb -------------------------------------------------------------------


def cmd_perturb(args) -> int:
    out = _ensure_outdir(args)
    mats = _load_matrices(args, ("A", "C"))
    if "A" not in mats or "C" not in mats:
        raise ConfigError("perturb needs matrices A and C (inline or via --matrix-file)")
    a, c = mats["A"], mats["C"]
    merged = {
        "A": a.tolist(),
        "C": c.tolist(),
        "fd_delta": args.fd_delta,
    }
    try:
        general = perturb.corrections_general(a, c)
        methods = {"general": general}
        if a.shape[0] == 2:
            methods["closed_n2"] = perturb.closed_form_n2(a, c)
        if a.shape[0] == 3:
            methods["closed_n3"] = perturb.closed_form_n3(a, c)
        methods["eigvec_oracle"] = perturb.eigvec_oracle(a, c)
        methods["fd_oracle"] = perturb.fd_oracle(a, c, args.fd_delta)
    except perturb.RepeatedEigenvalueError as err:
        fileio.write_json(out / "perturb_refusal.json", {"refused": True, "reason": str(err)})
        _write_manifest(out, args, merged, status="refused")
        print(f"refused: {err}", file=sys.stderr)
        return 1
    ref = general.base_eigenvalues
    aligned = {name: perturb.align_to(res, ref) for name, res in methods.items()}
    exact = {k: v for k, v in aligned.items() if k not in ("fd_oracle",)}
    disc = 0.0
    scale = 1.0 + max(np.abs(r.corrections).max() for r in exact.values())
    for name, res in exact.items():
        disc = max(disc, float(np.abs(res.corrections - general.corrections).max() / scale))
    table = {
        "eigenvalues": fileio.to_jsonable(ref.tolist()),
        "corrections": {
            name: fileio.to_jsonable(res.corrections.tolist()) for name, res in aligned.items()
        },
        "max_relative_discrepancy_exact_methods": disc,
        "fd_delta": args.fd_delta,
    }
    fileio.write_json(out / "perturb_table.json", table)
    _write_manifest(out, args, merged, status="ok")
    return 0


# --- conjecture ----------------------------------------------------------------


def _builtin_conjecture_cases(args):
    cases = []
    for eps in (1.0, 5.0):
        params = SweParams(g=args.g, h0=args.h0, eps=eps, delta=args.delta)
        cases.append((f"builtin_eps{eps:g}", stability.swe_oblique_spec(params, 0.5)))
    return cases


def cmd_conjecture(args) -> int:
    _set_threads(args.threads)
    out = _ensure_outdir(args)
    k_grid = stability.default_k_grid(args.k_max, args.k_points)
    gamma_grid = stability.default_gamma_grid(args.gamma_points)
    merged = {
        "kind": args.kind,
        "random": args.random,
        "seed": args.seed,
        "n_dim": args.n_dim,
        "visc_mode": args.visc_mode,
        "k_max": args.k_max,
        "k_points": args.k_points,
        "gamma_points": args.gamma_points,
        "g": args.g,
        "h0": args.h0,
        "delta": args.delta,
        "threads": args.threads,
    }

    mats = _load_matrices(args, ("A", "B", "C", "D"))
    reports = {}
    counts = {"consistent": 0, "vacuous": 0, "counterexample": 0}
    counterexamples = {}

    def record_axis(name, spec):
        rep = stability.check_axis_combination_conjecture(spec, k_grid, gamma_grid, label=name)
        reports[name] = fileio.to_jsonable(rep)
        counts[rep.verdict.lower() if rep.verdict != "COUNTEREXAMPLE" else "counterexample"] += 1
        if rep.verdict == "COUNTEREXAMPLE":
            counterexamples[name] = {
                "A": spec.a.tolist(),
                "B": spec.b.tolist(),
                "C": spec.c.tolist(),
                "D": spec.d.tolist(),
                "gamma_grid": gamma_grid.tolist(),
            }

    def record_longwave(name, a, c):
        try:
            rep = stability.check_longwave_sign_conjecture(a, c, k_grid)
        except (stability.AdmissibilityError, perturb.RepeatedEigenvalueError) as err:
            reports[name] = {"refused": True, "reason": str(err)}
            return
        reports[name] = fileio.to_jsonable(rep)
        disagree = (not rep.agrees_positive_orientation) and (not rep.agrees_negative_orientation)
        if disagree:
            counts["counterexample"] += 1
            counterexamples[name] = {"A": a.tolist(), "C": c.tolist()}
        else:
            counts["consistent"] += 1

    if args.random:
        if args.seed is None:
            raise ConfigError("--random requires --seed")
        for i in range(args.random):
            seed = args.seed + i
            if args.kind in ("axis-oblique", "both"):
                quad = stability.sample_admissible(
                    seed, args.n_dim, mode=args.visc_mode, kind="quadruple"
                )
                spec = stability.ObliqueSpec(*quad, gamma=0.5)
                record_axis(f"random_axis_{seed}", spec)
            if args.kind in ("longwave-signs", "both"):
                a, c = stability.sample_admissible(seed, args.n_dim, mode=args.visc_mode)
                record_longwave(f"random_longwave_{seed}", a, c)
    elif mats:
        if args.kind in ("axis-oblique", "both"):
            missing = [n for n in ("A", "B", "C", "D") if n not in mats]
            if missing:
                raise ConfigError(f"axis-oblique check needs matrices {missing}")
            record_axis(
                "explicit_axis",
                stability.ObliqueSpec(mats["A"], mats["B"], mats["C"], mats["D"], gamma=0.5),
            )
        if args.kind in ("longwave-signs", "both"):
            if "A" not in mats or "C" not in mats:
                raise ConfigError("longwave-signs check needs matrices A and C")
            record_longwave("explicit_longwave", mats["A"], mats["C"])
    else:
        # built-in lake-at-rest regimes
        if args.kind in ("axis-oblique", "both"):
            for name, spec in _builtin_conjecture_cases(args):
                record_axis(name, spec)
        if args.kind in ("longwave-signs", "both"):
            params1 = SweParams(g=args.g, h0=args.h0, eps=1.0, delta=args.delta)
            a_mat, _ = swe.advection_matrices(params1)
            _, d_mat = swe.viscosity_matrices(params1)
            record_longwave("builtin_longwave_scalar", a_mat, np.eye(3))
            record_longwave("builtin_longwave_coupled", a_mat, d_mat)

    fileio.write_json(out / "conjecture_reports.json", reports)
    fileio.write_json(out / "aggregate.json", counts)
    if counterexamples:
        fileio.write_json(out / "counterexamples.json", counterexamples)
    _write_manifest(out, args, merged, counts=counts)
    return 0


# --- simulate ------------------------------------------------------------------

_SIM_DEFAULTS = {
    "mode": "linear",
    "g": 10.0,
    "h0": 1.0,
    "eps": 1.0,
    "delta": 5.0,
    "nx": 300,
    "ny": 300,
    "x_min": -30.0,
    "x_max": 30.0,
    "y_min": -30.0,
    "y_max": 30.0,
    "t_final": 150.0,
    "cfl_number": 0.4,
    "snapshot_times": [],
    "diag_interval": 0.5,
    "snapshot_format": "csv",
    "characteristic_reconstruction": False,
}


def _merge_sim_config(args) -> dict:
    merged = dict(_SIM_DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except OSError as err:
            raise ConfigError(f"cannot read config file: {err}") from None
        except json.JSONDecodeError as err:
            raise ConfigError(
                f"malformed config file {args.config}: line {err.lineno}: {err.msg}"
            ) from None
        unknown = set(file_cfg) - set(_SIM_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    overrides = {
        "mode": args.mode,
        "g": args.g,
        "h0": args.h0,
        "eps": args.eps,
        "delta": args.delta,
        "nx": args.nx,
        "ny": args.ny,
        "x_min": args.x_min,
        "x_max": args.x_max,
        "y_min": args.y_min,
        "y_max": args.y_max,
        "t_final": args.t_final,
        "cfl_number": args.cfl_number,
        "diag_interval": args.diag_interval,
        "snapshot_format": args.snapshot_format,
    }
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    if args.snapshot_times is not None:
        try:
            merged["snapshot_times"] = [
                float(tok) for tok in args.snapshot_times.split(",") if tok.strip()
            ]
        except ValueError:
            raise ConfigError(f"bad --snapshot-times {args.snapshot_times!r}") from None
    if args.characteristic:
        merged["characteristic_reconstruction"] = True
    if args.full_horizon:
        merged["t_final"] = 250.0
    return merged


def _run_config_from_merged(merged: dict) -> RunConfig:
    try:
        params = SweParams(g=merged["g"], h0=merged["h0"], eps=merged["eps"], delta=merged["delta"])
        grid = Grid2D(
            nx=int(merged["nx"]),
            ny=int(merged["ny"]),
            x_min=merged["x_min"],
            x_max=merged["x_max"],
            y_min=merged["y_min"],
            y_max=merged["y_max"],
        )
        return RunConfig(
            mode=merged["mode"],
            params=params,
            grid=grid,
            t_final=merged["t_final"],
            cfl_number=merged["cfl_number"],
            snapshot_times=tuple(merged["snapshot_times"]),
            diag_interval=merged["diag_interval"],
            snapshot_format=merged["snapshot_format"],
            characteristic_reconstruction=bool(merged["characteristic_reconstruction"]),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from None


def cmd_simulate(args) -> int:
    _set_threads(args.threads)
    out = _ensure_outdir(args)
    merged = _merge_sim_config(args)
    config = _run_config_from_merged(merged)
    result = solver.run(config)
    for snap in result.snapshots:
        for comp, name in ((snap.h, "h"), (snap.q, "q"), (snap.p, "p")):
            path = out / f"snapshot_{name}_t{snap.t:012.6f}.{config.snapshot_format}"
            fileio.write_snapshot(path, comp, snap.t, config.grid, config.snapshot_format)
    fileio.write_diagnostics(out / "diagnostics.csv", result.diagnostics)
    _write_manifest(
        out,
        args,
        merged,
        termination=result.termination,
        dt_summary=result.dt_summary,
        final_time=result.final.t,
        threads=args.threads,
    )
    if result.termination != "completed":
        print(
            f"run terminated early: {result.termination} at t={result.final.t:g} "
            f"(partial artifacts written)",
            file=sys.stderr,
        )
        return 1
    return 0


# --- modes ---------------------------------------------------------------------


def cmd_modes(args) -> int:
    try:
        meta, field = fileio.read_snapshot(args.snapshot)
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read snapshot: {err}") from None
    try:
        mode = solver.dominant_mode(field)
    except ValueError as err:
        print(f"mode analysis failed: {err}", file=sys.stderr)
        return 1
    payload = {
        "snapshot": str(args.snapshot),
        "t": meta["t"],
        "kx": mode.kx,
        "ky": mode.ky,
        "angle_deg": float(np.degrees(np.arctan2(mode.ky, mode.kx))),
        "energy_fraction": mode.energy_fraction,
        "low_confidence": mode.low_confidence,
    }
    print(json.dumps(fileio.to_jsonable(payload), indent=2, sort_keys=True))
    if args.out:
        out = _ensure_outdir(args)
        fileio.write_json(out / "modes.json", payload)
        _write_manifest(out, args, {"snapshot": str(args.snapshot)})
    return 0


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obliquestab",
        description="Stability scans, eigenvalue perturbation tables, conjecture "
        "harnesses, and periodic 2-D shallow-water simulations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_params(p):
        p.add_argument("--g", type=float, default=10.0, help="gravity")
        p.add_argument("--h0", type=float, default=1.0, help="reference depth")
        p.add_argument("--delta", type=float, default=5.0, help="viscosity coupling")

    def add_threads(p):
        p.add_argument("--threads", type=int, default=0, help="worker threads (0 = auto)")

    p = sub.add_parser("dispersion", help="growth-rate curves sigma(k)")
    add_common_params(p)
    p.add_argument("--eps", type=float, action="append", help="viscosity scale (repeatable)")
    p.add_argument("--gamma", type=float, action="append", help="direction in [0,1] (repeatable)")
    p.add_argument("--k-max", type=float, default=10.0)
    p.add_argument("--k-points", type=int, default=1000)
    p.add_argument("--reflect-y", action="store_true", help="scan with B -> -B (other half-circle)")
    p.add_argument("--out", required=True)
    add_threads(p)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("perturb", help="first-order eigenvalue correction table")
    p.add_argument("--matrix-file", help="JSON file with matrices A and C")
    p.add_argument("--a", help="inline JSON matrix A")
    p.add_argument("--c", help="inline JSON matrix C")
    p.add_argument("--fd-delta", type=float, default=1e-5)
    p.add_argument("--out", required=True)
    add_threads(p)
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("conjecture", help="stability conjecture harness")
    add_common_params(p)
    p.add_argument("--kind", choices=("axis-oblique", "longwave-signs", "both"), default="both")
    p.add_argument("--matrix-file", help="JSON file with matrices (A,B,C,D or A,C)")
    p.add_argument("--a", help="inline JSON matrix A")
    p.add_argument("--b", help="inline JSON matrix B")
    p.add_argument("--c", help="inline JSON matrix C")
    p.add_argument("--d", help="inline JSON matrix D")
    p.add_argument("--random", type=int, help="number of random samples")
    p.add_argument("--seed", type=int, help="base seed for --random")
    p.add_argument("--n-dim", type=int, default=2, choices=(2, 3, 4))
    p.add_argument(
        "--visc-mode",
        choices=("spd_viscosity", "positive_spectrum_viscosity"),
        default="spd_viscosity",
    )
    p.add_argument("--k-max", type=float, default=10.0)
    p.add_argument("--k-points", type=int, default=500)
    p.add_argument("--gamma-points", type=int, default=51)
    p.add_argument("--out", required=True)
    add_threads(p)
    p.set_defaults(func=cmd_conjecture)

    p = sub.add_parser("simulate", help="run the 2-D periodic simulator")
    p.add_argument("--config", help="JSON config file (flags override)")
    p.add_argument("--mode", choices=("linear", "nonlinear"))
    # no argparse defaults here: absent flags must not mask config-file values
    p.add_argument("--g", type=float)
    p.add_argument("--h0", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--x-min", type=float)
    p.add_argument("--x-max", type=float)
    p.add_argument("--y-min", type=float)
    p.add_argument("--y-max", type=float)
    p.add_argument("--t-final", type=float)
    p.add_argument("--cfl-number", type=float)
    p.add_argument("--snapshot-times", help="comma-separated times, hit exactly")
    p.add_argument("--diag-interval", type=float)
    p.add_argument("--snapshot-format", choices=("csv", "bin"))
    p.add_argument(
        "--characteristic",
        action="store_true",
        help="characteristic-wise reconstruction (nonlinear mode)",
    )
    p.add_argument(
        "--full-horizon",
        action="store_true",
        help="run to the long reference horizon t=250",
    )
    p.add_argument("--out", required=True)
    add_threads(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("modes", help="dominant Fourier mode of a snapshot file")
    p.add_argument("snapshot")
    p.add_argument("--out")
    add_threads(p)
    p.set_defaults(func=cmd_modes)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except (
        matkit.RootConvergenceError,
        stability.ScanError,
        stability.SamplingBudgetError,
        stability.AdmissibilityError,
        perturb.AmbiguousMatchError,
        swe.DepthFloorError,
        solver.BlowUpError,
    ) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
