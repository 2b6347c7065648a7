"""Command-line front end binding the library into batch experiments.

Each subcommand reads a JSON config, runs one pipeline, and writes its
artifacts atomically under ``--out-dir`` together with a
``manifest.json`` recording the resolved configuration, its SHA-256
hash, the seed, the package versions, and the wall time.  Re-running a
command with the same config and seed reproduces every result file byte
for byte; the wall-time entry is the only manifest field that varies.

Exit codes: 0 on success, 1 on configuration or usage errors, 2 on
numerical failure (divergence or non-finite values).  Diagnostics are
single lines on stderr.

Configs are strict: unknown keys are rejected everywhere, as are
duplicate keys within one JSON object.  Non-finite floats appearing in
reports are serialized as the strings ``"nan"``, ``"inf"`` and
``"-inf"`` because JSON has no literals for them.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .anomaly import detect_anomalies
from .denoisers import make_denoiser, registry_names
from .dps import dps_sample
from .fileio import atomic_write_bytes, read_csv, read_pgm, write_csv, write_pgm
from .flow import sample_probability_flow
from .inverse import DivergenceError, InverseProblem, bridge_iterate, red_fixed_point
from .multiscale import Decomposition, decompose, recombine, reconstruct
from .operators import operator_from_config
from .properties import run_standard_checks
from .schedule import NoiseSchedule
from .signal import NoiseSpec, add_awgn, mse, psnr

__all__ = ["main"]


class _UsageError(Exception):
    """Raised by the argument parser instead of exiting the process."""


class _ConfigError(ValueError):
    """A config document failed validation."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse API
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# JSON plumbing


def _reject_duplicates(pairs):
    doc = {}
    for key, value in pairs:
        if key in doc:
            raise _ConfigError(f"duplicate key {key!r} in config")
        doc[key] = value
    return doc


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh, object_pairs_hook=_reject_duplicates)
    if not isinstance(doc, dict):
        raise _ConfigError("config root must be a JSON object")
    return doc


def _check_keys(cfg: dict, required: set, optional: set, where: str) -> None:
    missing = required - set(cfg)
    if missing:
        raise _ConfigError(f"{where}: missing keys {sorted(missing)}")
    unknown = set(cfg) - required - optional
    if unknown:
        raise _ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _jsonable(obj):
    """Recursively coerce to plain JSON data, spelling out non-finite floats."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if np.isnan(v):
            return "nan"
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _dump_json(doc) -> bytes:
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False)
    return (text + "\n").encode("utf-8")


def _write_json(path: str, doc) -> None:
    atomic_write_bytes(path, _dump_json(doc))


def _config_hash(resolved: dict) -> str:
    canonical = json.dumps(
        _jsonable(resolved), sort_keys=True, separators=(",", ":"), allow_nan=False
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _emit_manifest(
    out_dir: str,
    command: str,
    resolved: dict,
    seed,
    outputs: dict,
    started: float,
    results: dict | None = None,
) -> None:
    doc = {
        "command": command,
        "config": resolved,
        "config_sha256": _config_hash(resolved),
        "seed": seed,
        "versions": {
            "denoisekit": __version__,
            "numpy": np.__version__,
            "scipy": _scipy_version(),
            "python": platform.python_version(),
        },
        "outputs": outputs,
        "results": results or {},
        "wall_time_s": time.perf_counter() - started,
    }
    _write_json(os.path.join(out_dir, "manifest.json"), doc)


def _scipy_version() -> str:
    import scipy

    return scipy.__version__


# ---------------------------------------------------------------------------
# Shared pieces


def _out_dir(args) -> str:
    path = args.out_dir if args.out_dir is not None else "."
    os.makedirs(path, exist_ok=True)
    return path


def _resolve_seed(args, cfg: dict, required: bool) -> int | None:
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is None:
        if required:
            raise _ConfigError("a seed is required (--seed flag or 'seed' key)")
        return None
    return int(seed)


def _read_signal(path: str, shape=None) -> np.ndarray:
    if path.endswith(".pgm"):
        if shape is not None:
            raise _ConfigError("'shape' applies to CSV inputs only")
        return read_pgm(path)
    if path.endswith(".csv"):
        arr = read_csv(path)
        if shape is not None:
            shape = tuple(int(s) for s in shape)
            if len(shape) not in (1, 2):
                raise _ConfigError(f"'shape' must have 1 or 2 entries, got {shape}")
            if int(np.prod(shape)) != arr.size:
                raise _ConfigError(
                    f"'shape' {shape} does not match {arr.size} values in {path}"
                )
            arr = arr.reshape(shape)
        return arr
    raise _ConfigError(f"unsupported input extension (want .pgm or .csv): {path}")


def _denoiser_from_config(spec) -> object:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise _ConfigError(
            f"denoiser spec must be an object with a 'kind' among {registry_names()}"
        )
    options = {k: v for k, v in spec.items() if k != "kind"}
    return make_denoiser(spec["kind"], **options)


def _schedule_from_config(spec) -> NoiseSchedule:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise _ConfigError("schedule spec must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "geometric":
        _check_keys(
            spec, {"kind", "alpha_max", "alpha_min", "steps"}, set(), "schedule"
        )
        return NoiseSchedule.geometric(
            float(spec["alpha_max"]), float(spec["alpha_min"]), int(spec["steps"])
        )
    if kind == "linear_in_sigma":
        _check_keys(
            spec, {"kind", "sigma_max", "sigma_min", "steps"}, set(), "schedule"
        )
        return NoiseSchedule.linear_in_sigma(
            float(spec["sigma_max"]), float(spec["sigma_min"]), int(spec["steps"])
        )
    if kind == "explicit":
        _check_keys(spec, {"kind", "alphas"}, set(), "schedule")
        return NoiseSchedule.explicit([float(a) for a in spec["alphas"]])
    raise _ConfigError(f"unknown schedule kind {kind!r}")


def _write_signal_outputs(out_dir: str, name: str, arr: np.ndarray) -> dict:
    """Exact CSV always; clamped PGM preview alongside for 2D signals."""
    outputs = {}
    csv_name = f"{name}.csv"
    write_csv(os.path.join(out_dir, csv_name), arr)
    outputs["csv"] = csv_name
    if arr.ndim == 2:
        pgm_name = f"{name}.pgm"
        write_pgm(os.path.join(out_dir, pgm_name), arr)
        outputs["pgm"] = pgm_name
    return outputs


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_denoise(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    _check_keys(
        cfg,
        {"input", "denoiser", "alpha"},
        {"shape", "noise", "output", "seed"},
        "denoise config",
    )
    out_dir = _out_dir(args)
    clean = _read_signal(cfg["input"], cfg.get("shape"))
    noisy = clean
    if "noise" in cfg:
        noise_spec = cfg["noise"]
        _check_keys(noise_spec, {"sigma", "seed"}, set(), "noise spec")
        noisy = add_awgn(
            clean, NoiseSpec.from_sigma(float(noise_spec["sigma"])), int(noise_spec["seed"])
        )
    handle = _denoiser_from_config(cfg["denoiser"])
    alpha = float(cfg["alpha"])
    estimate = handle(noisy, alpha)

    name = cfg.get("output", "denoised")
    outputs = _write_signal_outputs(out_dir, name, estimate)
    residual = noisy - estimate
    results = {"residual_rms": float(np.sqrt(np.mean(residual**2)))}
    if "noise" in cfg:
        results["mse_vs_clean"] = mse(clean, estimate)
        results["psnr_vs_clean_db"] = psnr(clean, estimate)
    seed = _resolve_seed(args, cfg, required=False)
    _emit_manifest(out_dir, "denoise", cfg, seed, outputs, started, results)
    return 0


def _cmd_decompose(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    _check_keys(
        cfg,
        {"input", "denoiser", "alpha", "depth"},
        {"shape", "output_prefix", "seed"},
        "decompose config",
    )
    out_dir = _out_dir(args)
    arr = _read_signal(cfg["input"], cfg.get("shape"))
    handle = _denoiser_from_config(cfg["denoiser"])
    alpha = float(cfg["alpha"])
    depth = int(cfg["depth"])
    layers = decompose(handle, arr, alpha, depth)

    prefix = cfg.get("output_prefix", "layer")
    outputs = {}
    for k, residual in enumerate(layers.residuals, start=1):
        name = f"{prefix}_residual_{k:02d}.csv"
        write_csv(os.path.join(out_dir, name), residual)
        outputs[f"residual_{k:02d}"] = name
    base_name = f"{prefix}_base.csv"
    write_csv(os.path.join(out_dir, base_name), layers.base)
    outputs["base"] = base_name
    if arr.ndim == 2:
        preview = f"{prefix}_base.pgm"
        write_pgm(os.path.join(out_dir, preview), layers.base)
        outputs["base_preview"] = preview

    rebuilt = reconstruct(layers)
    results = {
        "depth": depth,
        "shape": list(arr.shape),
        "reconstruction_max_error": float(np.max(np.abs(rebuilt - arr))),
    }
    seed = _resolve_seed(args, cfg, required=False)
    _emit_manifest(out_dir, "decompose", cfg, seed, outputs, started, results)
    return 0


def _cmd_recombine(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    _check_keys(
        cfg,
        {"base", "residuals", "coefficients"},
        {"base_coefficient", "shape", "output", "seed"},
        "recombine config",
    )
    out_dir = _out_dir(args)
    shape = cfg.get("shape")
    base = _read_signal(cfg["base"], shape)
    residual_paths = cfg["residuals"]
    if not isinstance(residual_paths, list) or not residual_paths:
        raise _ConfigError("'residuals' must be a non-empty list of CSV paths")
    residuals = tuple(_read_signal(p, shape) for p in residual_paths)
    for k, residual in enumerate(residuals, start=1):
        if residual.shape != base.shape:
            raise _ConfigError(
                f"residual {k} has shape {residual.shape}, base has {base.shape}"
            )
    layers = Decomposition(residuals=residuals, base=base, alpha=0.0)
    combined = recombine(
        layers,
        [float(c) for c in cfg["coefficients"]],
        base_coefficient=float(cfg.get("base_coefficient", 1.0)),
    )

    name = cfg.get("output", "recombined")
    outputs = _write_signal_outputs(out_dir, name, combined)
    seed = _resolve_seed(args, cfg, required=False)
    _emit_manifest(out_dir, "recombine", cfg, seed, outputs, started, {})
    return 0


def _cmd_verify(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config) if args.config else {}
    _check_keys(cfg, set(), {"denoiser", "alpha", "dim", "seed"}, "verify config")
    spec = cfg.get("denoiser")
    if args.denoiser is not None:
        spec = {"kind": args.denoiser}
    if spec is None:
        raise _ConfigError("verify needs --denoiser or a config with a 'denoiser'")
    alpha = args.alpha if args.alpha is not None else cfg.get("alpha")
    if alpha is None:
        raise _ConfigError("verify needs --alpha or a config with an 'alpha'")
    alpha = float(alpha)
    dim = int(args.dim if args.dim is not None else cfg.get("dim", 16))
    seed = _resolve_seed(args, cfg, required=False)
    if seed is None:
        seed = 0

    handle = _denoiser_from_config(spec)
    reports = run_standard_checks(handle, alpha, dim=dim, seed=seed)
    payload = [r.to_dict() for r in reports]
    sys.stdout.write(_dump_json(payload).decode("utf-8"))

    if args.out_dir is not None:
        out_dir = _out_dir(args)
        _write_json(os.path.join(out_dir, "properties.json"), payload)
        resolved = {"denoiser": spec, "alpha": alpha, "dim": dim, "seed": seed}
        results = {r.name: bool(r.passed) for r in reports}
        _emit_manifest(
            out_dir, "verify", resolved, seed, {"properties": "properties.json"},
            started, results,
        )
    return 0


def _cmd_sample(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    _check_keys(
        cfg,
        {"denoiser", "schedule", "n_samples", "dim"},
        {"seed", "target_variance", "output"},
        "sample config",
    )
    out_dir = _out_dir(args)
    handle = _denoiser_from_config(cfg["denoiser"])
    schedule = _schedule_from_config(cfg["schedule"])
    seed = _resolve_seed(args, cfg, required=True)
    target_variance = cfg.get("target_variance")
    samples = sample_probability_flow(
        handle,
        schedule,
        int(cfg["n_samples"]),
        int(cfg["dim"]),
        seed,
        target_variance=None if target_variance is None else float(target_variance),
    )
    stacked = np.stack(samples)

    name = cfg.get("output", "samples")
    csv_name = f"{name}.csv"
    write_csv(os.path.join(out_dir, csv_name), stacked)
    results = {
        "shape": list(stacked.shape),
        "terminal_mean": float(np.mean(stacked)),
        "terminal_variance": float(np.var(stacked)),
    }
    resolved = dict(cfg)
    resolved["seed"] = seed
    _emit_manifest(out_dir, "sample", resolved, seed, {"csv": csv_name}, started, results)
    return 0


_SOLVE_KEYS = {
    "red": (
        {"method", "y", "denoiser", "alpha", "lam", "operator"},
        {"n", "tol", "max_iter", "cg_rtol", "output", "seed"},
    ),
    "bridge": (
        {"method", "y", "denoiser", "alpha", "lam"},
        {"tol", "max_iter", "output", "seed"},
    ),
    "dps": (
        {"method", "y", "denoiser", "operator", "schedule", "rho"},
        {"rho_mode", "alpha", "lam", "n", "output", "seed"},
    ),
}


def _cmd_solve(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    method = cfg.get("method")
    if method not in _SOLVE_KEYS:
        raise _ConfigError(
            f"solve config needs a 'method' among {sorted(_SOLVE_KEYS)}"
        )
    required, optional = _SOLVE_KEYS[method]
    _check_keys(cfg, required, optional, f"solve config ({method})")
    out_dir = _out_dir(args)
    y = read_csv(cfg["y"])
    handle = _denoiser_from_config(cfg["denoiser"])
    name = cfg.get("output", "estimate")
    outputs = {}
    results = {"method": method}
    resolved = dict(cfg)
    seed = _resolve_seed(args, cfg, required=(method == "dps"))

    if method == "dps":
        n = int(cfg.get("n", y.size))
        operator = operator_from_config(cfg["operator"], n)
        schedule = _schedule_from_config(cfg["schedule"])
        problem = InverseProblem(
            operator=operator,
            y=y,
            denoiser=handle,
            alpha=float(cfg.get("alpha", schedule.alpha_end)),
            lam=float(cfg.get("lam", 1.0)),
        )
        rho = cfg["rho"]
        rho = [float(r) for r in rho] if isinstance(rho, list) else float(rho)
        estimate = dps_sample(
            problem, schedule, rho, seed, rho_mode=cfg.get("rho_mode", "normalized")
        )
        resolved["seed"] = seed
        results["steps"] = schedule.steps
    else:
        alpha = float(cfg["alpha"])
        lam = float(cfg["lam"])
        tol = float(cfg.get("tol", 1e-10))
        max_iter = int(cfg.get("max_iter", 2000))
        if method == "red":
            n = int(cfg.get("n", y.size))
            operator = operator_from_config(cfg["operator"], n)
            problem = InverseProblem(
                operator=operator, y=y, denoiser=handle, alpha=alpha, lam=lam
            )
            solution = red_fixed_point(
                problem,
                tol=tol,
                max_iter=max_iter,
                cg_rtol=float(cfg.get("cg_rtol", 1e-10)),
            )
        else:
            solution = bridge_iterate(
                y, handle, alpha, lam, tol=tol, max_iter=max_iter
            )
        estimate = solution.estimate
        trace_name = f"{name}_objective_trace.csv"
        write_csv(os.path.join(out_dir, trace_name), np.asarray(solution.objective_trace))
        outputs["objective_trace"] = trace_name
        results["iterations"] = solution.iterations
        results["converged"] = bool(solution.converged)
        results["final_step"] = float(solution.final_step)

    csv_name = f"{name}.csv"
    write_csv(os.path.join(out_dir, csv_name), estimate)
    outputs["estimate"] = csv_name
    _emit_manifest(out_dir, "solve", resolved, seed, outputs, started, results)
    return 0


def _cmd_anomaly(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args.config)
    _check_keys(
        cfg,
        {"input", "denoiser", "alpha"},
        {"shape", "fdr_q", "output_prefix", "seed"},
        "anomaly config",
    )
    out_dir = _out_dir(args)
    arr = _read_signal(cfg["input"], cfg.get("shape"))
    handle = _denoiser_from_config(cfg["denoiser"])
    report = detect_anomalies(
        arr, handle, float(cfg["alpha"]), fdr_q=float(cfg.get("fdr_q", 0.1))
    )

    prefix = cfg.get("output_prefix", "anomaly")
    mask_name = f"{prefix}_mask.csv"
    z_name = f"{prefix}_zscores.csv"
    report_name = f"{prefix}_report.json"
    write_csv(os.path.join(out_dir, mask_name), report.mask.astype(np.float64))
    write_csv(os.path.join(out_dir, z_name), report.z_scores)
    flagged = [int(i) for i in np.flatnonzero(report.mask.ravel())]
    doc = {
        "n_flagged": report.n_flagged,
        "flagged_indices": flagged,
        "sigma_estimate": report.sigma_estimate,
        "threshold": report.threshold,
        "fdr_q": report.fdr_q,
        "degenerate_scale": bool(report.degenerate_scale),
        "shape": list(arr.shape),
    }
    _write_json(os.path.join(out_dir, report_name), doc)
    outputs = {"mask": mask_name, "zscores": z_name, "report": report_name}
    seed = _resolve_seed(args, cfg, required=False)
    _emit_manifest(
        out_dir, "anomaly", cfg, seed, outputs, started,
        {"n_flagged": report.n_flagged, "degenerate_scale": bool(report.degenerate_scale)},
    )
    return 0


# ---------------------------------------------------------------------------
# Entry point


def _build_parser() -> _Parser:
    parser = _Parser(prog="denoisekit", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("--out-dir", default=None, help="directory for artifacts")
    common.add_argument("--seed", type=int, default=None, help="overrides config seed")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, func, help_text: str, config_required: bool = True) -> _Parser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--config", required=config_required, help="JSON config path")
        p.set_defaults(func=func)
        return p

    add("denoise", _cmd_denoise, "apply one denoiser to a signal")
    add("decompose", _cmd_decompose, "split a signal into detail layers plus base")
    add("recombine", _cmd_recombine, "reweight stored layers into a new signal")
    verify = add("verify", _cmd_verify, "run the property battery", config_required=False)
    verify.add_argument("--denoiser", default=None, help="registered denoiser kind")
    verify.add_argument("--alpha", type=float, default=None, help="denoising strength")
    verify.add_argument("--dim", type=int, default=None, help="test-point dimension")
    add("sample", _cmd_sample, "draw samples by integrating the probability flow")
    add("solve", _cmd_solve, "denoiser-regularized inverse problem")
    add("anomaly", _cmd_anomaly, "flag residual outliers at a controlled FDR")
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (DivergenceError, FloatingPointError, OverflowError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
