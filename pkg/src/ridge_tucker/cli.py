"""Command-line front end: ``generate``, ``decompose``, ``benchmark``, ``verify``.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
Options may also come from ``--config file.json``; explicit flags win.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .als import AlsConfig, AlsResult, TuckerModel, als, check_ranks, random_model
from .linalg import NumericalError
from .sketch import SketchConfig
from .tensor import read_csv_tensor, read_tensor, rmse, write_tensor

log = logging.getLogger("ridge_tucker")

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
LARGE_TENSOR_BYTES = 2**30

HISTORY_COLUMNS = ["iteration", "step", "loss", "rmse"]
TIMING_COLUMNS = ["step_type", "mean_seconds", "iterations"]


class UsageError(Exception):
    pass


@dataclass
class RunSpec:
    input: Path | None = None
    shape: tuple[int, ...] | None = None
    planted_ranks: tuple[int, ...] = (8, 8, 8)
    noise_fraction: float = 0.01
    noise_sigma: float = 1.0
    ranks: tuple[int, ...] = (2, 2, 2)
    lam: float = 0.001
    mode: str = "exact"
    epsilon: float = 0.1
    delta: float = 0.1
    seed: int = 0
    max_iterations: int = 50
    tol: float = 1e-6
    sample_override: int | None = None
    out_dir: Path = field(default_factory=lambda: Path("."))

    def __post_init__(self):
        if not 0 <= self.noise_fraction <= 1:
            raise UsageError("noise fraction must lie in [0, 1]")
        if self.mode not in ("exact", "sketched"):
            raise UsageError(f"unknown mode {self.mode!r}")

    def als_config(self) -> AlsConfig:
        core = "exact"
        if self.mode == "sketched":
            core = SketchConfig(self.epsilon, self.delta, self.lam, self.sample_override, self.seed)
        return AlsConfig(self.max_iterations, self.tol, core, self.seed)


def parse_ints(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.replace("x", ",").split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def parse_int_grid(text: str) -> list[tuple[int, ...]]:
    return [parse_ints(part) for part in text.split(";") if part.strip()]


def require_dir(path: Path) -> Path:
    if not path.is_dir():
        raise UsageError(f"output directory {path} does not exist")
    return path


def warn_if_large(shape) -> None:
    nbytes = 8 * int(np.prod(shape))
    if nbytes > LARGE_TENSOR_BYTES:
        log.warning("shape %s needs about %.1f GiB per dense copy", tuple(shape), nbytes / 2**30)


def planted_tensor(shape, ranks, noise_fraction, noise_sigma, seed):
    """Uniform [0, 1] Tucker model plus N(0, sigma^2) noise on a random subset of entries."""
    shape = tuple(shape)
    check_ranks(shape, ranks)
    warn_if_large(shape)
    rng = np.random.default_rng(seed)
    model = random_model(shape, ranks, 0.0, rng)
    clean = model.reconstruct()
    noisy = clean.copy().reshape(-1)
    count = int(round(noise_fraction * noisy.size))
    where = rng.choice(noisy.size, size=count, replace=False)
    noisy[where] += noise_sigma * rng.standard_normal(count)
    return noisy.reshape(shape), clean, model


def model_checksum(model: TuckerModel) -> str:
    h = hashlib.sha256()
    for part in [model.core, *model.factors]:
        h.update(np.ascontiguousarray(part, dtype="<f8").tobytes())
    return h.hexdigest()


def write_model(model: TuckerModel, directory: Path) -> None:
    directory.mkdir(exist_ok=True)
    write_tensor(model.core, directory / "core.dten")
    for n, f in enumerate(model.factors):
        write_tensor(f, directory / f"factor_{n + 1}.dten")
    (directory / "model.json").write_text(
        json.dumps({"lambda": model.lam, "ranks": list(model.ranks), "shape": list(model.shape)}, indent=2) + "\n"
    )


def read_model(directory: Path) -> TuckerModel:
    meta = json.loads((directory / "model.json").read_text())
    core = read_tensor(directory / "core.dten")
    factors = [read_tensor(directory / f"factor_{n + 1}.dten") for n in range(core.ndim)]
    return TuckerModel(core, factors, meta["lambda"])


def write_history(result: AlsResult, path: Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=HISTORY_COLUMNS)
        w.writeheader()
        for row in result.history:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def write_timings(result: AlsResult, path: Path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(TIMING_COLUMNS)
        for step, times in result.timings.items():
            w.writerow([step, f"{np.mean(times):.6f}" if times else "", len(times)])


def load_input(spec: RunSpec) -> np.ndarray:
    if spec.input is not None:
        if spec.input.suffix.lower() == ".csv":
            return read_csv_tensor(spec.input, spec.shape)
        return read_tensor(spec.input)
    if spec.shape is None:
        raise UsageError("either --input or --shape is required")
    noisy, _, _ = planted_tensor(spec.shape, spec.planted_ranks, spec.noise_fraction, spec.noise_sigma, spec.seed)
    return noisy


def cmd_generate(spec: RunSpec, name: str = "tensor") -> Path:
    out = require_dir(spec.out_dir)
    if spec.shape is None:
        raise UsageError("--shape is required")
    noisy, clean, model = planted_tensor(spec.shape, spec.planted_ranks, spec.noise_fraction, spec.noise_sigma, spec.seed)
    path = out / f"{name}.dten"
    write_tensor(noisy, path)
    sidecar = {
        "seed": spec.seed,
        "shape": list(spec.shape),
        "planted_ranks": list(spec.planted_ranks),
        "noise_fraction": spec.noise_fraction,
        "noise_sigma": spec.noise_sigma,
        "planted_checksum": model_checksum(model),
        "rmse_vs_planted": rmse(noisy, clean),
    }
    (out / f"{name}.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    return path


def cmd_decompose(spec: RunSpec) -> AlsResult:
    out = require_dir(spec.out_dir)
    x = load_input(spec)
    check_ranks(x.shape, spec.ranks)
    warn_if_large(x.shape)
    result = als(x, spec.ranks, spec.als_config(), lam=spec.lam)
    write_model(result.model, out / "model")
    write_history(result, out / "history.csv")
    write_timings(result, out / "timing.csv")
    summary = {
        "mode": spec.mode,
        "iterations": result.iterations,
        "converged": result.converged,
        "final_loss": result.history[-1]["loss"] if result.history else None,
        "final_rmse": rmse(x, result.model.reconstruct()),
        "mean_seconds": result.mean_timings(),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return result


def benchmark_rows(shapes, rank_grid, spec: RunSpec, iterations: int = 10) -> list[dict]:
    """Exact and sketched ALS from the same initialization for every (shape, rank)."""
    rows = []
    for shape in shapes:
        x, _, _ = planted_tensor(shape, spec.planted_ranks, spec.noise_fraction, spec.noise_sigma, spec.seed)
        for ranks in rank_grid:
            check_ranks(shape, ranks)
            init = random_model(shape, ranks, spec.lam, np.random.default_rng(spec.seed + 1))
            exact = als(x, ranks, AlsConfig(iterations, 0.0, "exact", spec.seed, False), spec.lam, init)
            sk_cfg = SketchConfig(spec.epsilon, spec.delta, spec.lam, spec.sample_override, spec.seed)
            sketched = als(x, ranks, AlsConfig(iterations, 0.0, sk_cfg, spec.seed, False), spec.lam, init)
            te, ts = exact.mean_timings(), sketched.mean_timings()
            row = {"input_shape": "x".join(map(str, shape)), "rank": "x".join(map(str, ranks))}
            for n in range(len(shape)):
                row[f"F{n + 1}_s"] = round(te[f"F{n + 1}"], 6)
            row["core_exact_s"] = round(te["Core"], 6)
            row["rmse_exact"] = round(rmse(x, exact.model.reconstruct()), 6)
            row["core_sketched_s"] = round(ts["Core"], 6)
            row["rmse_sketched"] = round(rmse(x, sketched.model.reconstruct()), 6)
            rows.append(row)
            log.info("benchmark %s", row)
    return rows


def cmd_benchmark(spec: RunSpec, shapes, rank_grid, iterations: int = 10) -> Path:
    out = require_dir(spec.out_dir)
    rows = benchmark_rows(shapes, rank_grid, spec, iterations)
    path = out / "benchmark.csv"
    fields = list(dict.fromkeys(k for r in rows for k in r))
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
    return path


def cmd_verify(suites, seed: int = 0) -> dict:
    from .verify import SUITES, run_suite

    names = sorted(SUITES) if "all" in suites else list(suites)
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise UsageError(f"unknown suite(s) {unknown}; choose from {sorted(SUITES)} or 'all'")
    reports = [run_suite(name, seed) for name in names]
    return {"passed": all(r["passed"] for r in reports), "suites": reports}


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file of option defaults")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", type=Path, default=Path("."))
    common.add_argument("-v", "--verbose", action="store_true")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--shape", type=parse_ints)
    data.add_argument("--planted-ranks", type=parse_ints, default=(8, 8, 8))
    data.add_argument("--noise-fraction", type=float, default=0.01)
    data.add_argument("--noise-sigma", type=float, default=1.0)

    fit = argparse.ArgumentParser(add_help=False)
    fit.add_argument("--ranks", type=parse_ints, default=(2, 2, 2))
    fit.add_argument("--lambda", dest="lam", type=float, default=0.001)
    fit.add_argument("--epsilon", type=float, default=0.1)
    fit.add_argument("--delta", type=float, default=0.1)
    fit.add_argument("--sample-override", type=int)
    fit.add_argument("--max-iters", dest="max_iterations", type=int, default=50)
    fit.add_argument("--tol", type=float, default=1e-6)

    parser = argparse.ArgumentParser(prog="ridge-tucker", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    gen = sub.add_parser("generate", parents=[common, data], help="write a planted noisy Tucker tensor")
    dec = sub.add_parser("decompose", parents=[common, data, fit], help="run ALS on a tensor")
    dec.add_argument("--input", type=Path)
    dec.add_argument("--mode", choices=["exact", "sketched"], default="exact")
    bench = sub.add_parser("benchmark", parents=[common, data, fit], help="exact vs sketched timing grid")
    bench.add_argument("--shapes", type=parse_int_grid, default=[(32, 32, 32), (64, 64, 64)])
    bench.add_argument("--rank-grid", type=parse_int_grid, default=[(2, 2, 2), (4, 2, 2), (4, 4, 2), (4, 4, 4)])
    bench.add_argument("--iterations", type=int, default=10)
    ver = sub.add_parser("verify", parents=[common], help="run oracle suites")
    ver.add_argument("suites", nargs="*", default=["all"])
    return parser, {"generate": gen, "decompose": dec, "benchmark": bench, "verify": ver}


_SPEC_FIELDS = set(RunSpec.__dataclass_fields__)
# config keys may use the flag spelling instead of the option dest
_CONFIG_ALIASES = {"lambda": "lam", "max_iters": "max_iterations"}


def parse_args(argv=None) -> argparse.Namespace:
    parser, commands = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        try:
            defaults = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config {args.config}: {exc}")
        if not isinstance(defaults, dict):
            parser.error(f"config {args.config} must hold a JSON object")
        defaults = {k.replace("-", "_"): v for k, v in defaults.items()}
        defaults = {_CONFIG_ALIASES.get(k, k): v for k, v in defaults.items()}
        known = set(vars(commands[args.command].parse_args([])))
        unknown = sorted(set(defaults) - known)
        if unknown:
            parser.error(f"unknown config keys {unknown}")
        for key in ("shape", "planted_ranks", "ranks"):
            if key in defaults:
                defaults[key] = tuple(defaults[key])
        commands[args.command].set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "verify":
            report = cmd_verify(args.suites, args.seed)
            text = json.dumps(report, indent=2)
            print(text)
            if args.out_dir != Path("."):
                (require_dir(args.out_dir) / "verify.json").write_text(text + "\n")
            return 0 if report["passed"] else 1
        spec = RunSpec(**{k: v for k, v in vars(args).items() if k in _SPEC_FIELDS})
        if args.command == "generate":
            print(cmd_generate(spec))
        elif args.command == "decompose":
            result = cmd_decompose(spec)
            print(json.dumps({"iterations": result.iterations, "final": result.history[-1]}))
        elif args.command == "benchmark":
            print(cmd_benchmark(spec, args.shapes, args.rank_grid, args.iterations))
        return 0
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
