"""Command-line surface: batch probabilities, verification suites, simulation.

Job configuration lives in a single JSON file; unknown keys anywhere are
rejected so typos surface immediately.  Probabilities are printed with 17
significant digits so output files can be compared across implementations.

Exit codes: 0 success or pass, 1 verification failure, 2 configuration
error, 3 quadrature failed to converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import bethe, oracle
from .core import (
    NonIncreasingPositions,
    ParticleState,
    RateTable,
    SpeciesOutOfRange,
    build_sector,
    validate_state,
)
from .rmatrix import (
    SpectralPoint,
    build_all_A,
    consistency_residuals,
    contour_bound,
    product_along_slots,
)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3

SUITES = ("yang-baxter", "welldef", "oracle", "stochastic", "boundary")

SUITE_TOLERANCES = {
    "yang-baxter": 1e-12,
    "welldef": 1e-12,
    "oracle": 1e-6,
    "stochastic": 1e-6,
    "boundary": 1e-10,
}


class ConfigError(ValueError):
    """The job configuration is malformed."""


@dataclass(frozen=True)
class JobConfig:
    rates: RateTable
    initial: ParticleState
    time: float
    targets: tuple[ParticleState, ...] | str  # explicit states or "window"
    spectral: bethe.SpectralParams
    output_format: Optional[str] = None
    output_path: Optional[str] = None


def _require_keys(mapping: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")
    missing = required - set(mapping)
    if missing:
        raise ConfigError(f"missing key(s) {sorted(missing)} in {where}")


def _parse_state(obj, where: str) -> ParticleState:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object with positions and species")
    _require_keys(obj, {"positions", "species"}, {"positions", "species"}, where)
    try:
        return ParticleState(tuple(obj["positions"]), tuple(obj["species"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad state in {where}: {exc}") from exc


def parse_config(text: str) -> JobConfig:
    """Parse and validate a JSON job configuration."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    _require_keys(
        data,
        {"rates", "initial", "time", "targets", "spectral", "output"},
        {"rates", "initial", "time", "targets"},
        "config",
    )
    try:
        rates = RateTable(tuple(data["rates"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad rates: {exc}") from exc
    initial = _parse_state(data["initial"], "initial")
    time = data["time"]
    if not isinstance(time, (int, float)) or time < 0:
        raise ConfigError("time must be a nonnegative number")
    raw_targets = data["targets"]
    targets: tuple[ParticleState, ...] | str
    if raw_targets == "window":
        targets = "window"
    elif isinstance(raw_targets, list):
        targets = tuple(_parse_state(tg, f"targets[{i}]") for i, tg in enumerate(raw_targets))
    else:
        raise ConfigError('targets must be "window" or a list of states')
    spectral_obj = data.get("spectral", {})
    if not isinstance(spectral_obj, dict):
        raise ConfigError("spectral must be an object")
    _require_keys(
        spectral_obj, {"radius", "nodes_per_dim", "adapt_tol", "max_nodes"}, set(), "spectral"
    )
    try:
        spectral = bethe.SpectralParams(
            radius=spectral_obj.get("radius"),
            nodes_per_dim=spectral_obj.get("nodes_per_dim", 32),
            adapt_tol=spectral_obj.get("adapt_tol", 1e-8),
            max_nodes=spectral_obj.get("max_nodes", 256),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad spectral parameters: {exc}") from exc
    out_fmt = out_path = None
    if "output" in data:
        out_obj = data["output"]
        if not isinstance(out_obj, dict):
            raise ConfigError("output must be an object")
        _require_keys(out_obj, {"format", "path"}, set(), "output")
        out_fmt = out_obj.get("format")
        if out_fmt is not None and out_fmt not in ("csv", "json"):
            raise ConfigError(f"output format must be csv or json, got {out_fmt!r}")
        out_path = out_obj.get("path")
    cfg = JobConfig(
        rates=rates,
        initial=initial,
        time=float(time),
        targets=targets,
        spectral=spectral,
        output_format=out_fmt,
        output_path=out_path,
    )
    try:
        validate_state(cfg.initial, cfg.rates)
        if isinstance(cfg.targets, tuple):
            for tg in cfg.targets:
                validate_state(tg, cfg.rates)
    except (NonIncreasingPositions, SpeciesOutOfRange) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def canonical_config(cfg: JobConfig) -> str:
    """Canonical serialization: sorted keys, two-space indent, trailing newline.

    Parsing the output and serializing again reproduces it byte for byte.
    """
    data: dict = {
        "rates": list(cfg.rates.rates),
        "initial": {
            "positions": list(cfg.initial.positions),
            "species": list(cfg.initial.species),
        },
        "time": cfg.time,
        "targets": "window"
        if cfg.targets == "window"
        else [
            {"positions": list(tg.positions), "species": list(tg.species)} for tg in cfg.targets
        ],
        "spectral": {
            "radius": cfg.spectral.radius,
            "nodes_per_dim": cfg.spectral.nodes_per_dim,
            "adapt_tol": cfg.spectral.adapt_tol,
            "max_nodes": cfg.spectral.max_nodes,
        },
    }
    if cfg.output_format is not None or cfg.output_path is not None:
        out: dict = {}
        if cfg.output_format is not None:
            out["format"] = cfg.output_format
        if cfg.output_path is not None:
            out["path"] = cfg.output_path
        data["output"] = out
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def resolve_targets(cfg: JobConfig) -> list[ParticleState]:
    """Explicit target list, or every reachable state in the default window."""
    if isinstance(cfg.targets, tuple):
        return list(cfg.targets)
    window = oracle.default_window(cfg.initial, cfg.rates, cfg.time)
    gen = oracle.build_generator(cfg.initial, cfg.rates, window)
    return list(gen.states)


def _format_sig(x: float) -> str:
    return f"{x:.17g}"


def _write_rows(rows: list[dict], fmt: str, path: str) -> None:
    columns = list(rows[0].keys()) if rows else ["positions", "species", "value", "est_error", "nodes_used"]
    if fmt == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(
                [_format_sig(v) if isinstance(v, float) else v for v in row.values()]
            )
        text = buf.getvalue()
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as handle:
            handle.write(text)


def _state_row(state: ParticleState) -> dict:
    return {
        "positions": ";".join(str(x) for x in state.positions),
        "species": ",".join(str(s) for s in state.species),
    }


def cmd_prob(cfg: JobConfig, out: Optional[str] = None, fmt: Optional[str] = None, threads: int = 1) -> int:
    """Compute one row per target and write them in target order."""
    targets = resolve_targets(cfg)
    try:
        results = bethe.transition_matrix(
            cfg.initial, targets, cfg.time, cfg.rates, params=cfg.spectral, threads=threads
        )
    except bethe.NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    rows = []
    for state, res in zip(targets, results):
        row = _state_row(state)
        row.update(
            value=res.value, est_error=res.est_error, nodes_used=res.nodes_used
        )
        rows.append(row)
    _write_rows(rows, fmt or cfg.output_format or "csv", out or cfg.output_path or "-")
    return EXIT_OK


def cmd_simulate(
    cfg: JobConfig,
    n_samples: int,
    seed: int,
    out: Optional[str] = None,
    fmt: Optional[str] = None,
) -> int:
    """Empirical distribution from exact simulation, one row per observed state."""
    counts = oracle.gillespie(cfg.initial, cfg.rates, cfg.time, n_samples, seed)
    rows = []
    for state in sorted(counts, key=lambda s: (s.positions, s.species)):
        count = counts[state]
        freq = count / n_samples
        row = _state_row(state)
        row.update(
            value=freq,
            est_error=4.0 * math.sqrt(freq * (1.0 - freq) / n_samples),
            nodes_used=n_samples,
            count=count,
        )
        rows.append(row)
    _write_rows(rows, fmt or cfg.output_format or "csv", out or cfg.output_path or "-")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suites
# ---------------------------------------------------------------------------


def _draw_rates(rng: np.random.Generator, n: int) -> RateTable:
    return RateTable(tuple(rng.uniform(0.5, 2.0, size=n)))


def _draw_point(rng: np.random.Generator, n: int, rates: RateTable) -> SpectralPoint:
    mags = rng.uniform(0.2, 0.9, size=n) * contour_bound(rates)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return SpectralPoint(tuple(mags * np.exp(1j * phases)))


def _suite_yang_baxter(size: int, seed: int, trials: int, threads: int) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        rates = _draw_rates(rng, size)
        sp = _draw_point(rng, size, rates)
        worst = max(worst, consistency_residuals(sp, rates, size)["yang_baxter"])
    return worst


def _suite_welldef(size: int, seed: int, trials: int, threads: int) -> float:
    from .rmatrix import all_sectors

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        rates = _draw_rates(rng, size)
        sp = _draw_point(rng, size, rates)
        for block in all_sectors(size):
            for i in range(1, size - 1):
                left, im_left = product_along_slots((i, i + 1, i), sp, rates, block)
                right, im_right = product_along_slots((i + 1, i, i + 1), sp, rates, block)
                assert im_left == im_right
                worst = max(worst, float(np.max(np.abs(left - right))))
    return worst


def _suite_oracle(size: int, seed: int, trials: int, threads: int) -> float:
    rng = np.random.default_rng(seed)
    initial_positions = tuple(range(size))
    words = {
        2: [(1, 1), (1, 2), (2, 1), (2, 2)],
        3: [(1, 2, 3), (3, 2, 1), (2, 1, 2)],
    }.get(size)
    if words is None:
        raise ConfigError("oracle suite supports size 2 or 3")
    times = (0.1, 0.5, 1.0)
    worst = 0.0
    for _ in range(trials):
        rates = _draw_rates(rng, size)
        for word in words:
            initial = ParticleState(initial_positions, word)
            for t in times:
                gen = oracle.build_generator(
                    initial, rates, oracle.default_window(initial, rates, t)
                )
                probs, _ = oracle.matrix_exponential_row(gen, initial, t)
                results = bethe.transition_matrix(
                    initial, list(gen.states), t, rates, threads=threads
                )
                dev = max(abs(r.value - p) for r, p in zip(results, probs))
                worst = max(worst, dev)
    return worst


def _suite_stochastic(size: int, seed: int, trials: int, threads: int) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    t = 1.0
    for _ in range(trials):
        rates = _draw_rates(rng, size)
        word = tuple(rng.integers(1, size + 1, size=size))
        initial = ParticleState(tuple(range(size)), word)
        gen = oracle.build_generator(initial, rates, oracle.default_window(initial, rates, t))
        results = bethe.transition_matrix(
            initial, list(gen.states), t, rates, threads=threads
        )
        worst = max(worst, abs(1.0 - sum(r.value for r in results)))
    return worst


def _suite_boundary(size: int, seed: int, trials: int, threads: int) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        rates = _draw_rates(rng, size)
        sp = _draw_point(rng, size, rates)
        word = tuple(sorted(rng.integers(1, size + 1, size=size)))
        sector = build_sector(word)
        amps = build_all_A(sp, rates, sector)
        base = [int(v) for v in rng.integers(-3, 4, size=size)]
        for slot in range(1, size):
            x = list(base)
            x[slot] = x[slot - 1] + 1  # adjacent pair at the tested slot
            merged = list(x)
            merged[slot] = merged[slot - 1]
            lhs = oracle.hop_rate_diag(sector, rates, slot + 1) @ bethe.bethe_sum(
                merged, sp, rates, sector, amps
            )
            gain = oracle.swap_gain_matrix(sector, rates, slot)
            loss = oracle.swap_loss_diag(sector, rates, slot)
            hop = oracle.hop_rate_diag(sector, rates, slot)
            rhs = (gain + hop - loss) @ bethe.bethe_sum(x, sp, rates, sector, amps)
            scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-300)
            worst = max(worst, float(np.max(np.abs(lhs - rhs)) / scale))
    return worst


_SUITE_RUNNERS = {
    "yang-baxter": (_suite_yang_baxter, 3, 100),
    "welldef": (_suite_welldef, 3, 100),
    "oracle": (_suite_oracle, 2, 3),
    "stochastic": (_suite_stochastic, 2, 5),
    "boundary": (_suite_boundary, 2, 50),
}


def cmd_verify(
    suite: str,
    size: Optional[int] = None,
    seed: int = 0,
    trials: Optional[int] = None,
    threads: int = 1,
) -> int:
    """Run one named property suite and report max residual against its tolerance."""
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    runner, default_size, default_trials = _SUITE_RUNNERS[suite]
    size = default_size if size is None else size
    trials = default_trials if trials is None else trials
    residual = runner(size, seed, trials, threads)
    tol = SUITE_TOLERANCES[suite]
    passed = residual < tol
    status = "PASS" if passed else "FAIL"
    print(
        f"{suite}: size={size} trials={trials} max_residual={residual:.3e} "
        f"tolerance={tol:.1e} {status}"
    )
    return EXIT_OK if passed else EXIT_VERIFY_FAIL


def _load_config(path: str) -> JobConfig:
    try:
        with open(path) as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON job configuration")
    common.add_argument("--out", default=None, help="output path, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(
        prog="mstasep",
        description="Transition probabilities for the multi-species TASEP "
        "with species-dependent rates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("prob", parents=[common], help="compute transition probabilities")
    p_verify = sub.add_parser("verify", parents=[common], help="run a property suite")
    p_verify.add_argument("suite", choices=SUITES)
    p_verify.add_argument("--size", type=int, default=None)
    p_verify.add_argument("--trials", type=int, default=None)
    p_sim = sub.add_parser(
        "simulate", parents=[common], help="empirical distribution by simulation"
    )
    p_sim.add_argument("--samples", type=int, required=True)

    args = parser.parse_args(argv)
    try:
        if args.command == "prob":
            if args.config is None:
                raise ConfigError("prob requires --config")
            cfg = _load_config(args.config)
            return cmd_prob(cfg, out=args.out, fmt=args.format, threads=args.threads)
        if args.command == "verify":
            return cmd_verify(
                args.suite, size=args.size, seed=args.seed, trials=args.trials,
                threads=args.threads,
            )
        if args.command == "simulate":
            if args.config is None:
                raise ConfigError("simulate requires --config")
            cfg = _load_config(args.config)
            return cmd_simulate(
                cfg, n_samples=args.samples, seed=args.seed, out=args.out, fmt=args.format
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError("unreachable")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
