"""Command-line interface: configure runs, execute them, emit result files.

Five subcommands: `run` (one scenario), `compare` (all three scenarios on a
shared seed), `sweep` (energy across a delay sweep), `gen-data` (synthetic
dataset to CSV), `validate` (config lint). Configuration comes from an
optional JSON file mirroring the ScenarioConfig field names; command-line
flags override file values. Every output file is a deterministic function
of the resolved config; wall-clock timestamps appear only in the manifest.

Exit codes: 0 success, 1 configuration problem, 2 data problem, 3 runtime
failure. Failures print one line to stderr: `dfedsim: <category>: <reason>`.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from .aggregation import AggregationMethod
from .clustering import ClusterPolicy
from .data import DataPlan, DatasetSchema, PartitionPlan, gen_ring_sectors, gen_synthetic, write_csv
from .energy import EnergyParams
from .errors import (
    ConfigError,
    EmptyDataset,
    IndexOutOfRange,
    MissingLabels,
    ParseError,
    SchemaMismatch,
    SimulationError,
)
from .head_selection import HeadPolicy
from .scenarios import (
    RoundTrace,
    ScenarioConfig,
    ScenarioKind,
    delay_sweep,
    run_scenario,
    total_energy,
)
from .topology import DeviceNode, LinkModel, Position

TRACE_HEADER = "round,scenario,accuracy,participants,total_energy,per_node_energy_json"
SUMMARY_HEADER = "scenario,final_accuracy,total_energy"
SWEEP_HEADER = "delay_per_meter_s,scenario,total_energy"
DEFAULT_SWEEP = "0.001,0.0015,0.002,0.0025,0.003"

_DATA_ERRORS = (ParseError, SchemaMismatch, EmptyDataset, MissingLabels, IndexOutOfRange)


# ---------------------------------------------------------- config plumbing


def _asdict(value):
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: _asdict(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, (ScenarioKind, AggregationMethod)):
        return value.value
    if isinstance(value, tuple):
        return [_asdict(v) for v in value]
    return value


def config_to_dict(config: ScenarioConfig) -> dict:
    """The JSON-ready mirror of a ScenarioConfig."""
    return _asdict(config)


# which fields of which config class hold further config objects
_NESTED = {
    ScenarioConfig: {
        "link": LinkModel,
        "cluster_policy": ClusterPolicy,
        "head_policy": HeadPolicy,
        "energy": EnergyParams,
        "data": DataPlan,
    },
    DataPlan: {"schema": DatasetSchema, "partition": PartitionPlan},
    DeviceNode: {"pos": Position},
}


def _build(cls, data: dict, context: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{context} must be an object, got {type(data).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"unknown key(s) under {context}: {', '.join(unknown)}")
    nested = _NESTED.get(cls, {})
    kwargs = {}
    for name, value in data.items():
        if cls is ScenarioConfig and name == "devices":
            if not isinstance(value, list):
                raise ConfigError("devices must be a list of device objects")
            kwargs[name] = tuple(
                _build(DeviceNode, d, f"{context}.devices[{i}]") for i, d in enumerate(value)
            )
        elif cls is ScenarioConfig and name == "kind":
            kwargs[name] = _parse_kind(value)
        elif cls is ScenarioConfig and name == "aggregation":
            kwargs[name] = _parse_enum(AggregationMethod, value, "aggregation")
        elif name in nested and value is not None:
            kwargs[name] = _build(nested[name], value, f"{context}.{name}")
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _parse_enum(enum_cls, value, label):
    try:
        return enum_cls(value)
    except ValueError:
        options = ", ".join(e.value for e in enum_cls)
        raise ConfigError(f"{label} must be one of: {options} (got {value!r})")


def _parse_kind(value) -> ScenarioKind:
    return _parse_enum(ScenarioKind, value, "scenario")


def config_from_dict(data: dict) -> ScenarioConfig:
    """Inverse of config_to_dict, with unknown-key and value checking."""
    return _build(ScenarioConfig, data, "config")


def _load_config_file(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def _resolve_config(args, require_kind: bool) -> ScenarioConfig:
    data = _load_config_file(args.config) if args.config else {}
    if getattr(args, "scenario", None) is not None:
        data["kind"] = args.scenario
    if args.rounds is not None:
        data["rounds"] = args.rounds
    if args.seed is not None:
        data["seed"] = args.seed
    if getattr(args, "data_csv", None) is not None:
        data.setdefault("data", {})
        if not isinstance(data["data"], dict):
            raise ConfigError("config.data must be an object")
        data["data"]["csv_path"] = args.data_csv
    if "kind" not in data:
        if require_kind:
            raise ConfigError("no scenario given; use --scenario or a config file with 'kind'")
        data["kind"] = ScenarioKind.CVFL.value
    return config_from_dict(data)


def _config_digest(config: ScenarioConfig) -> str:
    canonical = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------- writers


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_lines(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def _write_rows(path: Path, header: str, rows: list[list[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header.split(","))
        writer.writerows(rows)


def _trace_rows(kind: ScenarioKind, traces: list[RoundTrace]) -> list[list[str]]:
    rows = []
    for t in traces:
        participants = ";".join(str(p) for p in t.participants)
        per_node = json.dumps(
            {str(n): v for n, v in sorted(t.energy_spent.items())},
            sort_keys=True,
            separators=(",", ":"),
        )
        round_total = sum(t.energy_spent[n] for n in sorted(t.energy_spent))
        rows.append(
            [
                str(t.round_index),
                kind.value,
                _format(t.accuracy),
                participants,
                _format(round_total),
                per_node,
            ]
        )
    return rows


def _write_manifest(out_dir: Path, config_dicts: list[dict], digests: list[str],
                    seed: int, outputs: list[Path]) -> Path:
    path = out_dir / "manifest.json"
    payload = {
        "version": _package_version(),
        "seed": seed,
        "config_sha256": digests[0] if len(digests) == 1 else digests,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": [p.name for p in outputs],
        "config": config_dicts[0] if len(config_dicts) == 1 else config_dicts,
    }
    _write_lines(path, [json.dumps(payload, indent=2, sort_keys=True)])
    return path


def _package_version() -> str:
    from . import __version__

    return __version__


# ------------------------------------------------------------- subcommands


def _cmd_run(args) -> int:
    config = _resolve_config(args, require_kind=True)
    traces = run_scenario(config)
    out = Path(args.out)
    trace_path = out / f"trace_{config.kind.value}.csv"
    _write_rows(trace_path, TRACE_HEADER, _trace_rows(config.kind, traces))
    _write_manifest(out, [config_to_dict(config)], [_config_digest(config)],
                    config.seed, [trace_path])
    print(f"wrote {trace_path} ({len(traces)} rounds)")
    return 0


def _cmd_compare(args) -> int:
    base = _resolve_config(args, require_kind=False)
    out = Path(args.out)
    outputs = []
    summary_rows = []
    dicts, digests = [], []
    for kind in ScenarioKind:
        config = dataclasses.replace(base, kind=kind)
        traces = run_scenario(config)
        trace_path = out / f"trace_{kind.value}.csv"
        _write_rows(trace_path, TRACE_HEADER, _trace_rows(kind, traces))
        outputs.append(trace_path)
        final_accuracy = traces[-1].accuracy if traces else 0.0
        summary_rows.append(
            [kind.value, _format(final_accuracy), _format(total_energy(traces))]
        )
        dicts.append(config_to_dict(config))
        digests.append(_config_digest(config))
    summary_path = out / "summary.csv"
    _write_rows(summary_path, SUMMARY_HEADER, summary_rows)
    outputs.append(summary_path)
    _write_manifest(out, dicts, digests, base.seed, outputs)
    print(f"wrote {len(outputs)} files under {out}")
    return 0


def _sweep_total(config: ScenarioConfig) -> float:
    return total_energy(run_scenario(config))


def _cmd_sweep(args) -> int:
    base = _resolve_config(args, require_kind=False)
    try:
        delays = [float(v) for v in args.delay_sweep.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--delay-sweep must be comma-separated numbers, got {args.delay_sweep!r}")
    if not delays or any(d <= 0 for d in delays):
        raise ConfigError("--delay-sweep needs at least one positive delay")
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")

    configs = []
    for delay in delays:
        link = dataclasses.replace(base.link, delay_per_meter_s=delay)
        for kind in ScenarioKind:
            configs.append((delay, kind, dataclasses.replace(base, kind=kind, link=link)))

    if args.jobs == 1:
        totals = [_sweep_total(c) for _, _, c in configs]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=args.jobs) as pool:
            totals = list(pool.map(_sweep_total, [c for _, _, c in configs]))

    out = Path(args.out)
    rows = [
        [_format(delay), kind.value, _format(total)]
        for (delay, kind, _), total in zip(configs, totals)
    ]
    sweep_path = out / "sweep.csv"
    _write_rows(sweep_path, SWEEP_HEADER, rows)
    _write_manifest(out, [config_to_dict(base)], [_config_digest(base)],
                    base.seed, [sweep_path])
    print(f"wrote {sweep_path} ({len(delays)} delays x {len(list(ScenarioKind))} scenarios)")
    return 0


def _cmd_gen_data(args) -> int:
    config = _resolve_config(args, require_kind=False)
    plan = config.data
    if args.samples is not None:
        if args.samples < 1:
            raise ConfigError("--samples must be >= 1")
        samples = args.samples
    else:
        samples = (
            len(config.devices) * plan.partition.samples_per_device + plan.test_samples
        )
    if plan.task == "sectors":
        features, labels = gen_ring_sectors(
            plan.schema,
            samples,
            seed=config.seed,
            sectors=plan.sectors,
            spread=plan.spread,
            latent_factors=plan.latent_factors,
            center_scale=plan.center_scale,
        )
    else:
        features, labels = gen_synthetic(
            plan.schema,
            samples,
            seed=config.seed,
            spread=plan.spread,
            latent_factors=plan.latent_factors,
            center_scale=plan.center_scale,
        )
    out = Path(args.out)
    data_path = out / "dataset.csv"
    out.mkdir(parents=True, exist_ok=True)
    write_csv(data_path, features, labels, plan.schema)
    _write_manifest(out, [config_to_dict(config)], [_config_digest(config)],
                    config.seed, [data_path])
    print(f"wrote {data_path} ({samples} samples)")
    return 0


def _cmd_validate(args) -> int:
    config = _resolve_config(args, require_kind=False)
    digest = _config_digest(config)
    print(
        f"ok kind={config.kind.value} rounds={config.rounds} seed={config.seed} "
        f"devices={len(config.devices)} sha256={digest[:12]}"
    )
    return 0


# ------------------------------------------------------------ entry point


class _Parser(argparse.ArgumentParser):
    # argparse exits with its own codes; route its complaints through the
    # config-error path so the documented exit codes hold
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dfedsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario_flag=False):
        p.add_argument("--config", help="JSON config file mirroring ScenarioConfig")
        p.add_argument("--rounds", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default="results", help="output directory")
        p.add_argument("--data", dest="data_csv", default=None,
                       help="dataset CSV path (overrides synthetic generation)")
        if scenario_flag:
            p.add_argument("--scenario", choices=[k.value for k in ScenarioKind])

    p_run = sub.add_parser("run", help="run one scenario, write its trace CSV")
    common(p_run, scenario_flag=True)
    p_run.set_defaults(fn=_cmd_run)

    p_cmp = sub.add_parser("compare", help="run all three scenarios on one seed")
    common(p_cmp)
    p_cmp.set_defaults(fn=_cmd_compare)

    p_sweep = sub.add_parser("sweep", help="total energy across a delay sweep")
    common(p_sweep)
    p_sweep.add_argument("--delay-sweep", default=DEFAULT_SWEEP,
                         help="comma-separated delay-per-meter values")
    p_sweep.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_gen = sub.add_parser("gen-data", help="write a synthetic dataset CSV")
    common(p_gen)
    p_gen.add_argument("--samples", type=int, default=None)
    p_gen.set_defaults(fn=_cmd_gen_data)

    p_val = sub.add_parser("validate", help="check a config and print its digest")
    common(p_val, scenario_flag=True)
    p_val.set_defaults(fn=_cmd_validate)

    return parser


def run_cli(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except ConfigError as exc:
        print(f"dfedsim: config: {exc}", file=sys.stderr)
        return 1
    except (*_DATA_ERRORS, FileNotFoundError) as exc:
        print(f"dfedsim: data: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, OSError) as exc:
        print(f"dfedsim: runtime: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
