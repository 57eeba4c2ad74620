"""Command-line interface.

Subcommands: fit, diagnose, trace, validate-kg, synth. Flags override config
file keys, which override built-in defaults. Exit codes: 0 success, 1
validation or diagnosis failure, 2 usage or parse errors.
"""

from __future__ import annotations

import functools
import json
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import synth as synthmod
from .config import ConfigError, DiagnosisConfig, apply_overrides, load_config
from .dataio import write_csv
from .kgraph import (
    GraphError,
    GraphParseError,
    GraphValidationError,
    load_graph,
    save_graph,
    validate,
)
from .pipeline import run_diagnose, run_fit, run_trace
from .scoring import format_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _effective_config(config_path: str | None, **overrides) -> DiagnosisConfig:
    if config_path:
        base = load_config(config_path)
    else:
        base = DiagnosisConfig()
    return apply_overrides(base, **overrides)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, GraphParseError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_USAGE)
        except GraphValidationError as exc:
            for line in exc.report.errors:
                click.echo(f"error: {line}", err=True)
            sys.exit(EXIT_FAILURE)
        except (GraphError, ValueError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_FAILURE)

    return wrapper


@click.group()
def main():
    """Root-cause diagnosis from a plant knowledge graph and process data."""
    level_name = os.environ.get("ROOTKGD_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--config", "config_path", type=click.Path(), help="JSON config file.")
@click.option("--graph", "graph_path", type=click.Path(), help="Knowledge graph file.")
@click.option("--data", "data_path", type=click.Path(), help="Normal-operation CSV.")
@click.option("--model", "model_path", type=click.Path(), help="Where to write the model.")
@click.option("--r-pc", type=float, default=None, help="Retained variance ratio in (0, 1].")
@handle_errors
def fit(config_path, graph_path, data_path, model_path, r_pc):
    """Fit the monitoring model on normal-operation data."""
    config = _effective_config(
        config_path,
        graph_path=graph_path,
        normal_data_path=data_path,
        model_path=model_path,
        r_pc=r_pc,
    )
    outcome = run_fit(config)
    click.echo(outcome.summary())
    if config.model_path:
        click.echo(f"model written to {config.model_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), help="JSON config file.")
@click.option("--graph", "graph_path", type=click.Path(), help="Knowledge graph file.")
@click.option("--model", "model_path", type=click.Path(), help="Fitted model file.")
@click.option("--data", "data_path", type=click.Path(), help="Fault-episode CSV.")
@click.option("--fault-start", type=int, default=None, help="Index of the first fault sample.")
@click.option("--window", type=int, default=None, help="Fault window length (default 100).")
@click.option("--top-k", type=int, default=None, help="Entries per ranking column (default 10).")
@click.option("--json", "json_path", type=click.Path(), help="Also write the JSON report here.")
@click.option("--jobs", type=int, default=None, help="Parallel scoring workers.")
@handle_errors
def diagnose(config_path, graph_path, model_path, data_path, fault_start, window, top_k,
             json_path, jobs):
    """Rank root-cause candidates for a fault episode."""
    config = _effective_config(
        config_path,
        graph_path=graph_path,
        model_path=model_path,
        fault_data_path=data_path,
        fault_start=fault_start,
        window=window,
        top_k=top_k,
        jobs=jobs,
    )
    ranking = run_diagnose(config)
    click.echo(format_report(ranking, top_k=config.top_k, mode="text"), nl=False)
    if json_path:
        Path(json_path).write_text(
            format_report(ranking, top_k=config.top_k, mode="json"), encoding="utf-8"
        )
        click.echo(f"report written to {json_path}")


@main.command()
@click.argument("source")
@click.option("--config", "config_path", type=click.Path(), help="JSON config file.")
@click.option("--graph", "graph_path", type=click.Path(), help="Knowledge graph file.")
@handle_errors
def trace(source, config_path, graph_path):
    """Dump the propagation event log from SOURCE as TSV."""
    config = _effective_config(config_path, graph_path=graph_path)
    click.echo(run_trace(config, source), nl=False)


@main.command("validate-kg")
@click.argument("graph_file", required=False, type=click.Path())
@click.option("--config", "config_path", type=click.Path(), help="JSON config file.")
@click.option("--graph", "graph_path", type=click.Path(), help="Knowledge graph file.")
@handle_errors
def validate_kg(graph_file, config_path, graph_path):
    """Validate a knowledge graph file; exit 0 only if it has no errors."""
    config = _effective_config(config_path, graph_path=graph_file or graph_path)
    if not config.graph_path:
        raise ConfigError("a graph file is required (argument, --graph, or config)")
    try:
        graph = load_graph(config.graph_path)
    except GraphValidationError as exc:
        for line in exc.report.errors:
            click.echo(f"error: {line}")
        for line in exc.report.warnings:
            click.echo(f"warning: {line}")
        sys.exit(EXIT_FAILURE)
    report = validate(graph)
    for line in report.warnings:
        click.echo(f"warning: {line}")
    click.echo(
        f"ok: {len(graph.entities)} entities, {len(graph.relations)} relations, "
        f"{len(graph.triples)} triples, {len(report.warnings)} warnings"
    )


@main.command()
@click.option("--out", "out_dir", type=click.Path(), default="plant", show_default=True,
              help="Output directory.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--devices", type=int, default=3, show_default=True)
@click.option("--normal-samples", type=int, default=2000, show_default=True)
@click.option("--fault-samples", type=int, default=400, show_default=True)
@click.option("--fault-start", type=int, default=100, show_default=True)
@click.option("--fault-duration", type=int, default=100, show_default=True)
@click.option("--fault-kind", type=click.Choice(synthmod.FAULT_KINDS), default="step",
              show_default=True)
@click.option("--magnitude", type=float, default=10.0, show_default=True,
              help="Fault size in units of the target's normal sigma.")
@click.option("--root", "root_id", default=None,
              help="Entity to perturb (default: a random variable).")
@handle_errors
def synth(out_dir, seed, devices, normal_samples, fault_samples, fault_start, fault_duration,
          fault_kind, magnitude, root_id):
    """Generate a synthetic plant: graph, normal/fault data, truth manifest."""
    spec = synthmod.PlantSpec(n_devices=devices, seed=seed)
    graph, model = synthmod.generate_plant(spec)
    if root_id is None:
        rng = np.random.default_rng(seed)
        root_id = model.columns[int(rng.integers(len(model.columns)))]
    injection = synthmod.FaultInjection(
        root=root_id,
        kind=fault_kind,
        magnitude=magnitude,
        start=fault_start,
        duration=fault_duration,
    )
    normal = synthmod.simulate(model, normal_samples, seed=seed + 1)
    faulty = synthmod.simulate(model, fault_samples, injection=injection, seed=seed + 2)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_graph(graph, out / "graph.json")
    write_csv(normal, out / "normal.csv")
    write_csv(faulty, out / "fault.csv")
    root_kind = "device" if root_id in model.device_ids else "variable"
    manifest = {
        "seed": seed,
        "root": root_id,
        "root_kind": root_kind,
        "owner_device": model.owner_device(root_id) if root_kind == "variable" else root_id,
        "fault": {
            "kind": fault_kind,
            "magnitude": magnitude,
            "start": fault_start,
            "duration": fault_duration,
        },
        "columns": list(model.columns),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    click.echo(f"plant written to {out} (root: {root_id})")


if __name__ == "__main__":
    main()
