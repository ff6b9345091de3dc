"""Command-line front door: ingest, analyze, map, converge, simulate,
serve, synth. Exit code 0 on success, 1 on domain errors, 2 on usage
errors (including malformed config files)."""

from __future__ import annotations

import dataclasses
import json
import os
import sys
from pathlib import Path

import click

from . import mapgen
from .analysis import run_analysis, write_artifacts
from .config import (AnalysisConfig, ConfigFile, load_config)
from .corpus import dumps_corpus, load_corpus, save_corpus
from .errors import BeliefMapError, ConfigFileError
from .sim import Environment, SimConfig, run_simulation, sim_posts_to_corpus
from .synth import SyntheticSpec, generate_synthetic_corpus


def _die(exc: BeliefMapError) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


def _load_analysis_config(path: str | None) -> AnalysisConfig:
    if path is None:
        return AnalysisConfig()
    try:
        cfgfile = load_config(path)
    except ConfigFileError as exc:
        raise click.UsageError(str(exc))
    if cfgfile.analysis is None:
        raise click.UsageError(f"{path}: no analysis section in config")
    from .config import validate_analysis_config
    errors = validate_analysis_config(cfgfile.analysis)
    if errors:
        msgs = "; ".join(f"{e.field}: {e.message}" for e in errors)
        raise click.UsageError(f"invalid config: {msgs}")
    return cfgfile.analysis


def _load_sim_config(path: str | None, seed: int | None) -> SimConfig:
    if path is None:
        cfg = SimConfig()
    else:
        try:
            cfgfile = load_config(path)
        except ConfigFileError as exc:
            raise click.UsageError(str(exc))
        if cfgfile.sim is None:
            raise click.UsageError(f"{path}: no sim section in config")
        cfg = cfgfile.sim
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    return cfg


@click.group()
@click.version_option(package_name="beliefmap")
def main():
    """Belief place/space mapping toolkit."""


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def ingest(corpus_path, out_path):
    """Validate an interchange file and write its canonical form."""
    try:
        corpus = load_corpus(corpus_path)
        save_corpus(corpus, out_path)
    except BeliefMapError as exc:
        _die(exc)
    click.echo(f"{len(corpus.posts)} posts across {len(corpus.groups)} groups "
               f"-> {out_path}")


def _analyze(corpus_path, config_path, out_dir) -> None:
    config = _load_analysis_config(config_path)
    try:
        corpus = load_corpus(corpus_path)
        result = run_analysis(corpus, config)
        names = write_artifacts(result, out_dir)
    except BeliefMapError as exc:
        _die(exc)
    click.echo(f"wrote {', '.join(names)} to {out_dir}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def analyze(corpus_path, config_path, out_dir):
    """Run the full analysis and write every artifact."""
    _analyze(corpus_path, config_path, out_dir)


@main.command("map")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def map_cmd(corpus_path, config_path, out_dir):
    """Rerun the analysis but write only the map artifacts."""
    config = _load_analysis_config(config_path)
    try:
        corpus = load_corpus(corpus_path)
        result = run_analysis(corpus, config)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "map.dot").write_text(
            mapgen.export_map(result.belief_map, mapgen.FORMAT_DOT), "utf-8")
        (out / "map.structured").write_text(
            mapgen.export_map(result.belief_map, mapgen.FORMAT_STRUCTURED), "utf-8")
    except BeliefMapError as exc:
        _die(exc)
    click.echo(f"wrote map.dot, map.structured to {out_dir}")


@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
def converge(corpus_path, config_path, out_dir):
    """Rerun the analysis but write only the convergence report."""
    config = _load_analysis_config(config_path)
    try:
        corpus = load_corpus(corpus_path)
        result = run_analysis(corpus, config)
        from .analysis import _convergence_tsv
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "convergence.tsv").write_text(_convergence_tsv(result), "utf-8")
    except BeliefMapError as exc:
        _die(exc)
    click.echo(f"wrote convergence.tsv to {out_dir}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--seed", type=int, default=None)
def simulate(config_path, out_dir, seed):
    """Run the agent simulation; write the posts corpus, regime report with
    comparison metrics, and the reconstruction in both formats."""
    cfg = _load_sim_config(config_path, seed)
    try:
        env = Environment(cfg.dimensions, cfg.cells_per_axis)
        _, posts, report = run_simulation(cfg, env)
        corpus = sim_posts_to_corpus(posts)
        recon = mapgen.reconstruct_environment(posts)
        comparison = mapgen.compare_graphs(recon, env)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_corpus(corpus, out / "corpus.jsonl")
        (out / "regime.json").write_text(json.dumps({
            "config": cfg.to_mapping(),
            "regime": report.to_mapping() if report is not None else None,
            "comparison": {"node_jaccard": comparison.node_jaccard,
                           "edge_jaccard": comparison.edge_jaccard},
        }, indent=2, sort_keys=True) + "\n", "utf-8")
        (out / "reconstruction.dot").write_text(
            mapgen.export_map(recon, mapgen.FORMAT_DOT), "utf-8")
        (out / "reconstruction.structured").write_text(
            mapgen.export_map(recon, mapgen.FORMAT_STRUCTURED), "utf-8")
    except BeliefMapError as exc:
        _die(exc)
    regime = report.regime if report is not None else "n/a"
    click.echo(f"simulated {cfg.steps} steps, regime {regime}; "
               f"artifacts in {out_dir}")


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--seed", type=int, default=0)
def synth(spec_path, out_path, seed):
    """Generate a synthetic corpus from a spec file."""
    try:
        spec = SyntheticSpec.from_json(Path(spec_path).read_text("utf-8"))
    except (KeyError, ValueError) as exc:
        raise click.UsageError(f"bad synthetic spec: {exc}")
    try:
        corpus = generate_synthetic_corpus(spec, seed=seed)
        save_corpus(corpus, out_path)
    except BeliefMapError as exc:
        _die(exc)
    click.echo(f"{len(corpus.posts)} posts -> {out_path}")


@main.command()
@click.option("--addr", default=None, help="bind host:port (or SERVER_ADDR)")
@click.option("--store", "store_dir", default=None,
              help="artifact directory (or STORE_DIR)")
def serve(addr, store_dir):
    """Serve the HTTP API."""
    import uvicorn
    from .server import create_app
    addr = addr or os.environ.get("SERVER_ADDR", "127.0.0.1:8000")
    host, _, port = addr.partition(":")
    app = create_app(store_dir=store_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


if __name__ == "__main__":
    main()
