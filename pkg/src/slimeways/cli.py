"""Command-line entry point: batch simulation campaigns and analysis.

Subcommands: simulate, analyze, proximity, render, dump-config.
Exit codes: 0 success, 1 validation error, 2 I/O error.
Set PHYSARUM_LOG to control the log level.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import __version__, graphlab
from .citymap import ScenarioError, Scenario, load_scenario, write_pgm
from .geometry import PointSet, SimpleCityGraph, emst, gabriel_graph, prim_growth, rng_graph
from .plasmodium import run as run_sim

log = logging.getLogger("slimeways")


def _setup_logging():
    logging.basicConfig(
        level=os.environ.get("PHYSARUM_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )


def _apply_overrides(scenario: Scenario, seed, runs, steps) -> Scenario:
    changes = {}
    if seed is not None:
        changes["base_seed"] = seed
    if runs is not None:
        changes["runs"] = runs
    if steps is not None:
        changes["steps"] = steps
        changes["snapshot_steps"] = tuple(
            s for s in scenario.snapshot_steps if s <= steps
        )
    return dataclasses.replace(scenario, **changes) if changes else scenario


def _chemo_to_grey(chemo: np.ndarray) -> np.ndarray:
    peak = chemo.max()
    if peak <= 0:
        return np.zeros(chemo.shape, dtype=np.uint8)
    return (chemo / peak * 255).astype(np.uint8)


def _execute_run(args):
    """Worker: one full run, its own files.  Module-level for pickling."""
    scenario_path, seed, runs, steps, run_index, out_dir, dilation = args
    scenario = _apply_overrides(load_scenario(scenario_path), seed, runs, steps)
    out = Path(out_dir)
    result = run_sim(scenario, run_index, dilation=dilation)

    tag = f"run{run_index:03d}"
    snapshot_paths = []
    for at, snap in sorted(result.snapshots.items()):
        occ_path = out / f"{tag}_step{at:05d}_occupancy.pgm"
        chem_path = out / f"{tag}_step{at:05d}_chemo.pgm"
        write_pgm(occ_path, snap["occupancy"] * 255)
        write_pgm(chem_path, _chemo_to_grey(snap["chemo"]))
        snapshot_paths += [occ_path.name, chem_path.name]

    edges_path = out / f"{tag}_edges.json"
    edges_path.write_text(json.dumps({
        "run_index": run_index,
        "seed": result.seed,
        "edges": sorted([list(e) for e in result.edges.edges]),
        "nodes": sorted(result.edges.nodes),
    }, indent=2))

    meta_path = out / f"{tag}_meta.json"
    meta_path.write_text(json.dumps({
        "run_index": run_index,
        "seed": result.seed,
        "rng": "numpy PCG64; per-run seed = base_seed XOR run_index",
        "steps": scenario.steps,
        "digest": result.digest,
        "params": dataclasses.asdict(scenario.params),
        "dilation": dilation,
        "tool_version": __version__,
    }, indent=2))

    return {
        "run_index": run_index,
        "seed": result.seed,
        "digest": result.digest,
        "edges_path": edges_path.name,
        "meta_path": meta_path.name,
        "snapshot_paths": snapshot_paths,
    }


@click.group()
def main():
    """Slime-mould transport network simulator and graph toolkit."""
    _setup_logging()


scenario_opt = click.option("--scenario", required=True, type=click.Path(exists=True))


@main.command()
@scenario_opt
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Override base seed.")
@click.option("--runs", type=int, default=None, help="Override run count.")
@click.option("--steps", type=int, default=None, help="Override step count.")
@click.option("--parallel", type=int, default=1, help="Concurrent run workers.")
@click.option("--dilation", type=int, default=1, help="Occupancy dilation for edge extraction.")
def simulate(scenario, out, seed, runs, steps, parallel, dilation):
    """Execute all runs of a scenario; write snapshots, edges, manifest."""
    sc = _apply_overrides(load_scenario(scenario), seed, runs, steps)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.json"
    manifest = {
        "scenario": str(Path(scenario).resolve()),
        "out_dir": str(out_dir.resolve()),
        "tool_version": __version__,
        "base_seed": sc.base_seed,
        "runs": sc.runs,
        "steps": sc.steps,
        "dilation": dilation,
        "rng": "numpy PCG64; per-run seed = base_seed XOR run_index",
        "records": [],
    }
    jobs = [(scenario, seed, runs, steps, i, str(out_dir), dilation)
            for i in range(sc.runs)]
    records = []

    def _note(rec):
        records.append(rec)
        # manifest is append-only during the campaign; records stay sorted
        # by run index so the final file is independent of completion order
        manifest["records"] = sorted(records, key=lambda r: r["run_index"])
        manifest_path.write_text(json.dumps(manifest, indent=2))
        log.info("run %d done (digest %s)", rec["run_index"], rec["digest"][:12])

    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            for rec in pool.map(_execute_run, jobs):
                _note(rec)
    else:
        for job in jobs:
            _note(_execute_run(job))
    click.echo(f"{len(records)} runs complete; manifest at {manifest_path}")


def _parse_theta(value: str) -> Fraction:
    if "/" in value:
        num, den = value.split("/")
        return Fraction(int(num), int(den))
    return Fraction(value)


def _load_campaign(manifest_path, allow_partial):
    manifest = json.loads(Path(manifest_path).read_text())
    out_dir = Path(manifest_path).parent
    records = manifest["records"]
    if len(records) < manifest["runs"]:
        if not allow_partial:
            raise ScenarioError(
                f"manifest incomplete: {len(records)}/{manifest['runs']} runs "
                "(use --allow-partial to analyze anyway)")
        log.warning("analyzing partial manifest: %d/%d runs",
                    len(records), manifest["runs"])
    edge_sets = []
    for rec in records:
        doc = json.loads((out_dir / rec["edges_path"]).read_text())
        edge_sets.append(SimpleCityGraph.build(doc["nodes"],
                                               [tuple(e) for e in doc["edges"]]))
    return manifest, edge_sets, len(records) < manifest["runs"]


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--road-graph", type=click.Path(), default=None)
@click.option("--theta", multiple=True, help="Threshold, e.g. 10/20 (repeatable).")
@click.option("--out", type=click.Path(), default=None,
              help="Output directory (defaults to the manifest's directory).")
@click.option("--allow-partial", is_flag=True, default=False)
def analyze(manifest_path, road_graph, theta, out, allow_partial):
    """Aggregate a campaign, sweep thresholds, write the findings report."""
    manifest, edge_sets, partial = _load_campaign(manifest_path, allow_partial)
    out_dir = Path(out) if out else Path(manifest_path).parent
    out_dir.mkdir(parents=True, exist_ok=True)

    weighted = graphlab.aggregate(edge_sets)
    (out_dir / "physarum_weighted.json").write_text(weighted.to_json())

    with open(out_dir / "weights.csv", "w") as fh:
        fh.write("city_a,city_b,count,k,weight\n")
        for (a, b), c in sorted(weighted.counts.items()):
            fh.write(f"{a},{b},{c},{weighted.k},{c / weighted.k:.6f}\n")

    thetas = [_parse_theta(t) for t in theta]
    for th in thetas:
        g = graphlab.threshold(weighted, th)
        stem = f"threshold_{th.numerator}_{th.denominator}"
        (out_dir / f"{stem}.json").write_text(g.to_json())
        (out_dir / f"{stem}.dot").write_text(g.to_dot(name=f"P({th})"))

    scenario = load_scenario(manifest["scenario"])
    pointset = PointSet.from_pairs(
        [(n, x, y) for n, x, y in scenario.cities.cities])
    h = None
    if road_graph:
        if Path(road_graph).exists():
            h = graphlab.load_road_graph(road_graph, known_cities=pointset.ids)
        else:
            log.warning("road graph %s missing; H relations skipped", road_graph)

    report = graphlab.findings_report(weighted, None, h, pointset)
    if h is None:
        report.add_info("road graph relations", "skipped",
                        note="no road graph supplied")
    if partial:
        report.add_info("campaign", "partial", note="results from a partial manifest")
    (out_dir / "findings.txt").write_text(report.to_text() + "\n")
    (out_dir / "findings.json").write_text(report.to_json())
    click.echo(report.to_text())


@main.command()
@scenario_opt
@click.option("--out", required=True, type=click.Path())
@click.option("--root", default="Roma", help="Root city for the growth sequence.")
def proximity(scenario, out, root):
    """Write Gabriel, RNG, MST and rooted-growth graphs for the cities."""
    sc = load_scenario(scenario)
    pointset = PointSet.from_pairs([(n, x, y) for n, x, y in sc.cities.cities])
    if root not in pointset.ids:
        raise ScenarioError(f"unknown root city {root!r}")
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, graph in (("gabriel", gabriel_graph(pointset)),
                        ("rng", rng_graph(pointset)),
                        ("mst", emst(pointset))):
        (out_dir / f"{name}.json").write_text(graph.to_json())
        (out_dir / f"{name}.dot").write_text(graph.to_dot(name=name))
    growth = prim_growth(pointset, root)
    (out_dir / "growth.json").write_text(json.dumps({
        "root": root,
        "stages": [{"node": n, "edge": list(e)} for n, e in growth.stages],
    }, indent=2))
    click.echo(f"proximity graphs written to {out_dir}")


@main.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), default=None)
@click.option("--graph", "graph_path", type=click.Path(exists=True), default=None)
@scenario_opt
@click.option("--out", required=True, type=click.Path())
def render(manifest_path, graph_path, scenario, out):
    """Composite snapshot images and draw graphs over the map."""
    from PIL import Image
    from . import render as R

    sc = load_scenario(scenario)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    wrote = 0
    if manifest_path:
        manifest = json.loads(Path(manifest_path).read_text())
        src = Path(manifest_path).parent
        for rec in manifest["records"]:
            paths = rec["snapshot_paths"]
            for occ_name, chem_name in zip(paths[::2], paths[1::2]):
                occ = np.asarray(Image.open(src / occ_name)) > 0
                chem = np.asarray(Image.open(src / chem_name)).astype(float)
                img = R.snapshot_image(sc, occ, chem)
                img.save(out_dir / (Path(occ_name).stem.replace("_occupancy", "") + ".png"))
                wrote += 1
    if graph_path:
        g = SimpleCityGraph.from_json(Path(graph_path).read_text())
        img = R.graph_image(sc, g)
        img.save(out_dir / (Path(graph_path).stem + ".png"))
        wrote += 1
    if not wrote:
        raise ScenarioError("render: supply --manifest and/or --graph")
    click.echo(f"{wrote} images written to {out_dir}")


@main.command("dump-config")
@scenario_opt
def dump_config(scenario):
    """Echo the fully validated scenario with all defaults filled in."""
    click.echo(load_scenario(scenario).dump_config(), nl=False)


def cli_entry():  # pragma: no cover
    try:
        main(standalone_mode=False)
    except (ScenarioError, ValueError, click.UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(1)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        sys.exit(2)
    except click.exceptions.Abort:
        sys.exit(1)


if __name__ == "__main__":  # pragma: no cover
    cli_entry()
