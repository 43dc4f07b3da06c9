"""Command-line interface.

Every command is deterministic given its flags and config files; reports
embed the fully resolved configuration.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import click

from . import io
from .cognition import mc_suite
from .connectome import build_group_cbt
from .core import CognitiveConfig, ReservoirConfig
from .errors import CogresError
from .evaluation import run_full_evaluation
from .reservoir import check_echo_state, init_reservoir
from .synth import MODALITY_KINDS, synth_cohort, synth_modality

log = logging.getLogger("cogres")

SYNTH_MODALITY_STEPS = 1000
SYNTH_MODALITY_DIMS = 8

threads_option = click.option(
    "--threads",
    type=click.IntRange(min=1),
    default=1,
    envvar="COGRES_THREADS",
    show_default=True,
    help="Worker threads for per-subject work (results do not depend on it).",
)


def _load_config(cls, path, **overrides):
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise click.BadParameter(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise click.BadParameter(f"config {path} must hold a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return cls.from_dict(data)


def _parse_modalities(specs):
    out = []
    for spec in specs:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise click.BadParameter(f"expected NAME=PATH, got {spec!r}", param_hint="--modality")
        out.append((name, io.load_timeseries(path)))
    return out


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except CogresError as exc:
            raise click.ClickException(str(exc)) from None


@click.group(cls=_Group)
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose):
    """Reservoir-encoded connectome templates and their memory capacity."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(name)s: %(message)s")


@main.command()
@click.option("--subjects", type=click.IntRange(min=1), required=True)
@click.option("--rois", type=click.IntRange(min=2), default=111, show_default=True)
@click.option("--timepoints", type=click.IntRange(min=10), default=200, show_default=True)
@click.option("--groups", default="ASD,TD", show_default=True, help="Comma-separated group names.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--noise", type=click.FloatRange(min=0), default=0.5, show_default=True)
@click.option("--effect", type=click.FloatRange(min=0), default=1.0, show_default=True,
              help="Strength of the planted between-group difference.")
@click.option("--out", type=click.Path(file_okay=False), required=True)
def synth(subjects, rois, timepoints, groups, seed, noise, effect, out):
    """Write a synthetic cohort: one CSV per subject plus manifest.json."""
    names = [g.strip() for g in groups.split(",") if g.strip()]
    if len(set(names)) != len(names) or not names:
        raise click.BadParameter("group names must be non-empty and distinct", param_hint="--groups")
    manifest = synth_cohort(out, subjects, rois, timepoints, names, seed, noise, effect)
    click.echo(f"wrote {len(manifest.subjects)} subjects to {out}")


@main.command("synth-modality")
@click.option("--kind", type=click.Choice(MODALITY_KINDS), required=True)
@click.option("--timepoints", type=click.IntRange(min=50), default=1000, show_default=True)
@click.option("--dims", type=click.IntRange(min=1), default=SYNTH_MODALITY_DIMS, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def synth_modality_cmd(kind, timepoints, dims, seed, out):
    """Write a synthetic sensory feature sequence as CSV."""
    io.save_timeseries(synth_modality(kind, timepoints, dims, seed), out)


@main.command("gen-cbt")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--group", required=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=click.IntRange(min=0), help="Overrides the config seed.")
@threads_option
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def gen_cbt(manifest_path, group, config_path, seed, threads, out):
    """Build the template of one group; metadata goes next to it as JSON."""
    manifest = io.load_manifest(manifest_path)
    cfg = _load_config(ReservoirConfig, config_path, seed=seed)
    if "size" not in _config_keys(config_path):
        cfg = cfg.replace(size=manifest.atlas_dim)
    if group not in manifest.groups:
        raise click.ClickException(f"group {group!r} has no subjects (groups: {manifest.groups})")
    cbt = build_group_cbt(manifest, group, cfg, threads=threads)
    io.save_connectome(cbt, out)
    weights = init_reservoir(cfg, manifest.atlas_dim)
    ok, gap = check_echo_state(weights, cfg, seed=cfg.seed)
    meta = {
        "group": group,
        "subjects": sorted(s.id for s in manifest.by_group(group)),
        "config": cfg.to_dict(),
        "achieved_radius": weights.achieved_radius,
        "echo_state": {"contracting": ok, "final_gap": gap if gap != float("inf") else None},
    }
    io.write_json(meta, Path(out).with_suffix(".json"))


def _config_keys(path):
    if path is None:
        return set()
    return set(json.loads(Path(path).read_text()))


@main.command()
@click.option("--cbt", "cbt_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--modality", "modality_specs", multiple=True, metavar="NAME=PATH")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=click.IntRange(min=0))
@click.option("--leak", type=click.FloatRange(0, 1))
@click.option("--update-form", type=click.Choice(["leak_outside", "leak_inside"]))
@click.option("--tau-max", type=click.IntRange(min=1))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def mc(cbt_path, modality_specs, config_path, seed, leak, update_form, tau_max, out):
    """Memory capacity of a template for each input modality."""
    cfg = _load_config(
        CognitiveConfig, config_path, seed=seed, leak=leak, update_form=update_form, tau_max=tau_max
    )
    cbt = io.load_connectome(cbt_path)
    modalities = _parse_modalities(modality_specs)
    reports = mc_suite(cbt, modalities, cfg)
    io.write_json(
        {"cbt": str(cbt_path), "config": cfg.to_dict(), "reports": [r.to_dict() for r in reports]},
        out,
    )


@main.command("eval")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--folds", type=click.IntRange(min=2), default=5, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--cogconfig", "cogconfig_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--modality", "modality_specs", multiple=True, metavar="NAME=PATH",
              help="Input modality for memory capacity; without any, synthetic "
                   "visual-, text- and audio-like stand-ins are used.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Fold seed.")
@threads_option
@click.option("--out", type=click.Path(file_okay=False), required=True)
def eval_cmd(manifest_path, folds, config_path, cogconfig_path, modality_specs, seed, threads, out):
    """Cross-validated centeredness, topology, classification and memory capacity."""
    manifest = io.load_manifest(manifest_path)
    cfg = _load_config(ReservoirConfig, config_path)
    if "size" not in _config_keys(config_path):
        cfg = cfg.replace(size=manifest.atlas_dim)
    cogcfg = _load_config(CognitiveConfig, cogconfig_path)
    if modality_specs:
        modalities = _parse_modalities(modality_specs)
        sources = dict(m.split("=", 1) for m in modality_specs)
    else:
        modalities = [
            (kind, synth_modality(kind, SYNTH_MODALITY_STEPS, SYNTH_MODALITY_DIMS, cogcfg.seed))
            for kind in MODALITY_KINDS
        ]
        sources = {
            kind: f"synthetic(timepoints={SYNTH_MODALITY_STEPS}, dims={SYNTH_MODALITY_DIMS}, seed={cogcfg.seed})"
            for kind in MODALITY_KINDS
        }
    result = run_full_evaluation(manifest, cfg, cogcfg, modalities, k=folds, seed=seed, threads=threads)
    resolved = {
        "reservoir": cfg.to_dict(),
        "cognitive": cogcfg.to_dict(),
        "folds": folds,
        "fold_seed": seed,
        "modalities": sources,
    }
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for report in result.folds:
        body = report.to_dict()
        body["config"] = resolved
        io.write_json(body, out_dir / f"fold_{report.fold_index}.json")
    io.write_json({**result.summary, "config": resolved}, out_dir / "summary.json")
    click.echo(
        f"{folds} folds: centeredness {result.summary['centeredness']:.4f}, "
        f"accuracy {result.summary['classification']['accuracy']:.4f}"
    )


if __name__ == "__main__":
    main()
