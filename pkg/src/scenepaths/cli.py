"""Command line entry point: one subcommand per pipeline stage plus bench/evaluate."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import catalog as catalog_mod
from ._io import dumps, load_structured, write_json
from .config import Settings, build_oracle, load_settings
from .errors import InputError, OracleError, PipelineError, ScenePathsError
from .evalkit import RemoteEvaluator, compare, load_specs, report, summary_table
from .layout import PlacedScene, validate
from .oracle import load_rulebook
from .pipeline import STAGES, SceneRequest, generate
from .render import render_svg
from .splitter import KnowledgePaths, split

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_ORACLE, EXIT_PIPELINE = 0, 2, 3, 4, 5

log = logging.getLogger("scenepaths")


class UsageError(Exception):
    pass


def _room(text: str) -> tuple[float, float]:
    try:
        w, d = (float(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"room must look like WxD, got {text!r}") from None
    if w <= 0 or d <= 0:
        raise argparse.ArgumentTypeError("room dimensions must be > 0")
    return w, d


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="scenepaths", description=__doc__)
    p.add_argument("--config", help="experiment manifest (YAML or JSON); defaults to the packaged one")
    p.add_argument("--catalog", help="override the catalog path from the config")
    p.add_argument("--rulebook", help="override the rulebook path from the config")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def pipeline_flags(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tau", type=float)
        sp.add_argument("--k-main", type=_positive)
        sp.add_argument("--k-paired", type=_positive)
        sp.add_argument("--k-other", type=_positive)
        sp.add_argument("--baseline", action="store_true", help="single-corpus global top-k retrieval")
        sp.add_argument("--room", type=_room, help="room size as WxD meters")
        sp.add_argument("--oracle", choices=("rule", "remote"))
        sp.add_argument("--endpoint", help="remote oracle URL")

    sp = sub.add_parser("ingest", help="validate a catalog file")
    sp.add_argument("source", nargs="?")
    sp.add_argument("--out", help="write the normalized catalog here")

    sp = sub.add_parser("split", help="partition the catalog for a scene type")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--out")
    sp.add_argument("--workers", type=_positive, default=1)
    sp.add_argument("--oracle", choices=("rule", "remote"))
    sp.add_argument("--endpoint")

    sp = sub.add_parser("generate", help="run the full pipeline for one scene")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--out", help="scene file (default: stdout)")
    sp.add_argument("--svg", help="also write a top-down render")
    sp.add_argument("--partition", help="reuse a partition written by 'split' instead of splitting again")
    pipeline_flags(sp)

    sp = sub.add_parser("render", help="render a scene file as SVG")
    sp.add_argument("scene_file")
    sp.add_argument("--out", help="SVG path (default: stdout)")
    sp.add_argument("--rotation", type=int, default=0, choices=(0, 90, 180, 270))

    sp = sub.add_parser("bench", help="baseline vs multi-path missing rates")
    sp.add_argument("--specs", required=True)
    sp.add_argument("--n", type=_positive, default=20, help="scenes per spec")
    sp.add_argument("--out", help="report file (JSON)")
    sp.add_argument("--scenes-dir", help="also write every generated scene here")
    sp.add_argument("--workers", type=_positive, default=1)
    pipeline_flags(sp)

    sp = sub.add_parser("evaluate", help="missing-object report for scene files")
    sp.add_argument("scene_files", nargs="+")
    sp.add_argument("--specs", required=True)
    sp.add_argument("--out")
    sp.add_argument("--remote", action="store_true", help="also ask the remote judge for a score")
    sp.add_argument("--endpoint")
    return p


def _settings(args) -> Settings:
    s = load_settings(args.config)
    if args.catalog:
        s.catalog = Path(args.catalog)
    if args.rulebook:
        s.rulebook = Path(args.rulebook)
    if getattr(args, "oracle", None):
        s.oracle["kind"] = args.oracle
    if getattr(args, "endpoint", None):
        s.oracle["endpoint"] = args.endpoint
    if getattr(args, "room", None):
        s.room = args.room
    if getattr(args, "seed", None) is not None:
        s.seed = args.seed
    r = s.retrieval
    if getattr(args, "tau", None) is not None:
        r = replace(r, tau=args.tau)
    ks = {c: getattr(args, f"k_{c}", None) for c in ("main", "paired", "other")}
    if any(v is not None for v in ks.values()):
        r = replace(r, k_per_path={**r.k_per_path, **{c: v for c, v in ks.items() if v is not None}})
    if getattr(args, "baseline", False):
        r = replace(r, baseline_mode=True)
    s.retrieval = r
    return s


def _scene_type(text: str) -> str:
    if not text or not text.strip():
        raise UsageError("--scene must be non-empty")
    return text.strip()


def _emit(text: str, dest: str | None) -> None:
    if dest:
        Path(dest).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


class _Context:
    """Loaded inputs shared across the scenes of one command."""

    def __init__(self, settings: Settings):
        self.settings = settings
        self.catalog = catalog_mod.ingest(settings.catalog)
        kind = settings.oracle.get("kind", "rule")
        self.rulebook = load_rulebook(settings.rulebook) if kind == "rule" else None
        self._shared = None if kind == "rule" else build_oracle(settings, None, settings.seed)

    def oracle(self, seed: int):
        # rule oracles are cheap and seed their fallbacks, so each scene gets its own
        return self._shared or build_oracle(self.settings, self.rulebook, seed)

    def run(self, request: SceneRequest, paths: KnowledgePaths | None = None):
        s = self.settings
        return generate(request, self.catalog, self.oracle(request.seed), categories=s.categories,
                        limits=s.limits, layout_params=s.layout, paths=paths)


def cmd_ingest(args) -> int:
    source = args.source or load_settings(args.config).catalog
    cat = catalog_mod.ingest(source)
    print(f"{source}: {len(cat.assets)} assets, version {cat.version}, "
          f"feature_dim {cat.feature_dim or 0}", file=sys.stderr)
    if args.out:
        catalog_mod.write(cat, args.out)
    return EXIT_OK


def cmd_split(args) -> int:
    scene = _scene_type(args.scene)
    ctx = _Context(_settings(args))
    paths = split(ctx.catalog, ctx.settings.categories, scene, ctx.oracle(ctx.settings.seed), workers=args.workers)
    _emit(dumps(paths.to_dict()), args.out)
    for c, ids in paths.partition.items():
        print(f"{c}: {len(ids)}", file=sys.stderr)
    return EXIT_OK


def cmd_generate(args) -> int:
    scene_type = _scene_type(args.scene)
    ctx = _Context(_settings(args))
    paths = None
    if args.partition:
        try:
            paths = KnowledgePaths.from_dict(load_structured(args.partition))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.partition}: malformed partition: {exc}") from None
    gen = ctx.run(ctx.settings.request(scene_type), paths)
    for stage in STAGES:
        if stage in gen.timings:
            print(f"{stage:<14}{gen.timings[stage] * 1000:9.1f} ms", file=sys.stderr)
    _emit(dumps(gen.scene.to_dict()), args.out)
    if args.svg:
        Path(args.svg).write_text(render_svg(gen.scene), encoding="utf-8")
    if gen.failure:
        print(f"reply missing: {gen.failure} (no main object retrieved for {scene_type!r})", file=sys.stderr)
        return EXIT_PIPELINE
    problems = validate(gen.scene, ctx.settings.layout)
    for v in problems:
        print(f"violation: {v.kind} {','.join(v.ids)} {v.detail}", file=sys.stderr)
    dropped = gen.scene.audit.get("layout", {}).get("dropped", [])
    if dropped:
        print(f"dropped {len(dropped)} object(s) during placement", file=sys.stderr)
    return EXIT_PIPELINE if problems else EXIT_OK


def cmd_render(args) -> int:
    scene = PlacedScene.from_dict(load_structured(args.scene_file))
    _emit(render_svg(scene, rotation=args.rotation), args.out)
    return EXIT_OK


def run_bench(ctx: _Context, specs, n: int, workers: int = 1):
    """Matched batches: same scene types and seeds, baseline then multi-path."""
    s = ctx.settings
    jobs = [(spec.scene_type, s.seed + i) for spec in specs for i in range(n)]

    def batch(baseline: bool):
        def one(job):
            scene_type, seed = job
            req = s.request(scene_type, seed)
            req = replace(req, retrieval=replace(req.retrieval, baseline_mode=baseline))
            return ctx.run(req).scene

        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, jobs))

    base, multi = batch(True), batch(False)
    return compare(base, multi, specs), base, multi


def cmd_bench(args) -> int:
    specs = load_specs(args.specs)
    settings = _settings(args)
    settings.retrieval = replace(settings.retrieval, baseline_mode=False)
    ctx = _Context(settings)
    comparison, base, multi = run_bench(ctx, specs, args.n, args.workers)
    names = ("baseline", "multi-path")
    if args.out:
        write_json(args.out, comparison.to_dict(names))
    if args.scenes_dir:
        out = Path(args.scenes_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, batch in zip(names, (base, multi)):
            for scene in batch:
                slug = scene.scene_type.replace(" ", "_")
                write_json(out / f"{name}-{slug}-{scene.request['seed']}.json", scene.to_dict())
    print(summary_table(comparison, names))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    specs = load_specs(args.specs)
    scenes = [PlacedScene.from_dict(load_structured(p)) for p in args.scene_files]
    rep = report(scenes, specs)
    out = rep.to_dict()
    if args.remote:
        settings = _settings(args)
        settings.oracle["kind"] = "remote"
        judge = RemoteEvaluator(build_oracle(settings, None, settings.seed))
        out["remote_scores"] = [judge.score(s) for s in scenes]
    _emit(dumps(out), args.out)
    print(f"main missing {rep.main_missing_rate:.2%}, paired missing {rep.paired_missing_rate:.2%} "
          f"over {rep.n_scenes} scene(s)", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest, "split": cmd_split, "generate": cmd_generate,
    "render": cmd_render, "bench": cmd_bench, "evaluate": cmd_evaluate,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OracleError as exc:
        print(f"oracle error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except PipelineError as exc:
        print(f"pipeline error [{exc.stage}]: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except ScenePathsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_USAGE  # unreachable: parser.error exits


if __name__ == "__main__":
    sys.exit(main())
