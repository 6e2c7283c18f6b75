"""Batch entry points.

    denscope generate --config livingroom.json --seed 1 --out data/lr
    denscope validate --data data/lr
    denscope compare  --data data/lr --label couch --h 40,80 --seeds 0..4 --out cmp.csv
    denscope embed    --data data/lr --label couch --dim 1 --kind single --out emb.json
    denscope serve    --data data/lr --port 8000 --seed 7

Exit codes: 0 success, 1 validation or domain error, 2 usage error.
Every command is deterministic given its flags and input files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from importlib import resources
from pathlib import Path

from . import density
from .dataset import (
    generate_synthetic,
    load_dataset,
    load_generator_config,
    write_dataset,
    write_ground_truth,
)
from .embed import EmbedConfig, optimize, tsne_embed
from .errors import DenscopeError, GeneratorConfigError

CSV_COLUMNS = ["label", "h", "method", "seed", "kl_density", "kl_neighbor", "seconds", "iterations"]


def _parse_floats(text: str) -> list[float]:
    """Comma list: "40,80" -> [40.0, 80.0]."""
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of numbers: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _parse_seeds(text: str) -> list[int]:
    """Comma list of ints, each entry optionally an inclusive a..b range:
    "0..4" -> [0,1,2,3,4]; "0,5,7..9" -> [0,5,7,8,9]."""
    seeds: list[int] = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if ".." in part:
                lo, hi = part.split("..", 1)
                lo, hi = int(lo), int(hi)
                if hi < lo:
                    raise ValueError
                seeds.extend(range(lo, hi + 1))
            else:
                seeds.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a seed list: {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


def _resolve_config(text: str) -> Path:
    """A filesystem path, or the name of a bundled config (with or
    without the .json suffix)."""
    path = Path(text)
    if path.is_file():
        return path
    bundle = resources.files("denscope") / "configs"
    for name in (text, f"{text}.json"):
        candidate = bundle / name
        if candidate.is_file():
            return Path(str(candidate))
    raise GeneratorConfigError(f"missing config file: {text}")


def cmd_generate(args) -> int:
    cfg = load_generator_config(_resolve_config(args.config))
    ds, truth = generate_synthetic(cfg, args.seed)
    write_dataset(ds, args.out)
    write_ground_truth(truth, args.out)
    print(f"wrote {ds.num_scenes} scenes, {len(ds.detections)} detections to {args.out}")
    for lb in ds.labels:
        print(f"  {lb.name} ({lb.origin}): {len(ds.occurrence_set(lb))} instances")
    return 0


def cmd_validate(args) -> int:
    ds = load_dataset(args.data)
    print(f"ok: {args.data}")
    print(f"  prompt: {ds.prompt}")
    print(f"  scenes: {ds.num_scenes}, feature_dim: {ds.feature_dim}")
    print(f"  detections: {len(ds.detections)}")
    for lb in ds.labels:
        print(f"  {lb.name} ({lb.origin}): {len(ds.occurrence_set(lb))} instances")
    return 0


def cmd_compare(args) -> int:
    ds = load_dataset(args.data)
    label = ds.label(args.label)
    rows = []
    ratios = []
    for h in args.h:
        dv = density.single_density(ds, label, h)
        feats = ds.features_for(label, dv.instance_ids)
        for seed in args.seeds:
            cfg = EmbedConfig(dim=args.dim, lam=args.lam, seed=seed, max_iters=args.max_iters)
            start = time.perf_counter()
            base = tsne_embed(feats, cfg, eval_density=dv)
            t_base = time.perf_counter() - start
            start = time.perf_counter()
            ours = optimize(dv, feats, cfg)
            t_ours = time.perf_counter() - start
            rows.append([label.name, h, "tsne", seed, base.kl_density, base.kl_neighbor, t_base, base.iterations])
            rows.append([label.name, h, "dsne", seed, ours.kl_density, ours.kl_neighbor, t_ours, ours.iterations])
            ratios.append(ours.kl_density / base.kl_density)
            print(
                f"{label.name} h={h:g} seed={seed}: "
                f"tsne kl_density={base.kl_density:.6f} "
                f"dsne kl_density={ours.kl_density:.6f} "
                f"ratio={ratios[-1]:.4f}"
            )
    geo_mean = math.exp(sum(math.log(r) for r in ratios) / len(ratios))
    print(f"geometric mean kl_density ratio (dsne/tsne): {geo_mean:.6f}")
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            writer.writerows(rows)
        print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_embed(args) -> int:
    ds = load_dataset(args.data)
    label = ds.label(args.label)
    if args.kind == "single":
        dv = density.single_density(ds, label, args.h)
    elif args.kind.startswith("marginal:"):
        dv = density.marginal_density(ds, label, args.kind[len("marginal:"):], args.h)
    else:
        print(f"error: --kind must be 'single' or 'marginal:<label>', got {args.kind!r}", file=sys.stderr)
        return 2
    feats = ds.features_for(label, dv.instance_ids)
    cfg = EmbedConfig(dim=args.dim, seed=args.seed, max_iters=args.max_iters)
    result = optimize(dv, feats, cfg)
    doc = json.dumps(result.to_json(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
        print(f"wrote embedding ({result.iterations} iterations, "
              f"kl_density={result.kl_density:.6f}) to {args.out}")
    else:
        print(doc, end="")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import Session, create_app

    ds = load_dataset(args.data)  # invalid data exits before binding
    session = Session(
        ds, seed=args.seed, bandwidth=args.bandwidth, max_iters=args.max_iters
    )
    ui_dir = args.ui if args.ui and Path(args.ui).is_dir() else None
    if args.ui and ui_dir is None:
        print(f"error: UI directory not found: {args.ui}", file=sys.stderr)
        return 1
    app = create_app(session, ui_dir=ui_dir, files_dir=args.data)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="denscope", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthesize a dataset from a mixture config")
    p.add_argument("--config", required=True, help="config path or bundled config name")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output dataset directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="check a dataset directory against the format contract")
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compare", help="paired tsne/dsne runs over bandwidths and seeds")
    p.add_argument("--data", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--h", type=_parse_floats, default=[density.DEFAULT_BANDWIDTH],
                   help="comma list of KDE bandwidths (default 40)")
    p.add_argument("--seeds", type=_parse_seeds, default=[0],
                   help="comma list of seeds; a..b ranges allowed (default 0)")
    p.add_argument("--dim", type=int, default=2, choices=(1, 2))
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p.add_argument("--max-iters", type=int, default=250,
                   help="iteration cap per run (default 250; the library default of "
                        "1000 is rarely needed for the comparison)")
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("embed", help="embed one label's density and write the result JSON")
    p.add_argument("--data", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--dim", type=int, default=2, choices=(1, 2))
    p.add_argument("--kind", default="single", help="'single' or 'marginal:<label>'")
    p.add_argument("--h", type=float, default=density.DEFAULT_BANDWIDTH)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--out", default=None, help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("serve", help="launch the HTTP API and UI hosting")
    p.add_argument("--data", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bandwidth", type=float, default=density.DEFAULT_BANDWIDTH)
    p.add_argument("--max-iters", type=int, default=400)
    p.add_argument("--ui", default=None, help="static UI directory to serve at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DenscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
