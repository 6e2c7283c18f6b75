#!/usr/bin/env python3
"""Drive one interactive session end to end, without the browser.

The Session object behind the HTTP API is used directly: lay out the
violins, brush a selection, look at PMI against one anchor instance,
steer the prompt objects toward a conditional density, and finally
reset, checking that the cached marginal coordinates come back exactly.

Run:
    python3 demos/steering_session.py
"""

import json
import time
from importlib import resources

import numpy as np

from denscope.dataset import generate_synthetic
from denscope.service import Session


def ascii_violin(profile, rows=12, cols=46):
    """Downsample a width profile into a symmetric text silhouette."""
    widths = np.asarray(profile["widths"])
    grid = np.asarray(profile["grid"])
    idx = np.linspace(0, len(widths) - 1, rows).round().astype(int)
    peak = widths.max() or 1.0
    lines = []
    for i in idx:
        half = int(round(widths[i] / peak * (cols // 2)))
        bar = ("#" * half).rjust(cols // 2) + ("#" * half).ljust(cols // 2)
        lines.append(f"  {grid[i]:7.2f} |{bar}|")
    return "\n".join(lines)


def main():
    cfg = json.loads((resources.files("denscope") / "configs" / "livingroom.json").read_text())
    ds, truth = generate_synthetic(cfg, seed=0)
    session = Session(ds, seed=0, bandwidth=40.0, max_iters=250)

    meta = session.meta()
    print(f"prompt: {meta['prompt']!r}")
    print("objects:", ", ".join(f"{l['name']} ({l['origin']}, {l['count']})" for l in meta["labels"]))

    print()
    print("1D embedding of the couch density, as the violin view sees it")
    t0 = time.perf_counter()
    violin = session.violin_payload("couch")
    print(f"   (first call computes and caches the embedding: {time.perf_counter() - t0:.2f}s)")
    print(ascii_violin(violin["profile"]))

    # brush the rarest couch mode, using the generator's ground truth
    assign = truth.assignments["couch"]
    rare = sorted(s for s, comp in assign.items() if comp == 2)
    print()
    print(f"brushing the 10% couch mode: {len(rare)} scenes")
    selection = session.set_selection(rare)
    for entry in selection["labels"]:
        n = len(entry["members"])
        print(f"  {entry['label']:<10} {n:3d} of the brushed scenes" + ("" if n else " (omitted)"))

    overlay = session.violin_payload("couch", subset_id=selection["selection_id"])
    print(f"subset violin area_scale: {overlay['subset']['profile']['area_scale']:.3f} "
          f"(= {len(rare)}/{meta['labels'][0]['count']})")

    anchor_scene = int(ds.occurrence_set("window")[0])
    print()
    print(f"hovering window in scene {anchor_scene}: PMI color domain")
    pm = session.pmi_payload("window", anchor_scene)
    print(f"  symmetric bound {pm['bound']:.4f} across "
          + ", ".join(e["label"] for e in pm["entries"]))

    print()
    print(f"steering: condition every prompt object on that window")
    t0 = time.perf_counter()
    for line in session.condition_stream("window", anchor_scene):
        dt = time.perf_counter() - t0
        if line["ok"]:
            e = line["embedding"]
            print(f"  {line['label']:<10} re-projected in {dt:5.2f}s "
                  f"(kl_density {e['kl_density']:.5f}, {e['iterations']} iterations)")
        else:
            print(f"  {line['label']:<10} {line['error']['code']}: {line['error']['message']}")
        t0 = time.perf_counter()

    print()
    print("reset: the marginal views come straight back from the cache")
    before = session.violin_payload("couch")["embedding"]["coords"]
    t0 = time.perf_counter()
    after = session.violin_payload("couch")["embedding"]["coords"]
    print(f"  cached fetch {1000 * (time.perf_counter() - t0):.1f}ms, "
          f"coordinates identical: {before == after}")


if __name__ == "__main__":
    main()
