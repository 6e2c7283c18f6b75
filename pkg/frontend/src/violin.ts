/**
 * One violin: a mirrored area mark of the served width profile along a
 * 1D embedding axis, an optional subset overlay, and a drag brush that
 * reports a coordinate range. Vertical orientation (prompt column)
 * puts the axis on y; horizontal (discovered row) puts it on x.
 *
 * Widths are max-width normalized per plot against the BASE profile;
 * the overlay reuses the base factor, so the served area_scale carries
 * through to the drawn areas unchanged.
 */

import { LinearScale } from "./scales.js";
import type { ViolinPayload, ViolinProfile } from "./types.js";

export type Orientation = "vertical" | "horizontal";

export interface ViolinOptions {
  orientation: Orientation;
  length: number;
  thickness: number;
  fill: string;
  onBrush?: (range: [number, number] | null) => void;
}

const AXIS_PAD = 4;
const CLICK_SLOP_PX = 3;

const SVG_NS = "http://www.w3.org/2000/svg";

/** Half-width pixel offsets for a profile, normalized by a shared
 * maximum so width stays proportional to the served values. */
export function violinOffsets(
  widths: number[],
  maxWidth: number,
  halfThickness: number,
): number[] {
  if (maxWidth <= 0) return widths.map(() => 0);
  return widths.map((w) => (w / maxWidth) * halfThickness);
}

export class ViolinView {
  readonly el: HTMLElement;
  readonly svg: SVGSVGElement;
  readonly hit: SVGRectElement;
  readonly payload: ViolinPayload;
  readonly scale: LinearScale;
  readonly baseMax: number;
  private readonly opts: ViolinOptions;
  private readonly marks: SVGGElement;
  private overlayPath: SVGPathElement | null = null;
  private brushRect: SVGRectElement | null = null;

  constructor(payload: ViolinPayload, opts: ViolinOptions) {
    this.payload = payload;
    this.opts = opts;
    this.baseMax = Math.max(...payload.profile.grid.map((_, i) => payload.profile.widths[i]));

    const grid = payload.profile.grid;
    this.scale = new LinearScale(
      grid[0],
      grid[grid.length - 1],
      AXIS_PAD,
      opts.length - AXIS_PAD,
    );

    this.el = document.createElement("div");
    this.el.className = `violin ${opts.orientation}`;
    this.el.dataset.label = payload.label;

    const title = document.createElement("div");
    title.className = "violin-title";
    title.textContent = payload.label;
    title.title = payload.label;
    this.el.appendChild(title);

    this.svg = document.createElementNS(SVG_NS, "svg");
    const [w, h] =
      opts.orientation === "vertical"
        ? [opts.thickness, opts.length]
        : [opts.length, opts.thickness];
    this.svg.setAttribute("width", String(w));
    this.svg.setAttribute("height", String(h));
    this.el.appendChild(this.svg);

    this.marks = document.createElementNS(SVG_NS, "g");
    this.svg.appendChild(this.marks);

    const base = this.areaPath(payload.profile.widths);
    base.setAttribute("class", "base-mark");
    base.setAttribute("fill", opts.fill);
    this.marks.appendChild(base);

    this.hit = document.createElementNS(SVG_NS, "rect");
    this.hit.setAttribute("class", "hit");
    this.hit.setAttribute("x", "0");
    this.hit.setAttribute("y", "0");
    this.hit.setAttribute("width", String(w));
    this.hit.setAttribute("height", String(h));
    this.svg.appendChild(this.hit);

    if (opts.onBrush) this.wireBrush();
  }

  get orientation(): Orientation {
    return this.opts.orientation;
  }

  /** Instance ids whose 1D coordinate falls inside [lo, hi]. */
  brushedIds(range: [number, number]): number[] {
    const [lo, hi] = range[0] <= range[1] ? range : [range[1], range[0]];
    const emb = this.payload.embedding;
    const ids: number[] = [];
    for (let i = 0; i < emb.instance_ids.length; i++) {
      const c = emb.coords[i][0];
      if (c >= lo && c <= hi) ids.push(emb.instance_ids[i]);
    }
    return ids.sort((a, b) => a - b);
  }

  setOverlay(profile: ViolinProfile | null): void {
    if (this.overlayPath) {
      this.overlayPath.remove();
      this.overlayPath = null;
    }
    if (!profile) return;
    const path = this.areaPath(profile.widths);
    path.setAttribute("class", "overlay-mark");
    path.dataset.areaScale = String(profile.area_scale);
    this.marks.appendChild(path);
    this.overlayPath = path;
  }

  getOverlayElement(): SVGPathElement | null {
    return this.overlayPath;
  }

  clearBrush(): void {
    if (this.brushRect) {
      this.brushRect.remove();
      this.brushRect = null;
    }
  }

  /** Mirrored area mark; overlay widths use the base normalization. */
  private areaPath(widths: number[]): SVGPathElement {
    const offsets = violinOffsets(widths, this.baseMax, this.opts.thickness / 2);
    const grid = this.payload.profile.grid;
    const center = this.opts.thickness / 2;
    const fwd: string[] = [];
    const back: string[] = [];
    for (let i = 0; i < grid.length; i++) {
      const a = this.scale.apply(grid[i]);
      if (this.opts.orientation === "vertical") {
        fwd.push(`${center + offsets[i]},${a}`);
        back.push(`${center - offsets[i]},${a}`);
      } else {
        fwd.push(`${a},${center + offsets[i]}`);
        back.push(`${a},${center - offsets[i]}`);
      }
    }
    back.reverse();
    const path = document.createElementNS(SVG_NS, "path");
    path.setAttribute("d", `M${fwd.join("L")}L${back.join("L")}Z`);
    return path;
  }

  private axisPx(ev: MouseEvent): number {
    const rect = this.svg.getBoundingClientRect();
    return this.opts.orientation === "vertical"
      ? ev.clientY - rect.top
      : ev.clientX - rect.left;
  }

  private drawBrush(a: number, b: number): void {
    if (!this.brushRect) {
      this.brushRect = document.createElementNS(SVG_NS, "rect");
      this.brushRect.setAttribute("class", "brush-rect");
      this.svg.insertBefore(this.brushRect, this.hit);
    }
    const lo = Math.min(a, b);
    const span = Math.abs(b - a);
    if (this.opts.orientation === "vertical") {
      this.brushRect.setAttribute("x", "0");
      this.brushRect.setAttribute("width", String(this.opts.thickness));
      this.brushRect.setAttribute("y", String(lo));
      this.brushRect.setAttribute("height", String(span));
    } else {
      this.brushRect.setAttribute("y", "0");
      this.brushRect.setAttribute("height", String(this.opts.thickness));
      this.brushRect.setAttribute("x", String(lo));
      this.brushRect.setAttribute("width", String(span));
    }
  }

  private wireBrush(): void {
    this.hit.addEventListener("mousedown", (down: MouseEvent) => {
      down.preventDefault();
      const start = this.axisPx(down);
      let last = start;
      const move = (ev: Event) => {
        last = this.axisPx(ev as MouseEvent);
        this.drawBrush(start, last);
      };
      const up = (ev: Event) => {
        document.removeEventListener("mousemove", move);
        document.removeEventListener("mouseup", up);
        last = this.axisPx(ev as MouseEvent);
        if (Math.abs(last - start) < CLICK_SLOP_PX) {
          this.clearBrush();
          this.opts.onBrush?.(null);
          return;
        }
        this.drawBrush(start, last);
        const lo = this.scale.invert(Math.min(start, last));
        const hi = this.scale.invert(Math.max(start, last));
        this.opts.onBrush?.([Math.min(lo, hi), Math.max(lo, hi)]);
      };
      document.addEventListener("mousemove", move);
      document.addEventListener("mouseup", up);
    });
  }
}
