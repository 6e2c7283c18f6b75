/**
 * Scatterplot matrix: one cell per (prompt, discovered) label pair.
 * Each cell shows the prompt object's instances embedded under the
 * marginal density over the column's discovered object; pairs that
 * never co-occur render a placeholder. Cells support rectangular
 * brushing, served-membership highlighting, PMI recoloring, streamed
 * conditional re-projection with animation, and reset to the cached
 * marginal payload (re-rendered from the exact cached object, so the
 * restored coordinates match the pre-click ones byte for byte).
 */

import type { Api } from "./api.js";
import { LinearScale, extent, pmiColor, PMI_UNAVAILABLE_COLOR } from "./scales.js";
import type { EmbeddingJson, MatrixPayload } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const PLOT_PAD = 8;
const POINT_RADIUS = 2.5;
const BASE_FILL = "#5b7db1";
const CLICK_SLOP_PX = 3;

export interface MatrixOptions {
  cellSize: number;
  animationMs: number;
  onBrush?: (cell: MatrixCell, sceneIds: number[] | null) => void;
}

function klTooltip(prompt: string, discovered: string, emb: EmbeddingJson): string {
  return (
    `${prompt} x ${discovered}: kl_density=${emb.kl_density}, ` +
    `kl_neighbor=${emb.kl_neighbor}, iterations=${emb.iterations}`
  );
}

export class MatrixCell {
  readonly promptLabel: string;
  readonly discoveredLabel: string;
  readonly el: HTMLElement;
  state: "empty" | "loading" | "ready" | "placeholder" | "failed" = "empty";
  /** Marginal payload as served; reset re-renders from this object. */
  cachedMarginal: MatrixPayload | null = null;
  displayed: EmbeddingJson | null = null;
  circles = new Map<number, SVGCircleElement>();
  private readonly opts: MatrixOptions;
  private svg: SVGSVGElement | null = null;
  private pointsGroup: SVGGElement | null = null;
  private hit: SVGRectElement | null = null;
  private brushRect: SVGRectElement | null = null;
  private badge: HTMLElement | null = null;
  private members: Set<number> | null = null;
  private animToken = 0;

  constructor(promptLabel: string, discoveredLabel: string, opts: MatrixOptions) {
    this.promptLabel = promptLabel;
    this.discoveredLabel = discoveredLabel;
    this.opts = opts;
    this.el = document.createElement("div");
    this.el.className = "cell";
    this.el.dataset.prompt = promptLabel;
    this.el.dataset.discovered = discoveredLabel;
    this.el.style.width = `${opts.cellSize}px`;
    this.el.style.height = `${opts.cellSize}px`;
  }

  async load(api: Api): Promise<void> {
    if (this.state !== "empty") return;
    this.state = "loading";
    this.el.innerHTML = '<div class="loading">loading</div>';
    let payload: MatrixPayload;
    try {
      payload = await api.matrix(this.promptLabel, this.discoveredLabel);
    } catch (err) {
      this.state = "failed";
      this.el.innerHTML = '<div class="placeholder">unavailable</div>';
      this.el.title = err instanceof Error ? err.message : String(err);
      return;
    }
    this.cachedMarginal = payload;
    this.renderPayload(payload);
  }

  renderPayload(payload: MatrixPayload): void {
    this.animToken++;
    this.el.innerHTML = "";
    this.svg = null;
    this.pointsGroup = null;
    this.hit = null;
    this.brushRect = null;
    this.badge = null;
    this.circles.clear();
    if (!payload.co_occur || !payload.embedding) {
      this.state = "placeholder";
      this.displayed = null;
      const div = document.createElement("div");
      div.className = "placeholder";
      div.textContent = "never co-occur";
      if (payload.message) this.el.title = payload.message;
      this.el.appendChild(div);
      return;
    }
    this.state = "ready";
    const size = this.opts.cellSize;
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("width", String(size));
    this.svg.setAttribute("height", String(size));
    this.el.appendChild(this.svg);
    this.pointsGroup = document.createElementNS(SVG_NS, "g");
    this.svg.appendChild(this.pointsGroup);
    this.hit = document.createElementNS(SVG_NS, "rect");
    this.hit.setAttribute("class", "hit");
    this.hit.setAttribute("x", "0");
    this.hit.setAttribute("y", "0");
    this.hit.setAttribute("width", String(size));
    this.hit.setAttribute("height", String(size));
    this.svg.appendChild(this.hit);
    if (this.opts.onBrush) this.wireBrush();
    this.renderPoints(payload.embedding);
  }

  /** Pixel scales for one embedding, derived per render so conditional
   * coordinates (different extents) fill the same plot area. */
  private scalesFor(emb: EmbeddingJson): [LinearScale, LinearScale] {
    const xs = emb.coords.map((c) => c[0]);
    const ys = emb.coords.map((c) => (emb.dim > 1 ? c[1] : 0));
    const [x0, x1] = extent(xs);
    const [y0, y1] = extent(ys);
    const size = this.opts.cellSize;
    return [
      new LinearScale(x0, x1, PLOT_PAD, size - PLOT_PAD),
      new LinearScale(y0, y1, size - PLOT_PAD, PLOT_PAD),
    ];
  }

  private renderPoints(emb: EmbeddingJson): void {
    if (!this.pointsGroup) return;
    this.animToken++;
    this.displayed = emb;
    const [sx, sy] = this.scalesFor(emb);
    this.pointsGroup.innerHTML = "";
    this.circles.clear();
    for (let i = 0; i < emb.instance_ids.length; i++) {
      const id = emb.instance_ids[i];
      const c = document.createElementNS(SVG_NS, "circle");
      c.setAttribute("class", "pt");
      c.setAttribute("r", String(POINT_RADIUS));
      c.setAttribute("cx", String(sx.apply(emb.coords[i][0])));
      c.setAttribute("cy", String(sy.apply(emb.dim > 1 ? emb.coords[i][1] : 0)));
      c.setAttribute("fill", BASE_FILL);
      c.dataset.id = String(id);
      this.pointsGroup.appendChild(c);
      this.circles.set(id, c);
    }
    this.el.title = klTooltip(this.promptLabel, this.discoveredLabel, emb);
    this.applyMemberClasses();
  }

  /** Re-projection target from the condition stream. Points move to
   * the new coordinates, animated when the environment supports
   * requestAnimationFrame and animationMs > 0; the final attribute
   * values are always the exact target strings. */
  applyConditional(emb: EmbeddingJson): void {
    if (this.state !== "ready" || !this.pointsGroup) return;
    const before = new Map<number, [number, number]>();
    for (const [id, c] of this.circles) {
      before.set(id, [Number(c.getAttribute("cx")), Number(c.getAttribute("cy"))]);
    }
    this.renderPoints(emb);
    const ms = this.opts.animationMs;
    if (ms <= 0 || typeof requestAnimationFrame !== "function") return;
    const token = ++this.animToken;
    const targets = new Map<number, [string, string]>();
    for (const [id, c] of this.circles) {
      const from = before.get(id);
      if (!from) continue;
      targets.set(id, [c.getAttribute("cx") ?? "0", c.getAttribute("cy") ?? "0"]);
      c.setAttribute("cx", String(from[0]));
      c.setAttribute("cy", String(from[1]));
    }
    const t0 = performance.now();
    const step = (now: number) => {
      if (token !== this.animToken) return;
      const t = Math.min(1, (now - t0) / ms);
      for (const [id, [tx, ty]] of targets) {
        const c = this.circles.get(id);
        const from = before.get(id);
        if (!c || !from) continue;
        if (t >= 1) {
          c.setAttribute("cx", tx);
          c.setAttribute("cy", ty);
        } else {
          c.setAttribute("cx", String(from[0] + (Number(tx) - from[0]) * t));
          c.setAttribute("cy", String(from[1] + (Number(ty) - from[1]) * t));
        }
      }
      if (t < 1) requestAnimationFrame(step);
    };
    requestAnimationFrame(step);
  }

  /** Back to the cached marginal payload, exactly as first rendered. */
  reset(): void {
    this.setBadge(null);
    if (this.cachedMarginal) this.renderPayload(this.cachedMarginal);
  }

  setHighlight(members: Set<number> | null): void {
    this.members = members;
    this.applyMemberClasses();
  }

  private applyMemberClasses(): void {
    const active = this.members !== null && this.members.size > 0;
    this.el.classList.toggle("has-selection", active);
    for (const [id, c] of this.circles) {
      c.classList.toggle("hl", active && (this.members as Set<number>).has(id));
    }
  }

  /** Diverging PMI fill from served values; ids without a value keep
   * the base fill. */
  recolor(values: Map<number, number>, bound: number): void {
    for (const [id, c] of this.circles) {
      const v = values.get(id);
      c.setAttribute("fill", v === undefined ? BASE_FILL : pmiColor(v, bound));
    }
  }

  desaturate(reason: string): void {
    for (const c of this.circles.values()) {
      c.setAttribute("fill", PMI_UNAVAILABLE_COLOR);
    }
    if (this.svg) this.svg.setAttribute("data-unavailable", reason);
    this.el.title = reason;
  }

  resetColors(): void {
    for (const c of this.circles.values()) {
      c.setAttribute("fill", BASE_FILL);
    }
    if (this.svg) this.svg.removeAttribute("data-unavailable");
    if (this.displayed) {
      this.el.title = klTooltip(this.promptLabel, this.discoveredLabel, this.displayed);
    }
  }

  setBadge(message: string | null): void {
    if (this.badge) {
      this.badge.remove();
      this.badge = null;
    }
    if (message === null) return;
    this.badge = document.createElement("span");
    this.badge.className = "warn-badge";
    this.badge.textContent = "!";
    this.badge.title = message;
    this.el.appendChild(this.badge);
  }

  clearBrush(): void {
    if (this.brushRect) {
      this.brushRect.remove();
      this.brushRect = null;
    }
  }

  /** Scene ids of displayed instances inside the pixel rectangle. */
  private idsInRect(x0: number, y0: number, x1: number, y1: number): number[] {
    const [xa, xb] = x0 <= x1 ? [x0, x1] : [x1, x0];
    const [ya, yb] = y0 <= y1 ? [y0, y1] : [y1, y0];
    const ids: number[] = [];
    for (const [id, c] of this.circles) {
      const cx = Number(c.getAttribute("cx"));
      const cy = Number(c.getAttribute("cy"));
      if (cx >= xa && cx <= xb && cy >= ya && cy <= yb) ids.push(id);
    }
    return ids.sort((a, b) => a - b);
  }

  private localPoint(ev: MouseEvent): [number, number] {
    const rect = (this.svg as SVGSVGElement).getBoundingClientRect();
    return [ev.clientX - rect.left, ev.clientY - rect.top];
  }

  private drawBrush(x0: number, y0: number, x1: number, y1: number): void {
    if (!this.svg || !this.hit) return;
    if (!this.brushRect) {
      this.brushRect = document.createElementNS(SVG_NS, "rect");
      this.brushRect.setAttribute("class", "brush-rect");
      this.svg.insertBefore(this.brushRect, this.hit);
    }
    this.brushRect.setAttribute("x", String(Math.min(x0, x1)));
    this.brushRect.setAttribute("y", String(Math.min(y0, y1)));
    this.brushRect.setAttribute("width", String(Math.abs(x1 - x0)));
    this.brushRect.setAttribute("height", String(Math.abs(y1 - y0)));
  }

  private wireBrush(): void {
    if (!this.hit) return;
    this.hit.addEventListener("mousedown", (down: MouseEvent) => {
      down.preventDefault();
      const [x0, y0] = this.localPoint(down);
      let [x1, y1] = [x0, y0];
      const move = (ev: Event) => {
        [x1, y1] = this.localPoint(ev as MouseEvent);
        this.drawBrush(x0, y0, x1, y1);
      };
      const up = (ev: Event) => {
        document.removeEventListener("mousemove", move);
        document.removeEventListener("mouseup", up);
        [x1, y1] = this.localPoint(ev as MouseEvent);
        if (Math.abs(x1 - x0) < CLICK_SLOP_PX && Math.abs(y1 - y0) < CLICK_SLOP_PX) {
          this.clearBrush();
          this.opts.onBrush?.(this, null);
          return;
        }
        this.drawBrush(x0, y0, x1, y1);
        this.opts.onBrush?.(this, this.idsInRect(x0, y0, x1, y1));
      };
      document.addEventListener("mousemove", move);
      document.addEventListener("mouseup", up);
    });
  }
}

export class MatrixView {
  readonly el: HTMLElement;
  readonly cells = new Map<string, MatrixCell>();
  readonly promptLabels: string[];
  readonly discoveredLabels: string[];

  constructor(promptLabels: string[], discoveredLabels: string[], opts: MatrixOptions) {
    this.promptLabels = promptLabels;
    this.discoveredLabels = discoveredLabels;
    this.el = document.createElement("div");
    this.el.className = "matrix";
    this.el.style.gridTemplateColumns = `repeat(${Math.max(1, discoveredLabels.length)}, max-content)`;
    for (const s of promptLabels) {
      for (const t of discoveredLabels) {
        const cell = new MatrixCell(s, t, opts);
        this.cells.set(MatrixView.key(s, t), cell);
        this.el.appendChild(cell.el);
      }
    }
  }

  static key(promptLabel: string, discoveredLabel: string): string {
    return `${promptLabel}${discoveredLabel}`;
  }

  cell(promptLabel: string, discoveredLabel: string): MatrixCell | undefined {
    return this.cells.get(MatrixView.key(promptLabel, discoveredLabel));
  }

  row(promptLabel: string): MatrixCell[] {
    return this.discoveredLabels
      .map((t) => this.cell(promptLabel, t))
      .filter((c): c is MatrixCell => c !== undefined);
  }

  column(discoveredLabel: string): MatrixCell[] {
    return this.promptLabels
      .map((s) => this.cell(s, discoveredLabel))
      .filter((c): c is MatrixCell => c !== undefined);
  }

  /** Lazy loading through IntersectionObserver when available (real
   * browsers); otherwise everything loads eagerly, which the service's
   * embedding cache makes cheap. */
  startLoading(api: Api, eager: boolean): Promise<void> {
    if (eager || typeof IntersectionObserver === "undefined") {
      return Promise.all([...this.cells.values()].map((c) => c.load(api))).then(() => undefined);
    }
    const byElement = new Map<Element, MatrixCell>();
    for (const cell of this.cells.values()) byElement.set(cell.el, cell);
    const observer = new IntersectionObserver((entries) => {
      for (const entry of entries) {
        if (!entry.isIntersecting) continue;
        const cell = byElement.get(entry.target);
        if (cell) {
          observer.unobserve(entry.target);
          void cell.load(api);
        }
      }
    });
    for (const el of byElement.keys()) observer.observe(el);
    return Promise.resolve();
  }
}
