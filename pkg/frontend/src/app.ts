/**
 * Application shell: loads /api/meta, builds the layout (vertical
 * prompt-object violin column, horizontal discovered-object violin row
 * in green, scatterplot matrix, image panel, anchor chip), and owns
 * every service interaction. All async responses flow through
 * revision-tagged handlers, so a response that lost the race to a
 * newer request is never applied.
 */

import type { Api } from "./api.js";
import { ImagePanel } from "./images.js";
import { MatrixCell, MatrixView } from "./matrix.js";
import { ViewState } from "./state.js";
import type { Anchor, Meta, PmiPayload, ViolinPayload } from "./types.js";
import { ViolinView } from "./violin.js";

export interface AppOptions {
  /** Conditional re-projection animation; 0 applies instantly. */
  animationMs?: number;
  /** Skip IntersectionObserver and load every matrix cell up front. */
  eagerMatrix?: boolean;
}

const CELL_SIZE = 170;
const VIOLIN_THICKNESS = 64;
const PROMPT_FILL = "#6b7fc4";
const DISCOVERED_FILL = "#4c9e62";

interface Brushable {
  clearBrush(): void;
}

export class App {
  readonly root: HTMLElement;
  readonly api: Api;
  readonly state = new ViewState();
  readonly options: Required<AppOptions>;
  meta: Meta | null = null;
  violins = new Map<string, ViolinView>();
  matrix: MatrixView | null = null;
  images: ImagePanel | null = null;
  private chipSlot: HTMLElement | null = null;
  private brushingView: Brushable | null = null;

  constructor(root: HTMLElement, api: Api, options: AppOptions = {}) {
    this.root = root;
    this.api = api;
    this.options = {
      animationMs: options.animationMs ?? 400,
      eagerMatrix: options.eagerMatrix ?? false,
    };
  }

  async init(): Promise<void> {
    let meta: Meta;
    let payloads: ViolinPayload[];
    try {
      meta = await this.api.meta();
      payloads = await Promise.all(meta.labels.map((lb) => this.api.violin(lb.name)));
    } catch (err) {
      this.renderError(err);
      return;
    }
    this.meta = meta;
    const byLabel = new Map(payloads.map((p) => [p.label, p]));
    this.buildLayout(meta, byLabel);
    if (this.matrix) {
      await this.matrix.startLoading(this.api, this.options.eagerMatrix);
    }
  }

  /** POSTs the selection and applies the SERVED membership to every
   * view; null clears. On failure the triggering brush is reverted. */
  async select(sceneIds: number[] | null): Promise<void> {
    const ticket = this.state.revisions.begin("selection");
    const view = this.brushingView;
    let resp;
    try {
      resp = await this.api.setSelection(sceneIds ?? []);
    } catch {
      if (this.state.revisions.isCurrent("selection", ticket)) view?.clearBrush();
      return;
    }
    if (!this.state.revisions.isCurrent("selection", ticket)) return;
    this.state.selection = resp;
    this.applySelection();
  }

  /** Fetches PMI for a hovered (discovered label, scene) anchor, shows
   * the detection point, and recolors that label's matrix column with
   * the diverging scale; null restores base colors. */
  async hoverPmi(anchor: Anchor | null): Promise<void> {
    this.state.hover = anchor;
    const ticket = this.state.revisions.begin("pmi");
    if (!anchor) {
      if (this.matrix) {
        for (const cell of this.matrix.cells.values()) {
          if (cell.state === "ready") cell.resetColors();
        }
      }
      this.images?.hideDetection();
      return;
    }
    let payload: PmiPayload;
    try {
      payload = await this.api.pmi(anchor.label, anchor.scene);
    } catch {
      return;
    }
    if (!this.state.revisions.isCurrent("pmi", ticket)) return;
    this.images?.showDetection(anchor.scene, payload.anchor.loc);
    if (!this.matrix) return;
    const byLabel = new Map(payload.entries.map((e) => [e.label, e]));
    const unavailable = new Set(payload.unavailable);
    for (const cell of this.matrix.column(anchor.label)) {
      if (cell.state !== "ready") continue;
      if (unavailable.has(cell.promptLabel)) {
        cell.desaturate(`PMI unavailable for ${cell.promptLabel}`);
        continue;
      }
      const entry = byLabel.get(cell.promptLabel);
      if (!entry) continue;
      const values = new Map(
        entry.instance_ids.map((id, i) => [id, entry.values[i]] as [number, number]),
      );
      cell.recolor(values, payload.bound);
    }
  }

  /** Streams the conditional re-projection for an anchor and applies
   * each prompt label's embedding to its matrix row as it arrives.
   * Per-label failures keep the row's prior state plus a warning
   * badge. A newer click or a reset makes in-flight lines stale. */
  async condition(anchor: Anchor): Promise<void> {
    const ticket = this.state.revisions.begin("condition");
    this.state.conditioned = anchor;
    this.showChip(anchor);
    try {
      for await (const line of this.api.condition(anchor.label, anchor.scene)) {
        if (!this.state.revisions.isCurrent("condition", ticket)) return;
        if (!this.matrix) return;
        for (const cell of this.matrix.row(line.label)) {
          if (line.ok) {
            cell.setBadge(null);
            cell.applyConditional(line.embedding);
          } else {
            cell.setBadge(`${line.error.code}: ${line.error.message}`);
          }
        }
      }
    } catch (err) {
      if (this.state.revisions.isCurrent("condition", ticket)) {
        this.markChipFailed(err instanceof Error ? err.message : String(err));
      }
    }
  }

  /** Clears the anchor and restores every steered cell from its cached
   * marginal payload; also invalidates any in-flight stream. */
  resetCondition(): void {
    this.state.revisions.begin("condition");
    this.state.conditioned = null;
    this.hideChip();
    if (!this.matrix) return;
    for (const cell of this.matrix.cells.values()) {
      const marginal = cell.cachedMarginal?.embedding ?? null;
      if (cell.cachedMarginal && cell.displayed !== marginal) {
        cell.reset();
      } else {
        cell.setBadge(null);
      }
    }
  }

  private applySelection(): void {
    const active = this.state.hasSelection();
    for (const [label, view] of this.violins) {
      view.setOverlay(active ? this.state.overlayOf(label) : null);
    }
    if (this.matrix) {
      for (const cell of this.matrix.cells.values()) {
        cell.setHighlight(active ? this.state.membersOf(cell.promptLabel) : null);
      }
    }
    this.images?.render(active ? this.state.selection : null);
  }

  private onViolinBrush(view: ViolinView, range: [number, number] | null): void {
    this.brushingView = view;
    void this.select(range === null ? null : view.brushedIds(range));
  }

  private onCellBrush(cell: MatrixCell, sceneIds: number[] | null): void {
    this.brushingView = cell;
    void this.select(sceneIds);
  }

  private buildLayout(meta: Meta, violinPayloads: Map<string, ViolinPayload>): void {
    this.root.innerHTML = "";
    const promptLabels = meta.labels.filter((lb) => lb.origin === "prompt");
    const discoveredLabels = meta.labels.filter((lb) => lb.origin === "discovered");

    const appEl = document.createElement("div");
    appEl.className = "app";

    const header = document.createElement("header");
    header.className = "app-header";
    const h1 = document.createElement("h1");
    h1.textContent = "denscope";
    header.appendChild(h1);
    const promptText = document.createElement("span");
    promptText.className = "prompt-text";
    promptText.textContent = meta.prompt;
    header.appendChild(promptText);
    this.chipSlot = document.createElement("span");
    this.chipSlot.className = "chip-slot";
    header.appendChild(this.chipSlot);
    appEl.appendChild(header);

    const frame = document.createElement("div");
    frame.className = "frame";

    const corner = document.createElement("div");
    corner.className = "corner";
    frame.appendChild(corner);

    const discRow = document.createElement("div");
    discRow.className = "discovered-row";
    for (const lb of discoveredLabels) {
      const payload = violinPayloads.get(lb.name);
      if (!payload) continue;
      let view: ViolinView;
      view = new ViolinView(payload, {
        orientation: "horizontal",
        length: CELL_SIZE,
        thickness: VIOLIN_THICKNESS,
        fill: DISCOVERED_FILL,
        onBrush: (range) => this.onViolinBrush(view, range),
      });
      this.violins.set(lb.name, view);
      discRow.appendChild(view.el);
    }
    frame.appendChild(discRow);

    const promptCol = document.createElement("div");
    promptCol.className = "prompt-col";
    for (const lb of promptLabels) {
      const payload = violinPayloads.get(lb.name);
      if (!payload) continue;
      let view: ViolinView;
      view = new ViolinView(payload, {
        orientation: "vertical",
        length: CELL_SIZE,
        thickness: VIOLIN_THICKNESS,
        fill: PROMPT_FILL,
        onBrush: (range) => this.onViolinBrush(view, range),
      });
      this.violins.set(lb.name, view);
      promptCol.appendChild(view.el);
    }
    frame.appendChild(promptCol);

    this.matrix = new MatrixView(
      promptLabels.map((lb) => lb.name),
      discoveredLabels.map((lb) => lb.name),
      {
        cellSize: CELL_SIZE,
        animationMs: this.options.animationMs,
        onBrush: (cell, ids) => this.onCellBrush(cell, ids),
      },
    );
    frame.appendChild(this.matrix.el);

    this.images = new ImagePanel({
      onHover: (anchor) => void this.hoverPmi(anchor),
      onCondition: (anchor) => void this.condition(anchor),
    });
    this.images.setLabels(meta.labels);
    frame.appendChild(this.images.el);

    appEl.appendChild(frame);
    this.root.appendChild(appEl);
  }

  private showChip(anchor: Anchor): void {
    if (!this.chipSlot) return;
    this.chipSlot.innerHTML = "";
    const chip = document.createElement("span");
    chip.className = "anchor-chip";
    const text = document.createElement("span");
    text.textContent = `conditioned on ${anchor.label} / scene ${anchor.scene}`;
    chip.appendChild(text);
    const reset = document.createElement("button");
    reset.className = "chip-reset";
    reset.type = "button";
    reset.textContent = "x";
    reset.title = "restore marginal embeddings";
    reset.addEventListener("click", () => this.resetCondition());
    chip.appendChild(reset);
    this.chipSlot.appendChild(chip);
  }

  private markChipFailed(message: string): void {
    const chip = this.chipSlot?.querySelector(".anchor-chip");
    if (chip instanceof HTMLElement) {
      chip.classList.add("failed");
      chip.title = `stream failed: ${message}`;
    }
  }

  private hideChip(): void {
    if (this.chipSlot) this.chipSlot.innerHTML = "";
  }

  private renderError(err: unknown): void {
    this.root.innerHTML = "";
    const panel = document.createElement("div");
    panel.className = "error-panel";
    panel.textContent = `failed to load session: ${
      err instanceof Error ? err.message : String(err)
    }`;
    this.root.appendChild(panel);
  }
}
