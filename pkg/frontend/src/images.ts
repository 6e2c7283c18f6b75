/**
 * Scrollable panel of the selected scenes. When a scene has an
 * image_ref the card shows the thumbnail; synthetic datasets have
 * none, so the card renders a glyph of scene id, generation seed, and
 * one chip per detected label. Membership comes from the selection
 * response, never recomputed. Hovering a discovered-object chip raises
 * the PMI anchor; clicking it steers the projection.
 */

import type { Anchor, LabelMeta, SelectionResponse } from "./types.js";

export interface ImagePanelHooks {
  onHover(anchor: Anchor | null): void;
  onCondition(anchor: Anchor): void;
}

const SVG_NS = "http://www.w3.org/2000/svg";
/** Detection locations sit on the generator's default 32-unit grid;
 * the payload carries no grid size, so this is presentational only. */
const GLYPH_GRID = 32;
const GLYPH_PX = 56;

export class ImagePanel {
  readonly el: HTMLElement;
  private readonly hooks: ImagePanelHooks;
  private readonly body: HTMLElement;
  private readonly cards = new Map<number, HTMLElement>();
  private origin = new Map<string, string>();

  constructor(hooks: ImagePanelHooks) {
    this.hooks = hooks;
    this.el = document.createElement("aside");
    this.el.className = "image-panel";
    const title = document.createElement("div");
    title.className = "panel-title";
    title.textContent = "selected scenes";
    this.el.appendChild(title);
    this.body = document.createElement("div");
    this.body.className = "panel-body";
    this.el.appendChild(this.body);
    this.renderEmpty();
  }

  setLabels(labels: LabelMeta[]): void {
    this.origin.clear();
    for (const lb of labels) this.origin.set(lb.name, lb.origin);
  }

  cardOf(scene: number): HTMLElement | undefined {
    return this.cards.get(scene);
  }

  render(selection: SelectionResponse | null): void {
    this.body.innerHTML = "";
    this.cards.clear();
    if (!selection || selection.scenes.length === 0) {
      this.renderEmpty();
      return;
    }
    for (const scene of selection.scenes) {
      const labels = selection.labels
        .filter((e) => e.members.includes(scene.scene_id))
        .map((e) => e.label);
      const card = this.buildCard(scene.scene_id, scene.seed, scene.image_ref, labels);
      this.cards.set(scene.scene_id, card);
      this.body.appendChild(card);
    }
  }

  /** Draws the anchor detection point in the scene's card. */
  showDetection(scene: number, loc: number[] | null): void {
    this.hideDetection();
    const card = this.cards.get(scene);
    if (!card || !loc) return;
    const glyph = card.querySelector("svg.glyph");
    if (!glyph) return;
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("class", "det-dot");
    dot.setAttribute("r", "1.4");
    dot.setAttribute("cx", String(Math.max(0, Math.min(GLYPH_GRID, loc[0]))));
    dot.setAttribute("cy", String(Math.max(0, Math.min(GLYPH_GRID, loc[1]))));
    glyph.appendChild(dot);
  }

  hideDetection(): void {
    for (const dot of this.body.querySelectorAll(".det-dot")) dot.remove();
  }

  private renderEmpty(): void {
    const note = document.createElement("div");
    note.className = "panel-empty";
    note.textContent = "brush a violin or scatterplot to list scenes";
    this.body.appendChild(note);
  }

  private buildCard(
    sceneId: number,
    seed: number,
    imageRef: string | null,
    labels: string[],
  ): HTMLElement {
    const card = document.createElement("div");
    card.className = "scene-card";
    card.dataset.scene = String(sceneId);

    if (imageRef) {
      const img = document.createElement("img");
      img.src = `/files/${imageRef}`;
      img.alt = `scene ${sceneId}`;
      card.appendChild(img);
    } else {
      const glyph = document.createElementNS(SVG_NS, "svg");
      glyph.setAttribute("class", "glyph");
      glyph.setAttribute("width", String(GLYPH_PX));
      glyph.setAttribute("height", String(GLYPH_PX));
      glyph.setAttribute("viewBox", `0 0 ${GLYPH_GRID} ${GLYPH_GRID}`);
      card.appendChild(glyph);
    }

    const bodyEl = document.createElement("div");
    bodyEl.className = "card-body";
    const title = document.createElement("div");
    title.className = "card-title";
    title.textContent = `scene ${sceneId}`;
    bodyEl.appendChild(title);
    const seedEl = document.createElement("div");
    seedEl.className = "card-seed";
    seedEl.textContent = `seed ${seed}`;
    bodyEl.appendChild(seedEl);

    const chips = document.createElement("div");
    chips.className = "chips";
    for (const label of labels) {
      const chip = document.createElement("span");
      const discovered = this.origin.get(label) === "discovered";
      chip.className = discovered ? "chip discovered" : "chip";
      chip.textContent = label;
      chip.dataset.label = label;
      if (discovered) {
        chip.addEventListener("mouseenter", () =>
          this.hooks.onHover({ label, scene: sceneId }),
        );
        chip.addEventListener("mouseleave", () => this.hooks.onHover(null));
        chip.addEventListener("click", () =>
          this.hooks.onCondition({ label, scene: sceneId }),
        );
      }
      chips.appendChild(chip);
    }
    bodyEl.appendChild(chips);
    card.appendChild(bodyEl);
    return card;
  }
}
