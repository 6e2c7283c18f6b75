/** Shared test plumbing: app boot against the FakeApi, real MouseEvent
 * dispatch at scale-computed pixels, and DOM readbacks. jsdom computes
 * no layout, so bounding rects are zero and clientX/Y act as local
 * coordinates; in real browsers the views subtract the rect. */

import { App } from "../src/app.js";
import type { MatrixCell } from "../src/matrix.js";
import type { ViolinView } from "../src/violin.js";
import { FakeApi } from "./fakeapi.js";

export function tick(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

export interface Booted {
  app: App;
  api: FakeApi;
  root: HTMLElement;
}

export async function boot(api: FakeApi = new FakeApi()): Promise<Booted> {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app") as HTMLElement;
  const app = new App(root, api, { animationMs: 0, eagerMatrix: true });
  await app.init();
  return { app, api, root };
}

export function mouse(target: EventTarget, type: string, x: number, y: number): void {
  target.dispatchEvent(new MouseEvent(type, { clientX: x, clientY: y, bubbles: true }));
}

/** Drags a brush over [lo, hi] in embedding coordinates. */
export function brushViolin(view: ViolinView, lo: number, hi: number): void {
  const a = view.scale.apply(lo);
  const b = view.scale.apply(hi);
  if (view.orientation === "vertical") {
    mouse(view.hit, "mousedown", 0, a);
    mouse(document, "mousemove", 0, (a + b) / 2);
    mouse(document, "mouseup", 0, b);
  } else {
    mouse(view.hit, "mousedown", a, 0);
    mouse(document, "mousemove", (a + b) / 2, 0);
    mouse(document, "mouseup", b, 0);
  }
}

/** A click without drag, which the views treat as "clear". */
export function clickViolin(view: ViolinView): void {
  mouse(view.hit, "mousedown", 10, 10);
  mouse(document, "mouseup", 10, 10);
}

export function highlightedIds(cell: MatrixCell): number[] {
  return [...cell.circles.entries()]
    .filter(([, c]) => c.classList.contains("hl"))
    .map(([id]) => id)
    .sort((a, b) => a - b);
}

/** id -> "cx|cy" attribute strings, for exact-restore comparisons. */
export function snapshotPositions(cell: MatrixCell): Map<number, string> {
  return new Map(
    [...cell.circles.entries()].map(([id, c]) => [
      id,
      `${c.getAttribute("cx")}|${c.getAttribute("cy")}`,
    ]),
  );
}

export function sceneCardIds(root: HTMLElement): number[] {
  return [...root.querySelectorAll(".scene-card")].map((el) =>
    Number((el as HTMLElement).dataset.scene),
  );
}
