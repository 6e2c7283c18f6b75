/**
 * Client view state and the revision ledger that serializes async
 * responses. Every request takes a ticket for its scope (selection,
 * pmi, condition); a response is applied only while its ticket is the
 * scope's latest, so stale responses are never applied.
 */

import type { Anchor, SelectionResponse, ViolinProfile } from "./types.js";

export class Revisions {
  private readonly counters = new Map<string, number>();

  begin(scope: string): number {
    const next = (this.counters.get(scope) ?? 0) + 1;
    this.counters.set(scope, next);
    return next;
  }

  current(scope: string): number {
    return this.counters.get(scope) ?? 0;
  }

  isCurrent(scope: string, ticket: number): boolean {
    return this.current(scope) === ticket;
  }
}

export class ViewState {
  readonly revisions = new Revisions();
  selection: SelectionResponse | null = null;
  hover: Anchor | null = null;
  conditioned: Anchor | null = null;

  /** Served membership for one label under the current selection. */
  membersOf(label: string): Set<number> {
    const entry = this.selection?.labels.find((e) => e.label === label);
    return new Set(entry?.members ?? []);
  }

  overlayOf(label: string): ViolinProfile | null {
    const entry = this.selection?.labels.find((e) => e.label === label);
    return entry?.overlay ?? null;
  }

  hasSelection(): boolean {
    return this.selection !== null && this.selection.scene_ids.length > 0;
  }
}
