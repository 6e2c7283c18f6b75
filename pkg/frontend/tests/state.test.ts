import { describe, expect, it } from "vitest";

import { Revisions, ViewState } from "../src/state.js";
import { fixtures } from "./fixtures.js";

describe("Revisions", () => {
  it("only the latest ticket of a scope is current", () => {
    const rev = new Revisions();
    const first = rev.begin("selection");
    expect(rev.isCurrent("selection", first)).toBe(true);
    const second = rev.begin("selection");
    expect(rev.isCurrent("selection", first)).toBe(false);
    expect(rev.isCurrent("selection", second)).toBe(true);
  });

  it("scopes are independent", () => {
    const rev = new Revisions();
    const sel = rev.begin("selection");
    const cond = rev.begin("condition");
    rev.begin("condition");
    expect(rev.isCurrent("selection", sel)).toBe(true);
    expect(rev.isCurrent("condition", cond)).toBe(false);
  });

  it("a fresh scope has revision zero, so no ticket predates it", () => {
    const rev = new Revisions();
    expect(rev.current("pmi")).toBe(0);
    expect(rev.isCurrent("pmi", 1)).toBe(false);
  });
});

describe("ViewState", () => {
  it("reads served membership and overlays per label", () => {
    const state = new ViewState();
    state.selection = structuredClone(fixtures.selections.mode);
    expect([...state.membersOf("couch")].sort((a, b) => a - b)).toEqual(
      fixtures.truth.scene_ids,
    );
    expect(state.overlayOf("couch")).not.toBeNull();
    expect(state.membersOf("no such label").size).toBe(0);
    expect(state.overlayOf("no such label")).toBeNull();
    expect(state.hasSelection()).toBe(true);
  });

  it("an empty selection clears hasSelection", () => {
    const state = new ViewState();
    state.selection = structuredClone(fixtures.selections.empty);
    expect(state.hasSelection()).toBe(false);
  });
});
