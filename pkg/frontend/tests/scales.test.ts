import { describe, expect, it } from "vitest";

import {
  LinearScale,
  PMI_NEGATIVE_COLOR,
  PMI_POSITIVE_COLOR,
  PMI_ZERO_COLOR,
  extent,
  pmiColor,
} from "../src/scales.js";
import { violinOffsets } from "../src/violin.js";
import { fixtures } from "./fixtures.js";

describe("LinearScale", () => {
  it("maps the domain onto the range linearly and inverts", () => {
    const s = new LinearScale(0, 10, 100, 200);
    expect(s.apply(0)).toBe(100);
    expect(s.apply(10)).toBe(200);
    expect(s.apply(5)).toBe(150);
    expect(s.invert(150)).toBe(5);
  });

  it("supports descending ranges (screen y axes)", () => {
    const s = new LinearScale(0, 1, 200, 0);
    expect(s.apply(0)).toBe(200);
    expect(s.apply(1)).toBe(0);
  });

  it("maps a degenerate domain to the middle of the range", () => {
    const s = new LinearScale(3, 3, 0, 100);
    expect(s.apply(3)).toBe(50);
    expect(s.apply(-7)).toBe(50);
  });

  it("extent scans min and max", () => {
    expect(extent([2, -1, 5, 0])).toEqual([-1, 5]);
    expect(extent([])).toEqual([0, 1]);
  });
});

describe("pmiColor", () => {
  it("maps the served bound to the exact scale endpoints", () => {
    const bound = fixtures.pmi.bound;
    expect(bound).toBeGreaterThan(0);
    expect(pmiColor(bound, bound)).toBe(PMI_POSITIVE_COLOR);
    expect(pmiColor(-bound, bound)).toBe(PMI_NEGATIVE_COLOR);
  });

  it("maps zero to white and keeps the ramp symmetric", () => {
    expect(pmiColor(0, 2)).toBe(PMI_ZERO_COLOR);
    const plus = pmiColor(1, 2).match(/\d+/g)!.map(Number);
    const minus = pmiColor(-1, 2).match(/\d+/g)!.map(Number);
    expect(plus[0]).toBeGreaterThan(plus[2]); // red side
    expect(minus[2]).toBeGreaterThan(minus[0]); // blue side
  });

  it("clamps beyond the bound", () => {
    expect(pmiColor(99, 2)).toBe(PMI_POSITIVE_COLOR);
    expect(pmiColor(-99, 2)).toBe(PMI_NEGATIVE_COLOR);
  });

  it("degenerates to white when the bound is zero", () => {
    expect(pmiColor(0, 0)).toBe(PMI_ZERO_COLOR);
    expect(pmiColor(1, 0)).toBe(PMI_ZERO_COLOR);
    expect(pmiColor(-1, 0)).toBe(PMI_ZERO_COLOR);
  });
});

describe("violinOffsets", () => {
  it("keeps drawn widths proportional to served widths, max-normalized", () => {
    expect(violinOffsets([1, 2, 4], 4, 30)).toEqual([7.5, 15, 30]);
  });

  it("reuses the base maximum for subset overlays, preserving area_scale", () => {
    const base = [2, 8, 4];
    const overlay = [1, 2, 1];
    const bases = violinOffsets(base, 8, 30);
    const overlays = violinOffsets(overlay, 8, 30);
    const ratio = (a: number[]) => a.reduce((s, v) => s + v, 0);
    expect(ratio(overlays) / ratio(bases)).toBeCloseTo(
      overlay.reduce((s, v) => s + v, 0) / base.reduce((s, v) => s + v, 0),
      12,
    );
  });

  it("handles an all-zero profile without dividing by zero", () => {
    expect(violinOffsets([0, 0], 0, 30)).toEqual([0, 0]);
  });
});
