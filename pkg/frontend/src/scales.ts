/**
 * The only numeric mappings in the client: linear pixel scales and the
 * diverging PMI color ramp. Everything else renders served values
 * verbatim.
 */

export class LinearScale {
  readonly d0: number;
  readonly d1: number;
  readonly r0: number;
  readonly r1: number;

  constructor(d0: number, d1: number, r0: number, r1: number) {
    this.d0 = d0;
    this.d1 = d1;
    this.r0 = r0;
    this.r1 = r1;
  }

  /** Domain value -> range value; a degenerate domain maps everything
   * to the middle of the range. */
  apply(v: number): number {
    if (this.d1 === this.d0) return (this.r0 + this.r1) / 2;
    return this.r0 + ((v - this.d0) / (this.d1 - this.d0)) * (this.r1 - this.r0);
  }

  invert(px: number): number {
    if (this.r1 === this.r0) return (this.d0 + this.d1) / 2;
    return this.d0 + ((px - this.r0) / (this.r1 - this.r0)) * (this.d1 - this.d0);
  }
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo === Infinity) return [0, 1];
  return [lo, hi];
}

/** Diverging PMI ramp: blue at -bound, white at 0, red at +bound,
 * clamped beyond the bound. bound <= 0 degenerates to white. */
const PMI_NEGATIVE: readonly number[] = [33, 102, 172];
const PMI_POSITIVE: readonly number[] = [178, 24, 43];
const WHITE: readonly number[] = [255, 255, 255];

export const PMI_NEGATIVE_COLOR = "rgb(33, 102, 172)";
export const PMI_POSITIVE_COLOR = "rgb(178, 24, 43)";
export const PMI_ZERO_COLOR = "rgb(255, 255, 255)";
export const PMI_UNAVAILABLE_COLOR = "rgb(190, 190, 190)";

export function pmiColor(value: number, bound: number): string {
  const t = bound > 0 ? Math.max(-1, Math.min(1, value / bound)) : 0;
  const target = t < 0 ? PMI_NEGATIVE : PMI_POSITIVE;
  const a = Math.abs(t);
  const mix = WHITE.map((c, i) => Math.round(c + (target[i] - c) * a));
  return `rgb(${mix[0]}, ${mix[1]}, ${mix[2]})`;
}
