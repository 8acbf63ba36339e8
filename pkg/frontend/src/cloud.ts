/** Font scaling for cloud terms.
 *
 * Linear interpolation between fixed pixel bounds over the cloud's weight
 * range. The contract the tests pin down is monotonicity: within one
 * cloud, a heavier term never renders smaller. Degenerate clouds (one
 * term, or all weights equal) render at the maximum size.
 */

import type { CloudResponse, CloudTerm } from "./types.js";

export const MIN_FONT_PX = 12;
export const MAX_FONT_PX = 34;

export function fontSizeFor(
  weight: number,
  minWeight: number,
  maxWeight: number,
  minPx: number = MIN_FONT_PX,
  maxPx: number = MAX_FONT_PX,
): number {
  if (!(maxWeight > minWeight)) {
    return maxPx;
  }
  const clamped = Math.min(Math.max(weight, minWeight), maxWeight);
  const fraction = (clamped - minWeight) / (maxWeight - minWeight);
  return minPx + fraction * (maxPx - minPx);
}

export interface SizedTerm extends CloudTerm {
  fontPx: number;
}

export function sizedTerms(cloud: CloudResponse): SizedTerm[] {
  if (cloud.terms.length === 0) {
    return [];
  }
  const weights = cloud.terms.map((t) => t.weight);
  const minWeight = Math.min(...weights);
  const maxWeight = Math.max(...weights);
  return cloud.terms.map((term) => ({
    ...term,
    fontPx: fontSizeFor(term.weight, minWeight, maxWeight),
  }));
}
