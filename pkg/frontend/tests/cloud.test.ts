import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { MAX_FONT_PX, MIN_FONT_PX, fontSizeFor, sizedTerms } from "../src/cloud.js";
import type { CloudResponse } from "../src/types.js";

function fixture(name: string): string {
  return readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8");
}

describe("font scaling", () => {
  it("is monotone over the recorded cloud's weights", () => {
    const cloud = JSON.parse(fixture("cloud_american.json")) as CloudResponse;
    const sized = sizedTerms(cloud);
    expect(sized.length).toBeGreaterThan(0);
    for (const a of sized) {
      for (const b of sized) {
        if (a.weight > b.weight) {
          expect(a.fontPx).toBeGreaterThanOrEqual(b.fontPx);
        }
        if (a.weight === b.weight) {
          expect(a.fontPx).toBe(b.fontPx);
        }
      }
    }
  });

  it("is monotone for arbitrary weight lists", () => {
    let seed = 987654321;
    const rand = () => {
      seed = (seed * 1103515245 + 12345) % 2147483648;
      return seed / 2147483648;
    };
    for (let round = 0; round < 50; round++) {
      const terms = Array.from({ length: 1 + Math.floor(rand() * 20) }, (_v, i) => ({
        term: `t${i}`,
        weight: Math.round(rand() * 1000) / 10,
        count: 1,
      }));
      const sized = sizedTerms({ query: [], terms });
      const byWeight = [...sized].sort((a, b) => a.weight - b.weight);
      for (let i = 1; i < byWeight.length; i++) {
        expect(byWeight[i]!.fontPx).toBeGreaterThanOrEqual(byWeight[i - 1]!.fontPx);
      }
      for (const term of sized) {
        expect(term.fontPx).toBeGreaterThanOrEqual(MIN_FONT_PX);
        expect(term.fontPx).toBeLessThanOrEqual(MAX_FONT_PX);
      }
    }
  });

  it("renders extremes at the pixel bounds", () => {
    expect(fontSizeFor(0, 0, 10)).toBe(MIN_FONT_PX);
    expect(fontSizeFor(10, 0, 10)).toBe(MAX_FONT_PX);
  });

  it("renders single-term and flat clouds at max size", () => {
    const single = sizedTerms({ query: [], terms: [{ term: "only", weight: 3.5, count: 1 }] });
    expect(single[0]!.fontPx).toBe(MAX_FONT_PX);
    const flat = sizedTerms({
      query: [],
      terms: [
        { term: "a", weight: 2, count: 1 },
        { term: "b", weight: 2, count: 1 },
      ],
    });
    expect(flat.every((t) => t.fontPx === MAX_FONT_PX)).toBe(true);
  });

  it("maps an empty cloud to no terms", () => {
    expect(sizedTerms({ query: ["zebra"], terms: [] })).toEqual([]);
  });
});
