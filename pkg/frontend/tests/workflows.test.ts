import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import type { RunResponse, WorkflowsResponse } from "../src/types.js";
import { runRequestBody, validateParams } from "../src/workflows.js";

function fixture(name: string): string {
  return readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8");
}

const LISTING = (JSON.parse(fixture("workflows.json")) as WorkflowsResponse).workflows;
const CF = LISTING.find((w) => w.name === "cf_courses")!;
const SIMILAR = LISTING.find((w) => w.name === "similar_courses")!;

describe("parameter validation", () => {
  it("accepts a valid int parameter", () => {
    const result = validateParams(CF, { target: "444" });
    expect(result.ok).toBe(true);
    expect(result.parsed).toEqual({ target: 444 });
    expect(runRequestBody(result)).toEqual({ params: { target: 444 } });
  });

  it("flags a missing required parameter and blocks the request", () => {
    const result = validateParams(CF, {});
    expect(result.ok).toBe(false);
    expect(result.errors).toEqual({ target: "required" });
    expect(() => runRequestBody(result)).toThrow();
  });

  it("flags non-numeric input for an int parameter", () => {
    const result = validateParams(CF, { target: "4.5" });
    expect(result.ok).toBe(false);
    expect(result.errors.target).toBe("expected int");
  });

  it("validates each field independently", () => {
    const result = validateParams(SIMILAR, { year: "abc" });
    expect(result.errors).toEqual({ year: "expected int", title: "required" });
  });

  it("keeps text parameters verbatim", () => {
    const result = validateParams(SIMILAR, {
      year: "2008",
      title: "Introduction to Programming",
    });
    expect(result.ok).toBe(true);
    expect(result.parsed).toEqual({ year: 2008, title: "Introduction to Programming" });
  });
});

describe("recommendation rows", () => {
  it("are rendered in server order with the score column last", () => {
    const run = JSON.parse(fixture("run_cf_courses_444.json")) as RunResponse;
    expect(run.columns[run.columns.length - 1]).toBe("_score");
    const scores = run.rows.map((row) => row[row.length - 1] as number);
    const sorted = [...scores].sort((a, b) => b - a);
    expect(scores).toEqual(sorted); // server already ranked; client must not reorder
  });
});
