/** Client-side validation of workflow parameters against the signatures
 * reported by GET /v1/workflows. Invalid input never leaves the browser:
 * the run request is only built once every field parses.
 */

import type { WorkflowInfo, WorkflowParam } from "./types.js";

export type ParamValues = Record<string, string>;

export interface ValidationResult {
  ok: boolean;
  /** Per-field messages for inline display, keyed by parameter name. */
  errors: Record<string, string>;
  /** Typed values, only meaningful when ok. */
  parsed: Record<string, number | string>;
}

const INT_RE = /^-?[0-9]+$/;

function parseOne(param: WorkflowParam, raw: string | undefined): string | number | null {
  if (raw == null || raw.trim() === "") {
    return null;
  }
  const text = raw.trim();
  if (param.type === "int") {
    return INT_RE.test(text) ? Number.parseInt(text, 10) : null;
  }
  if (param.type === "float") {
    const value = Number.parseFloat(text);
    return Number.isFinite(value) ? value : null;
  }
  return raw;
}

export function validateParams(workflow: WorkflowInfo, values: ParamValues): ValidationResult {
  const errors: Record<string, string> = {};
  const parsed: Record<string, number | string> = {};
  for (const param of workflow.params) {
    const raw = values[param.name];
    if (raw == null || raw.trim() === "") {
      errors[param.name] = "required";
      continue;
    }
    const value = parseOne(param, raw);
    if (value == null) {
      errors[param.name] = `expected ${param.type}`;
      continue;
    }
    parsed[param.name] = value;
  }
  return { ok: Object.keys(errors).length === 0, errors, parsed };
}

export function runRequestBody(result: ValidationResult): { params: Record<string, number | string> } {
  if (!result.ok) {
    throw new Error("cannot build a run request from invalid parameters");
  }
  return { params: result.parsed };
}
