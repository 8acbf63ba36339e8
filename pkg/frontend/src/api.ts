/** Typed client for the flexcloud JSON API.
 *
 * URL builders are pure and tested; `request` keeps the raw body text so
 * callers can store responses verbatim.
 */

import type { ApiErrorBody } from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.code;
  }
}

export function searchUrl(base: string, q: string, entity: string, limit?: number): string {
  const params = new URLSearchParams({ q, entity });
  if (limit != null) {
    params.set("limit", String(limit));
  }
  return `${base}/v1/search?${params.toString()}`;
}

export function cloudUrl(base: string, q: string, entity: string, k?: number): string {
  const params = new URLSearchParams({ q, entity });
  if (k != null) {
    params.set("k", String(k));
  }
  return `${base}/v1/cloud?${params.toString()}`;
}

export function workflowsUrl(base: string): string {
  return `${base}/v1/workflows`;
}

export function runUrl(base: string, workflow: string): string {
  return `${base}/v1/workflows/${encodeURIComponent(workflow)}/run`;
}

export interface RawResponse {
  raw: string;
}

async function request(url: string, init?: RequestInit): Promise<RawResponse> {
  const response = await fetch(url, init);
  const raw = await response.text();
  if (!response.ok) {
    let body: ApiErrorBody;
    try {
      body = JSON.parse(raw) as ApiErrorBody;
    } catch {
      body = { code: "INTERNAL", message: `HTTP ${response.status}` };
    }
    throw new ApiError(response.status, body);
  }
  return { raw };
}

export function getJson(url: string): Promise<RawResponse> {
  return request(url);
}

export function postJson(url: string, payload: unknown): Promise<RawResponse> {
  return request(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}
