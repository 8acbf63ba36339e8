/** UI state and its pure transitions.
 *
 * The view is a function of this state and nothing else; server responses
 * are stored verbatim (raw bytes plus parsed form) and never re-scored,
 * re-sorted, or filtered client-side. Refinement state (base query +
 * breadcrumb of clicked terms) round-trips through the URL query string
 * so views are shareable, and replaying base + breadcrumbs always
 * reproduces the current view.
 */

import type { CloudResponse, RunResponse, SearchResponse } from "./types.js";

export interface PaneData<T> {
  /** Exact response body bytes (as text), kept for replay comparisons. */
  raw: string;
  parsed: T;
}

export interface UiState {
  entity: string;
  baseQuery: string;
  /** Clicked cloud terms, in click order; phrases are plain space-joined text. */
  breadcrumbs: string[];
  search: PaneData<SearchResponse> | null;
  cloud: PaneData<CloudResponse> | null;
  selectedWorkflow: string | null;
  paramValues: Record<string, string>;
  recommendation: PaneData<RunResponse> | null;
  banner: string | null;
  /** Monotone per-pane sequence numbers; stale responses are discarded. */
  issued: Record<PaneName, number>;
  applied: Record<PaneName, number>;
}

export type PaneName = "search" | "cloud" | "run";

export function initialState(entity = "course"): UiState {
  return {
    entity,
    baseQuery: "",
    breadcrumbs: [],
    search: null,
    cloud: null,
    selectedWorkflow: null,
    paramValues: {},
    recommendation: null,
    banner: null,
    issued: { search: 0, cloud: 0, run: 0 },
    applied: { search: 0, cloud: 0, run: 0 },
  };
}

/** The effective query: base text plus every breadcrumb, phrases quoted. */
export function effectiveQuery(state: UiState): string {
  const parts = state.baseQuery.trim() ? [state.baseQuery.trim()] : [];
  for (const crumb of state.breadcrumbs) {
    parts.push(crumb.includes(" ") ? `"${crumb}"` : crumb);
  }
  return parts.join(" ");
}

export function setBaseQuery(state: UiState, query: string): UiState {
  return { ...state, baseQuery: query, breadcrumbs: [] };
}

export function pushBreadcrumb(state: UiState, term: string): UiState {
  if (state.breadcrumbs.includes(term)) {
    return state;
  }
  return { ...state, breadcrumbs: [...state.breadcrumbs, term] };
}

export function undoBreadcrumb(state: UiState): UiState {
  if (state.breadcrumbs.length === 0) {
    return state;
  }
  return { ...state, breadcrumbs: state.breadcrumbs.slice(0, -1) };
}

/** Issue a request for a pane; returns the state and the sequence to tag it. */
export function beginRequest(state: UiState, pane: PaneName): [UiState, number] {
  const seq = state.issued[pane] + 1;
  return [{ ...state, issued: { ...state.issued, [pane]: seq } }, seq];
}

function freshest(state: UiState, pane: PaneName, seq: number): boolean {
  return seq > state.applied[pane] && seq === state.issued[pane];
}

export function applySearch(state: UiState, seq: number, raw: string): UiState {
  if (!freshest(state, "search", seq)) {
    return state;
  }
  return {
    ...state,
    banner: null,
    search: { raw, parsed: JSON.parse(raw) as SearchResponse },
    applied: { ...state.applied, search: seq },
  };
}

export function applyCloud(state: UiState, seq: number, raw: string): UiState {
  if (!freshest(state, "cloud", seq)) {
    return state;
  }
  return {
    ...state,
    cloud: { raw, parsed: JSON.parse(raw) as CloudResponse },
    applied: { ...state.applied, cloud: seq },
  };
}

export function applyRun(state: UiState, seq: number, raw: string): UiState {
  if (!freshest(state, "run", seq)) {
    return state;
  }
  return {
    ...state,
    banner: null,
    recommendation: { raw, parsed: JSON.parse(raw) as RunResponse },
    applied: { ...state.applied, run: seq },
  };
}

export function showBanner(state: UiState, message: string): UiState {
  return { ...state, banner: message };
}

export function dismissBanner(state: UiState): UiState {
  return { ...state, banner: null };
}

// --- URL round-trip ---------------------------------------------------------

/** Serialize refinement state into a query string (leading "?", or ""). */
export function toQueryString(state: UiState): string {
  const params = new URLSearchParams();
  if (state.baseQuery.trim()) {
    params.set("q", state.baseQuery.trim());
  }
  for (const crumb of state.breadcrumbs) {
    params.append("crumb", crumb);
  }
  if (state.entity !== "course") {
    params.set("entity", state.entity);
  }
  const text = params.toString();
  return text ? `?${text}` : "";
}

export function fromQueryString(search: string): UiState {
  const params = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  let state = initialState(params.get("entity") ?? "course");
  state = { ...state, baseQuery: params.get("q") ?? "" };
  for (const crumb of params.getAll("crumb")) {
    state = pushBreadcrumb(state, crumb);
  }
  return state;
}
