/** Wiring: URL <-> state, API calls, event handlers. One in-flight request
 * per pane; responses superseded by a newer click are discarded by
 * sequence number inside the state transitions.
 */

import { ApiError, cloudUrl, getJson, postJson, runUrl, searchUrl, workflowsUrl } from "./api.js";
import {
  applyCloud,
  applyRun,
  applySearch,
  beginRequest,
  dismissBanner,
  effectiveQuery,
  fromQueryString,
  pushBreadcrumb,
  setBaseQuery,
  showBanner,
  toQueryString,
  undoBreadcrumb,
  type UiState,
} from "./state.js";
import type { WorkflowInfo, WorkflowsResponse } from "./types.js";
import { renderBanner, renderBreadcrumbs, renderCloud, renderResults, renderWorkflowPanel } from "./views.js";
import { runRequestBody, validateParams, type ValidationResult } from "./workflows.js";

const API_BASE = "";

let state: UiState = fromQueryString(window.location.search);
let workflows: WorkflowInfo[] = [];
let paramErrors: Record<string, string> = {};

const nodes = {
  banner: document.getElementById("banner")!,
  queryInput: document.getElementById("query") as HTMLInputElement,
  searchButton: document.getElementById("go")!,
  breadcrumbs: document.getElementById("breadcrumbs")!,
  results: document.getElementById("results")!,
  cloud: document.getElementById("cloud")!,
  workflows: document.getElementById("workflows")!,
};

function render(): void {
  nodes.queryInput.value = state.baseQuery;
  renderBanner(nodes.banner, state, () => {
    state = dismissBanner(state);
    render();
  });
  renderBreadcrumbs(nodes.breadcrumbs, state, onUndo);
  renderResults(nodes.results, state);
  renderCloud(nodes.cloud, state, onCloudClick);
  renderWorkflowPanel(nodes.workflows, workflows, state, paramErrors, {
    onSelect: (name) => {
      state = { ...state, selectedWorkflow: name, paramValues: {}, recommendation: null };
      paramErrors = {};
      render();
    },
    onParamInput: (name, value) => {
      state = { ...state, paramValues: { ...state.paramValues, [name]: value } };
    },
    onRun,
  });
}

function syncUrl(): void {
  const next = `${window.location.pathname}${toQueryString(state)}`;
  window.history.pushState(null, "", next);
}

function fail(error: unknown): void {
  const message =
    error instanceof ApiError ? `[${error.code}] ${error.message}` : String(error);
  state = showBanner(state, message);
  render();
}

async function refresh(): Promise<void> {
  const query = effectiveQuery(state);
  if (!query) {
    return;
  }
  let searchSeq: number;
  let cloudSeq: number;
  [state, searchSeq] = beginRequest(state, "search");
  [state, cloudSeq] = beginRequest(state, "cloud");
  try {
    const [searchBody, cloudBody] = await Promise.all([
      getJson(searchUrl(API_BASE, query, state.entity)),
      getJson(cloudUrl(API_BASE, query, state.entity)),
    ]);
    state = applySearch(state, searchSeq, searchBody.raw);
    state = applyCloud(state, cloudSeq, cloudBody.raw);
    render();
  } catch (error) {
    fail(error);
  }
}

function onCloudClick(term: string): void {
  state = pushBreadcrumb(state, term);
  syncUrl();
  render();
  void refresh();
}

function onUndo(): void {
  state = undoBreadcrumb(state);
  syncUrl();
  render();
  void refresh();
}

function onSearchSubmit(): void {
  state = setBaseQuery(state, nodes.queryInput.value);
  syncUrl();
  render();
  void refresh();
}

async function onRun(): Promise<void> {
  const workflow = workflows.find((w) => w.name === state.selectedWorkflow);
  if (!workflow) {
    return;
  }
  const result: ValidationResult = validateParams(workflow, state.paramValues);
  paramErrors = result.errors;
  if (!result.ok) {
    render();
    return; // invalid input never produces a request
  }
  let seq: number;
  [state, seq] = beginRequest(state, "run");
  try {
    const body = await postJson(runUrl(API_BASE, workflow.name), runRequestBody(result));
    state = applyRun(state, seq, body.raw);
    render();
  } catch (error) {
    fail(error);
  }
}

async function boot(): Promise<void> {
  nodes.searchButton.addEventListener("click", onSearchSubmit);
  nodes.queryInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      onSearchSubmit();
    }
  });
  window.addEventListener("popstate", () => {
    state = fromQueryString(window.location.search);
    render();
    void refresh();
  });
  try {
    const listing = await getJson(workflowsUrl(API_BASE));
    workflows = (JSON.parse(listing.raw) as WorkflowsResponse).workflows;
    if (workflows.length > 0 && !state.selectedWorkflow) {
      state = { ...state, selectedWorkflow: workflows[0]!.name };
    }
  } catch (error) {
    fail(error);
  }
  render();
  void refresh();
}

void boot();
