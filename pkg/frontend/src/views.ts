/** DOM construction for each pane. Render functions are write-only: they
 * paint the given state verbatim and attach the callbacks they are handed.
 */

import { sizedTerms } from "./cloud.js";
import type { UiState } from "./state.js";
import type { WorkflowInfo } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text != null) {
    node.textContent = text;
  }
  return node;
}

export function renderBanner(container: HTMLElement, state: UiState, onDismiss: () => void): void {
  container.replaceChildren();
  if (!state.banner) {
    return;
  }
  const banner = el("div", "banner", state.banner);
  const close = el("button", "banner-close", "dismiss");
  close.addEventListener("click", onDismiss);
  banner.appendChild(close);
  container.appendChild(banner);
}

export function renderBreadcrumbs(
  container: HTMLElement,
  state: UiState,
  onUndo: () => void,
): void {
  container.replaceChildren();
  if (state.breadcrumbs.length === 0) {
    return;
  }
  for (const crumb of state.breadcrumbs) {
    container.appendChild(el("span", "crumb", crumb));
  }
  const undo = el("button", "undo", "undo last");
  undo.addEventListener("click", onUndo);
  container.appendChild(undo);
}

export function renderResults(container: HTMLElement, state: UiState): void {
  container.replaceChildren();
  if (!state.search) {
    return;
  }
  const { total, hits } = state.search.parsed;
  container.appendChild(el("p", "total", `${total} matching entities`));
  const table = el("table", "results");
  const head = el("tr");
  for (const column of ["id", "score", "matched fields"]) {
    head.appendChild(el("th", undefined, column));
  }
  table.appendChild(head);
  for (const hit of hits) {
    const row = el("tr");
    row.appendChild(el("td", undefined, String(hit.id)));
    row.appendChild(el("td", undefined, String(hit.score)));
    row.appendChild(el("td", undefined, hit.fields.join(", ")));
    table.appendChild(row);
  }
  container.appendChild(table);
}

export function renderCloud(
  container: HTMLElement,
  state: UiState,
  onClick: (term: string) => void,
): void {
  container.replaceChildren();
  if (!state.cloud) {
    return;
  }
  const terms = sizedTerms(state.cloud.parsed);
  if (terms.length === 0) {
    container.appendChild(el("p", "placeholder", "no terms"));
    return;
  }
  for (const term of terms) {
    const link = el("a", "cloud-term", term.term);
    link.href = "#";
    link.style.fontSize = `${term.fontPx}px`;
    link.title = `weight ${term.weight}, ${term.count} entities`;
    link.addEventListener("click", (event) => {
      event.preventDefault();
      onClick(term.term);
    });
    container.appendChild(link);
    container.appendChild(document.createTextNode(" "));
  }
}

export function renderWorkflowPanel(
  container: HTMLElement,
  workflows: WorkflowInfo[],
  state: UiState,
  errors: Record<string, string>,
  callbacks: {
    onSelect: (name: string) => void;
    onParamInput: (name: string, value: string) => void;
    onRun: () => void;
  },
): void {
  container.replaceChildren();
  const picker = el("select", "workflow-picker");
  for (const workflow of workflows) {
    const option = el("option", undefined, workflow.name);
    option.value = workflow.name;
    option.selected = workflow.name === state.selectedWorkflow;
    picker.appendChild(option);
  }
  picker.addEventListener("change", () => callbacks.onSelect(picker.value));
  container.appendChild(picker);

  const selected = workflows.find((w) => w.name === state.selectedWorkflow);
  if (!selected) {
    return;
  }
  const form = el("div", "params");
  for (const param of selected.params) {
    const label = el("label", undefined, `${param.name} (${param.type}) `);
    const input = el("input");
    input.value = state.paramValues[param.name] ?? "";
    input.addEventListener("input", () => callbacks.onParamInput(param.name, input.value));
    label.appendChild(input);
    const error = errors[param.name];
    if (error) {
      label.appendChild(el("span", "field-error", ` ${error}`));
    }
    form.appendChild(label);
  }
  const run = el("button", "run", "run strategy");
  run.addEventListener("click", callbacks.onRun);
  form.appendChild(run);
  container.appendChild(form);

  if (state.recommendation) {
    const { columns, rows } = state.recommendation.parsed;
    const table = el("table", "recommendation");
    const head = el("tr");
    for (const column of columns) {
      head.appendChild(el("th", undefined, column));
    }
    table.appendChild(head);
    for (const row of rows) {
      const tr = el("tr");
      for (const value of row) {
        tr.appendChild(el("td", undefined, value == null ? "" : String(value)));
      }
      table.appendChild(tr);
    }
    container.appendChild(table);
  }
}
