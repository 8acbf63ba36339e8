/** Wire types for the flexcloud JSON API. */

export interface SearchHit {
  id: number | string;
  score: number;
  fields: string[];
}

export interface SearchResponse {
  total: number;
  hits: SearchHit[];
}

export interface CloudTerm {
  term: string;
  weight: number;
  count: number;
}

export interface CloudResponse {
  query: string[];
  terms: CloudTerm[];
}

export interface WorkflowParam {
  name: string;
  type: "int" | "float" | "text";
}

export interface WorkflowInfo {
  name: string;
  params: WorkflowParam[];
}

export interface WorkflowsResponse {
  workflows: WorkflowInfo[];
}

export interface RunResponse {
  columns: string[];
  rows: (number | string | null)[][];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
