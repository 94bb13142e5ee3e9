// Wire protocol shared with the session server.

export type MeasureToken =
  | "degree"
  | "closeness"
  | "betweenness"
  | "pagerank"
  | "pagerank-norm"
  | "plm"
  | "leiden";

export type CriterionToken = "min" | "calpha" | "com";

export type ClientMessage =
  | { type: "set_frame"; value: number }
  | { type: "set_cutoff"; value: number }
  | { type: "set_criterion"; value: CriterionToken }
  | { type: "set_measure"; value: MeasureToken }
  | { type: "toggle_auto"; value: boolean | null }
  | { type: "toggle_delta"; value: boolean | null }
  | { type: "recompute" }
  | { type: "get_snapshot" };

export interface Timing {
  edge_update_ms: number;
  layout_ms: number;
  measure_ms: number;
  total_ms: number;
}

export interface SnapshotState {
  frame: number;
  frame_count: number;
  cutoff: number;
  criterion: CriterionToken;
  exclude_backbone_neighbors: boolean;
  measure: MeasureToken;
  gamma: number;
  auto_recompute: boolean;
  delta_view: boolean;
  is_partition: boolean;
  cutoff_min: number;
  cutoff_max: number;
  cutoff_step: number;
  measures: string[];
  criteria: string[];
}

export interface Snapshot {
  type: "snapshot";
  nodes: string[];
  edges: [number, number][];
  protein_layout: [number, number, number][];
  maxent_layout: [number, number, number][];
  scores: number[];
  colors: string[];
  timing: Timing;
  stale: boolean;
  state: SnapshotState;
}

export interface ErrorMessage {
  type: "error";
  code: string;
  message: string;
}

export type ServerMessage = Snapshot | ErrorMessage;

export const MUTATING_TYPES: ReadonlySet<string> = new Set([
  "set_frame",
  "set_cutoff",
  "set_criterion",
  "set_measure",
  "toggle_auto",
  "toggle_delta",
  "recompute",
]);
