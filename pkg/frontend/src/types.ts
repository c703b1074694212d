/** Wire formats served by the map service. */

export interface Lineage {
  parent: string;
  split_role: number;
  split_role_id: string;
  child_ids: string[];
}

export interface MapDoc {
  version: number;
  K: number;
  landmark_ids: string[];
  psi: number[][];
  omega: number[][];
  c_used: number[];
  main_role: number[];
  lineage: Lineage | null;
  attr_names: string[];
  model_ref: string;
}

export interface JobStatus {
  id: string;
  kind: 'discover' | 'zoom';
  status: 'queued' | 'running' | 'done' | 'failed';
  progress: number;
  map_id: string | null;
  error: string | null;
}

export interface LineageNode {
  id: string;
  k: number;
  split_role: number | null;
  children: LineageNode[];
}

export interface LineageTree {
  roots: LineageNode[];
}

export interface SessionInfo {
  graph_loaded: boolean;
  n_nodes: number;
  n_edges: number;
  attr_names: string[];
  directed: boolean;
  hyperparam_defaults: Record<string, number | string>;
}

export interface Point {
  x: number;
  y: number;
}

/** Landmark positions keyed by landmark id. */
export type Layout = Map<string, Point>;

/** Landmark fill colors keyed by landmark id. */
export type ColorMap = Map<string, string>;
