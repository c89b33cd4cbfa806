/** Response document shapes for the discovery service HTTP API.
 *
 * The viewer performs no scientific computation: every number it shows
 * comes straight from one of these fields.
 */

export interface NodeDoc {
  id: string;
  x: number;
  y: number;
  outlier: boolean;
}

export interface EdgeDoc {
  a: string;
  b: string;
  weight: number;
}

export interface TermDoc {
  display: string;
  key: string;
  probability: number;
}

export interface TopicDoc {
  topic: number;
  terms: TermDoc[];
}

export interface QueryDoc {
  source_code: string;
  target_code: string;
  nodes: NodeDoc[];
  edges: EdgeDoc[];
  active_path: string[];
  path_valid: boolean;
  via_node: string | null;
  degenerate_layout: boolean;
  k_too_large: boolean;
  topics: TopicDoc[];
  query: Record<string, unknown>;
}

export interface QueryRequest {
  source_code: string;
  target_code: string;
  topics: number;
  knn_k: number;
  bias: { coded: number; lemma: number; entity: number; ngram: number };
  alpha: number | null;
  gibbs_iterations: number;
  cap: number;
  seed: number;
}
