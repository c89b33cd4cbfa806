/** View state and its transitions.
 *
 * Every transition is a pure function of (previous state, event) and
 * returns a fresh object, so the whole interaction model is testable
 * without a browser. Staleness is handled by sequence numbers: a
 * response is applied only if it answers the most recent request.
 */

import { QueryDoc, QueryRequest } from "./types.js";

export interface Sliders {
  topics: number;
  knnK: number;
  biasCoded: number;
  biasLemma: number;
  biasEntity: number;
  biasNgram: number;
  cap: number;
  seed: number;
}

export interface ViewState {
  sourceCode: string;
  targetCode: string;
  sliders: Sliders;
  result: QueryDoc | null;
  selectedNode: string | null;
  banner: string | null;
  /** sequence number of the newest request issued */
  requestSeq: number;
  /** sequence number of the response currently displayed */
  appliedSeq: number;
}

const BIAS_MIN = 1;
const BIAS_MAX = 5;

export const DEFAULT_SLIDERS: Sliders = {
  topics: 50,
  knnK: 5,
  biasCoded: 4,
  biasLemma: 1,
  biasEntity: 3,
  biasNgram: 1,
  cap: 2000,
  seed: 0,
};

function clampInt(value: number, lo: number, hi: number): number {
  const v = Math.round(value);
  return Math.min(hi, Math.max(lo, v));
}

export function clampSlider(name: keyof Sliders, value: number): number {
  switch (name) {
    case "biasCoded":
    case "biasLemma":
    case "biasEntity":
    case "biasNgram":
      return clampInt(value, BIAS_MIN, BIAS_MAX);
    case "topics":
    case "knnK":
    case "cap":
      return clampInt(value, 1, Number.MAX_SAFE_INTEGER);
    case "seed":
      return Math.round(value);
  }
}

export function initialState(sourceCode = "", targetCode = ""): ViewState {
  return {
    sourceCode,
    targetCode,
    sliders: { ...DEFAULT_SLIDERS },
    result: null,
    selectedNode: null,
    banner: null,
    requestSeq: 0,
    appliedSeq: 0,
  };
}

export function sliderChanged(
  state: ViewState,
  name: keyof Sliders,
  value: number,
): ViewState {
  return {
    ...state,
    sliders: { ...state.sliders, [name]: clampSlider(name, value) },
  };
}

export function queryRequested(state: ViewState, seq: number): ViewState {
  return { ...state, requestSeq: Math.max(state.requestSeq, seq) };
}

/** Apply a /query response; superseded responses are discarded. */
export function queryResolved(
  state: ViewState,
  seq: number,
  doc: QueryDoc,
): ViewState {
  if (seq !== state.requestSeq) {
    return state; // stale: a newer request is in flight or applied
  }
  return {
    ...state,
    result: doc,
    banner: null,
    selectedNode: null,
    appliedSeq: seq,
  };
}

/** Surface a request failure as a banner; the last good view stays. */
export function queryFailed(
  state: ViewState,
  seq: number,
  message: string,
): ViewState {
  if (seq !== state.requestSeq) {
    return state;
  }
  return { ...state, banner: message };
}

/** Node click: source/target are no-ops, everything else selects. */
export function nodeClicked(state: ViewState, nodeId: string): ViewState {
  if (state.result === null) {
    return state;
  }
  if (nodeId === "source" || nodeId === "target") {
    return state;
  }
  if (!state.result.nodes.some((n) => n.id === nodeId)) {
    return state;
  }
  return { ...state, selectedNode: nodeId };
}

/** Apply a /via response: path fields change, layout stays put. */
export function viaResolved(state: ViewState, doc: QueryDoc): ViewState {
  return { ...state, result: doc, banner: null };
}

export function requestBody(state: ViewState): QueryRequest {
  const s = state.sliders;
  return {
    source_code: state.sourceCode,
    target_code: state.targetCode,
    topics: s.topics,
    knn_k: s.knnK,
    bias: {
      coded: s.biasCoded,
      lemma: s.biasLemma,
      entity: s.biasEntity,
      ngram: s.biasNgram,
    },
    alpha: null,
    gibbs_iterations: 500,
    cap: s.cap,
    seed: s.seed,
  };
}
