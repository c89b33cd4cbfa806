import { describe, expect, it } from "vitest";

import {
  clampSlider,
  initialState,
  nodeClicked,
  queryFailed,
  queryRequested,
  queryResolved,
  requestBody,
  sliderChanged,
  viaResolved,
} from "../src/state.js";
import { QueryDoc } from "../src/types.js";
import recorded from "./fixtures/query_response.json";
import viaValid from "./fixtures/via_valid_response.json";

const DOC = recorded as unknown as QueryDoc;
const VIA_DOC = viaValid as unknown as QueryDoc;

function loadedState() {
  let state = initialState("csrc", "ctgt");
  state = queryRequested(state, 1);
  return queryResolved(state, 1, DOC);
}

describe("slider clamping", () => {
  it("keeps bias weights in [1, 5]", () => {
    expect(clampSlider("biasCoded", 0)).toBe(1);
    expect(clampSlider("biasCoded", 6)).toBe(5);
    expect(clampSlider("biasLemma", -3)).toBe(1);
    expect(clampSlider("biasEntity", 5)).toBe(5);
    expect(clampSlider("biasNgram", 2.4)).toBe(2);
  });

  it("keeps structural parameters at least 1", () => {
    expect(clampSlider("topics", 0)).toBe(1);
    expect(clampSlider("knnK", -1)).toBe(1);
    expect(clampSlider("cap", 0)).toBe(1);
    expect(clampSlider("topics", 40)).toBe(40);
  });
});

describe("transitions are pure", () => {
  it("never mutates the previous state", () => {
    const state = Object.freeze(initialState("a", "b"));
    Object.freeze(state.sliders);
    const next = sliderChanged(state, "topics", 40);
    expect(next.sliders.topics).toBe(40);
    expect(state.sliders.topics).toBe(50);
    expect(next).not.toBe(state);
  });
});

describe("response staleness", () => {
  it("applies only the newest request's response", () => {
    let state = initialState("csrc", "ctgt");
    state = queryRequested(state, 1);
    state = queryRequested(state, 2);
    const afterStale = queryResolved(state, 1, DOC);
    expect(afterStale.result).toBeNull();
    const afterFresh = queryResolved(state, 2, DOC);
    expect(afterFresh.result).toEqual(DOC);
    expect(afterFresh.appliedSeq).toBe(2);
  });

  it("keeps the previous network when a request fails", () => {
    let state = loadedState();
    state = queryRequested(state, 2);
    state = queryFailed(state, 2, "no path between terms");
    expect(state.banner).not.toBeNull();
    expect(state.result).toEqual(DOC);
  });

  it("ignores failure reports from superseded requests", () => {
    let state = loadedState();
    state = queryRequested(state, 2);
    state = queryRequested(state, 3);
    state = queryFailed(state, 2, "late error");
    expect(state.banner).toBeNull();
  });
});

describe("node clicks", () => {
  it("ignores clicks before a result is loaded", () => {
    const state = initialState("csrc", "ctgt");
    expect(nodeClicked(state, "topic_1")).toBe(state);
  });

  it("treats source and target clicks as no-ops", () => {
    const state = loadedState();
    expect(nodeClicked(state, "source")).toBe(state);
    expect(nodeClicked(state, "target")).toBe(state);
  });

  it("selects a clicked topic node", () => {
    const next = nodeClicked(loadedState(), "topic_1");
    expect(next.selectedNode).toBe("topic_1");
  });

  it("ignores unknown node ids", () => {
    const state = loadedState();
    expect(nodeClicked(state, "topic_99")).toBe(state);
  });
});

describe("via responses", () => {
  it("replaces the path fields with the rerouted result", () => {
    const state = viaResolved(loadedState(), VIA_DOC);
    expect(state.result!.via_node).toBe(VIA_DOC.via_node);
    expect(state.result!.active_path).toEqual(VIA_DOC.active_path);
  });
});

describe("request body", () => {
  it("mirrors the slider values into API fields", () => {
    let state = initialState("csrc", "ctgt");
    state = sliderChanged(state, "topics", 40);
    state = sliderChanged(state, "biasCoded", 2);
    const body = requestBody(state);
    expect(body.source_code).toBe("csrc");
    expect(body.target_code).toBe("ctgt");
    expect(body.topics).toBe(40);
    expect(body.bias.coded).toBe(2);
    expect(body.bias.entity).toBe(3);
  });
});
