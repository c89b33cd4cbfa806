/** Browser entry point: binds the controller to the page. */

import { Controller } from "./controller.js";
import { renderBanner, renderNetwork, renderPathStatus,
  renderTermPanel } from "./render.js";
import { Sliders } from "./state.js";
import { Viewport } from "./layout.js";

const VIEW: Viewport = { width: 800, height: 560, margin: 40 };

const SLIDER_IDS: Array<[string, keyof Sliders]> = [
  ["slider-topics", "topics"],
  ["slider-knn-k", "knnK"],
  ["slider-bias-coded", "biasCoded"],
  ["slider-bias-lemma", "biasLemma"],
  ["slider-bias-entity", "biasEntity"],
  ["slider-bias-ngram", "biasNgram"],
  ["slider-cap", "cap"],
  ["slider-seed", "seed"],
];

function draw(controller: Controller): void {
  const state = controller.state;
  const network = document.getElementById("network")!;
  network.innerHTML = renderNetwork(state.result, VIEW);
  document.getElementById("path-status")!.innerHTML =
    renderPathStatus(state.result);
  document.getElementById("banner")!.innerHTML =
    renderBanner(state.banner);

  let topic = null;
  if (state.result !== null && state.selectedNode !== null &&
      state.selectedNode.startsWith("topic_")) {
    const k = Number(state.selectedNode.split("_")[1]);
    topic = state.result.topics[k] ?? null;
  }
  document.getElementById("term-panel")!.innerHTML =
    renderTermPanel(topic);

  network.querySelectorAll<SVGElement>(".node").forEach((glyph) => {
    glyph.addEventListener("click", () => {
      void controller.onNodeClick(glyph.dataset.nodeId!);
    });
  });
}

export function start(): Controller {
  const controller = new Controller((url, init) => fetch(url, init));
  controller.onChange(() => draw(controller));

  for (const [id, name] of SLIDER_IDS) {
    const input = document.getElementById(id) as HTMLInputElement | null;
    if (input === null) continue;
    input.addEventListener("input", () => {
      controller.onSliderInput(name, Number(input.value));
    });
  }

  const form = document.getElementById("endpoints") as HTMLFormElement;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const source = (document.getElementById("source-code") as
      HTMLInputElement).value.trim();
    const target = (document.getElementById("target-code") as
      HTMLInputElement).value.trim();
    controller.setEndpoints(source, target);
    void controller.runQuery();
  });

  draw(controller);
  return controller;
}

if (typeof document !== "undefined" &&
    document.getElementById("network") !== null) {
  start();
}
