// Browser bootstrap: event delegation over the rendered document, one
// WebSocket bridge to `hbt serve`, re-render on every store change.

import { ProofController } from "./controller.js";
import { KernelClient, WebSocketTransport } from "./protocol.js";
import { renderDocument, renderPanel, renderTree } from "./render.js";
import { Store } from "./store.js";
import type { Style } from "./types.js";

function parsePath(attr: string): number[] {
  return attr === "" ? [] : attr.split(".").map(Number);
}

export function mount(root: HTMLElement, socketUrl: string): ProofController {
  const store = new Store();
  const client = new KernelClient(new WebSocketTransport(new WebSocket(socketUrl)));
  const controller = new ProofController(client, store);

  const reader = document.createElement("div");
  reader.className = "reader";
  const panel = document.createElement("div");
  panel.className = "panel-slot";
  root.append(reader, panel);

  store.onChange(() => {
    reader.innerHTML = renderDocument(store.items);
    for (const slot of reader.querySelectorAll<HTMLElement>(".proof-slot")) {
      const theorem = slot.dataset["theorem"] ?? "";
      const tree = store.trees.get(theorem);
      if (tree) {
        slot.innerHTML = renderTree(theorem, tree.tree, store.styleOf(theorem));
      }
    }
    panel.innerHTML = renderPanel(store.panel);
  });

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const goal = target.closest<HTMLElement>("[data-goal]");
    if (goal) {
      void controller.selectGoal(
        goal.dataset["theorem"] ?? "",
        parsePath(goal.dataset["goal"] ?? ""),
      );
      return;
    }
    const styleButton = target.closest<HTMLElement>(".style-button");
    if (styleButton) {
      controller.setStyle(
        styleButton.dataset["theorem"] ?? "",
        (styleButton.dataset["style"] ?? "hybrid") as Style,
      );
      return;
    }
    const rule = target.closest<HTMLElement>("[data-rule]");
    if (rule) {
      void controller.applyRule(rule.dataset["rule"] ?? "");
      return;
    }
    const assumption = target.closest<HTMLElement>("[data-assumption]");
    if (assumption) {
      const number = Number(assumption.dataset["assumption"]);
      if (event.detail >= 2) {
        void controller.applyAssumption(number);
      } else {
        controller.selectAssumption(number);
      }
      return;
    }
    const toggle = target.closest<HTMLInputElement>(".show-all-toggle");
    if (toggle) {
      void controller.toggleShowAll();
    }
  });

  return controller;
}
