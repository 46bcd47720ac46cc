// HTML renderers for documents and proof trees. Pure functions of kernel
// payloads plus the chosen style; no logic is computed here.

import type {
  DocumentItem,
  GoalPath,
  StepInfo,
  Style,
  TreeNode,
} from "./types.js";
import type { SidePanel } from "./store.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function pathAttr(path: GoalPath): string {
  return path.join(".");
}

/** ∃E⁰, +I→, a bare assumption number, or the rule name. */
export function stepLabel(step: StepInfo): string {
  switch (step.op) {
    case "intro":
      return escapeHtml(step.rule ?? "?");
    case "refl":
      return "refl";
    case "assumption":
      return `<span class="assumption-name">${step.assumption}</span>`;
    case "elim":
      return `${escapeHtml(step.rule ?? "?")}<sup>${step.assumption}</sup>`;
    case "rewrite": {
      const base =
        step.rule !== undefined
          ? escapeHtml(step.rule)
          : `<span class="assumption-name">${step.assumption}</span>`;
      const arrow = step.direction === "←" ? "←" : "→";
      const occurrence =
        step.occurrence && step.occurrence > 0 ? `<sub>${step.occurrence}</sub>` : "";
      return `${base}<sup>${arrow}</sup>${occurrence}`;
    }
  }
}

function goalTag(theorem: string, path: GoalPath): string {
  return (
    `<button class="goal-tag" data-goal="${pathAttr(path)}" ` +
    `data-theorem="${escapeHtml(theorem)}">⊙</button>`
  );
}

function contextPrefix(node: TreeNode): string {
  const parts: string[] = [];
  if (node.new_locals.length > 0) {
    parts.push(
      `<span class="binders">${escapeHtml(node.new_locals.join(" "))}.</span>`,
    );
  }
  for (const assumption of node.new_assumptions) {
    parts.push(
      `<span class="assumption"><span class="assumption-name">${assumption.number}:</span> ` +
        `${escapeHtml(assumption.text)}</span>`,
    );
  }
  if (node.new_assumptions.length > 0) parts.push(`<span class="turnstile">⊢</span>`);
  return parts.join(" ");
}

function nodeHeader(node: TreeNode): string {
  const prefix = contextPrefix(node);
  const target = `<span class="target">${escapeHtml(node.target)}</span>`;
  return prefix ? `${prefix} ${target}` : target;
}

function renderInference(
  theorem: string,
  node: TreeNode,
  path: GoalPath,
  style: Style,
): string {
  if (node.step === null) {
    return `<div class="goal open-goal">${nodeHeader(node)} ${goalTag(theorem, path)}</div>`;
  }
  const premises = node.children
    .map((child, i) => renderInference(theorem, child, [...path, i], style))
    .join("");
  const dots = style === "vertical" && node.new_assumptions.length > 0;
  return (
    `<div class="inference${dots ? " with-discharge" : ""}">` +
    `<div class="premises">${premises}</div>` +
    `<div class="vinculum"><span class="rule-label" data-step="${pathAttr(path)}">` +
    `${stepLabel(node.step)}</span></div>` +
    `<div class="conclusion">${nodeHeader(node)}</div>` +
    `</div>`
  );
}

function renderLinear(theorem: string, node: TreeNode, path: GoalPath): string {
  if (node.step === null) {
    return `<span class="goal open-goal">${nodeHeader(node)} ${goalTag(theorem, path)}</span>`;
  }
  const premises = node.children
    .map((child, i) => renderLinear(theorem, child, [...path, i]))
    .join('<span class="comma">, </span>');
  const by = `<span class="rule-label">${stepLabel(node.step)}</span>`;
  if (node.children.length === 0) {
    return `<span class="derivation">${nodeHeader(node)} <span class="by">by</span> ${by}</span>`;
  }
  return (
    `<span class="derivation">${nodeHeader(node)} <span class="by">by</span> ${by} ` +
    `<span class="from">from</span> [${premises}]</span>`
  );
}

function renderProse(theorem: string, node: TreeNode, style: Style): string {
  // Only the top-level application reads as prose; each case stays a tree.
  if (node.step === null) {
    return `<div class="prose-proof">${renderInference(theorem, node, [], "hybrid")}</div>`;
  }
  const intro: string[] = [];
  if (node.new_locals.length > 0) {
    intro.push(
      `<p><em>Given</em> <span class="binders">${escapeHtml(node.new_locals.join(" "))}.</span>` +
        (node.new_assumptions.length > 0 ? " <em>where:</em></p>" : "</p>"),
    );
  }
  if (node.new_assumptions.length > 0) {
    const lines = node.new_assumptions
      .map(
        (a) =>
          `<li><span class="assumption-name">${a.number}:</span> ${escapeHtml(a.text)}</li>`,
      )
      .join("");
    intro.push(`<ul class="assumptions">${lines}</ul>`);
  }
  const cases = node.children
    .map((child, i) => `<li>${renderCase(theorem, child, [i])}</li>`)
    .join("");
  return (
    `<div class="prose-proof">${intro.join("")}` +
    `<p><em>Show</em> <span class="target">${escapeHtml(node.target)}</span> ` +
    `<em>by</em> <span class="rule-label">${stepLabel(node.step)}</span>:</p>` +
    `<ul class="cases">${cases}</ul></div>`
  );
}

function renderCase(theorem: string, node: TreeNode, path: GoalPath): string {
  const given: string[] = [];
  if (node.new_locals.length > 0) {
    given.push(
      `<em>Given</em> <span class="binders">${escapeHtml(node.new_locals.join(" "))}.</span> `,
    );
  }
  if (node.new_assumptions.length > 0) {
    const lines = node.new_assumptions
      .map(
        (a) =>
          `<li><span class="assumption-name">${a.number}:</span> ${escapeHtml(a.text)}</li>`,
      )
      .join("");
    given.push(`<em>where:</em><ul class="assumptions">${lines}</ul>`);
  }
  const body =
    node.step === null
      ? `<div class="goal open-goal"><span class="target">${escapeHtml(node.target)}</span> ${goalTag(theorem, path)}</div>`
      : renderInference(theorem, { ...node, new_locals: [], new_assumptions: [] }, path, "hybrid");
  return `${given.join("")}${body}`;
}

export function renderTree(
  theorem: string,
  root: TreeNode,
  style: Style,
): string {
  switch (style) {
    case "prose":
      return renderProse(theorem, root, style);
    case "linear":
      return `<div class="linear-proof">${renderLinear(theorem, root, [])}</div>`;
    case "vertical":
    case "tree":
    case "hybrid":
      return `<div class="tree-proof style-${style}">${renderInference(theorem, root, [], style)}</div>`;
  }
}

export function renderDocument(items: DocumentItem[]): string {
  const chunks: string[] = [];
  items.forEach((item, index) => {
    switch (item.kind) {
      case "prose":
        chunks.push(`<section class="prose"><p>${escapeHtml(item.text)}</p></section>`);
        break;
      case "axioms":
        chunks.push(
          `<section class="axioms"><h3>Axioms</h3><dl>` +
            item.rules
              .map(
                (rule) =>
                  `<dt>${escapeHtml(rule.name)}</dt><dd>${escapeHtml(rule.text)}</dd>`,
              )
              .join("") +
            `</dl></section>`,
        );
        break;
      case "inductive":
        chunks.push(
          `<section class="inductive"><h3>Inductive definition</h3>` +
            `<p class="judgments">${item.judgments.map(escapeHtml).join(", ")}</p><dl>` +
            item.rules
              .map(
                (rule) =>
                  `<dt>${escapeHtml(rule.name)}</dt><dd>${escapeHtml(rule.text)}</dd>`,
              )
              .join("") +
            `</dl></section>`,
        );
        break;
      case "theorem":
        chunks.push(
          `<section class="theorem" data-index="${index}">` +
            `<h3>Theorem ${escapeHtml(item.name)}</h3>` +
            `<p class="statement">${escapeHtml(item.statement)}</p>` +
            `<div class="style-switch">` +
            ["hybrid", "linear", "vertical", "prose"]
              .map(
                (style) =>
                  `<button class="style-button" data-theorem="${escapeHtml(item.name)}" ` +
                  `data-style="${style}">${style}</button>`,
              )
              .join("") +
            `</div>` +
            `<div class="proof-slot" data-theorem="${escapeHtml(item.name)}"></div>` +
            `</section>`,
        );
        break;
    }
  });
  return chunks.join("\n");
}

export function renderPanel(panel: SidePanel | null): string {
  if (panel === null) return `<aside class="panel empty"></aside>`;
  const { summary } = panel;
  const locals =
    summary.locals.length > 0
      ? `<p class="locals">${escapeHtml(summary.locals.join(" "))}.</p>`
      : "";
  const assumptions = summary.assumptions
    .map((a) => {
      const selected = panel.selectedAssumption === a.number ? " selected" : "";
      return (
        `<li class="assumption-item${selected}" data-assumption="${a.number}">` +
        `<span class="assumption-name">${a.number}:</span> ${escapeHtml(a.text)}</li>`
      );
    })
    .join("");
  const candidates = summary.candidates
    .map(
      (name) =>
        `<li class="candidate" data-rule="${escapeHtml(name)}">${escapeHtml(name)}</li>`,
    )
    .join("");
  const error = panel.error
    ? `<p class="error">${escapeHtml(panel.error)}</p>`
    : "";
  return (
    `<aside class="panel">` +
    `<h3>Goal</h3>${locals}` +
    `<p class="target">${escapeHtml(summary.target)}</p>` +
    `<h4>Assumptions</h4><ul class="assumptions">${assumptions}</ul>` +
    `<label class="show-all"><input type="checkbox" class="show-all-toggle"` +
    `${panel.showAll ? " checked" : ""}> show all rules</label>` +
    `<h4>Rules</h4><ul class="candidates">${candidates}</ul>` +
    error +
    `</aside>`
  );
}
