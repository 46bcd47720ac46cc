// The editor's view model. Everything logical in here is a verbatim kernel
// response; the store only arranges it for rendering.

import type {
  DocumentItem,
  GoalPath,
  GoalSummary,
  Style,
  TheoremTree,
} from "./types.js";

export interface ActiveGoal {
  theorem: string;
  path: GoalPath;
}

export interface SidePanel {
  goal: ActiveGoal;
  summary: GoalSummary;
  showAll: boolean;
  /** assumption selected as elimination target, if any */
  selectedAssumption: number | null;
  /** error from the last attempted step, shown inline */
  error: string | null;
}

export function samePath(a: GoalPath, b: GoalPath): boolean {
  return a.length === b.length && a.every((x, i) => x === b[i]);
}

export class Store {
  title = "";
  items: DocumentItem[] = [];
  trees = new Map<string, TheoremTree>();
  /** per-theorem display style; toggling is purely local */
  styles = new Map<string, Style>();
  panel: SidePanel | null = null;
  private listeners: Array<() => void> = [];

  onChange(listener: () => void): void {
    this.listeners.push(listener);
  }

  notify(): void {
    for (const listener of this.listeners) listener();
  }

  loadDocument(title: string, items: DocumentItem[]): void {
    this.title = title;
    this.items = items;
    this.trees.clear();
    this.styles.clear();
    this.panel = null;
    for (const item of items) {
      if (item.kind === "theorem") this.styles.set(item.name, item.style);
    }
    this.notify();
  }

  setTree(tree: TheoremTree): void {
    this.trees.set(tree.name, tree);
    if (!this.styles.has(tree.name)) this.styles.set(tree.name, tree.style);
    this.notify();
  }

  styleOf(theorem: string): Style {
    return this.styles.get(theorem) ?? "hybrid";
  }

  setStyle(theorem: string, style: Style): void {
    this.styles.set(theorem, style);
    this.notify();
  }

  openPanel(goal: ActiveGoal, summary: GoalSummary, showAll: boolean): void {
    // refreshing the same goal (say, via the show-all checkbox) keeps the
    // armed assumption; moving to another goal disarms it
    const sameGoal =
      this.panel !== null &&
      this.panel.goal.theorem === goal.theorem &&
      samePath(this.panel.goal.path, goal.path);
    this.panel = {
      goal,
      summary,
      showAll,
      selectedAssumption: sameGoal ? this.panel!.selectedAssumption : null,
      error: null,
    };
    this.notify();
  }

  closePanel(): void {
    this.panel = null;
    this.notify();
  }

  selectAssumption(n: number | null): void {
    if (this.panel) {
      this.panel.selectedAssumption = n;
      this.panel.error = null;
      this.notify();
    }
  }

  setError(message: string): void {
    if (this.panel) {
      this.panel.error = message;
      this.notify();
    }
  }
}
