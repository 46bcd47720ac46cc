// Maps user interactions onto protocol requests and store updates. Every
// state change waits for the kernel's response; nothing is predicted locally.

import { KernelClient, KernelError } from "./protocol.js";
import { Store } from "./store.js";
import type {
  DocumentItem,
  GoalPath,
  GoalSummary,
  Style,
  TheoremTree,
} from "./types.js";

export class ProofController {
  constructor(
    readonly client: KernelClient,
    readonly store: Store,
  ) {}

  async openDocument(text: string): Promise<void> {
    const response = await this.client.request("load_document", { text });
    this.store.loadDocument(
      response["title"] as string,
      response["items"] as DocumentItem[],
    );
    for (const item of this.store.items) {
      if (item.kind === "theorem") await this.refreshTree(item.name);
    }
  }

  async refreshTree(theorem: string): Promise<void> {
    const response = await this.client.request("get_tree", { theorem });
    this.store.setTree(response as unknown as TheoremTree);
  }

  /** Goal-tag click: fetch the summary and open the side panel. */
  async selectGoal(theorem: string, path: GoalPath): Promise<void> {
    const showAll = this.store.panel?.showAll ?? false;
    await this.fetchSummary(theorem, path, showAll);
  }

  private async fetchSummary(
    theorem: string,
    path: GoalPath,
    showAll: boolean,
  ): Promise<void> {
    const response = await this.client.request("goal_summary", {
      theorem,
      goal: path,
      show_all: showAll,
    });
    this.store.openPanel(
      { theorem, path },
      response as unknown as GoalSummary,
      showAll,
    );
  }

  /** The show-all checkbox maps straight onto goal_summary's flag. */
  async toggleShowAll(): Promise<void> {
    const panel = this.store.panel;
    if (!panel) return;
    await this.fetchSummary(panel.goal.theorem, panel.goal.path, !panel.showAll);
  }

  /** Style switching is pure re-rendering: no protocol traffic at all. */
  setStyle(theorem: string, style: Style): void {
    this.store.setStyle(theorem, style);
  }

  /** Assumption click: arm it as the elimination target (click again to
   * disarm). The rule clicked next is applied forward on it. */
  selectAssumption(assumption: number): void {
    const panel = this.store.panel;
    if (!panel) return;
    this.store.selectAssumption(
      panel.selectedAssumption === assumption ? null : assumption,
    );
  }

  /** Rule click: backward application, or forward if an assumption is armed. */
  async applyRule(rule: string): Promise<void> {
    const panel = this.store.panel;
    if (!panel) return;
    const { theorem, path } = panel.goal;
    const selected = panel.selectedAssumption;
    await this.mutate(
      selected === null
        ? this.client.request("apply_intro", { theorem, goal: path, rule })
        : this.client.request("apply_elim", {
            theorem,
            goal: path,
            rule,
            assumption: selected,
          }),
      theorem,
    );
  }

  /** Close the goal with an assumption directly. */
  async applyAssumption(assumption: number): Promise<void> {
    const panel = this.store.panel;
    if (!panel) return;
    const { theorem, path } = panel.goal;
    await this.mutate(
      this.client.request("apply_assumption", {
        theorem,
        goal: path,
        assumption,
      }),
      theorem,
    );
  }

  async rewriteByRule(rule: string, direction: "→" | "←", occurrence = 0): Promise<void> {
    const panel = this.store.panel;
    if (!panel) return;
    const { theorem, path } = panel.goal;
    await this.mutate(
      this.client.request("rewrite", {
        theorem,
        goal: path,
        rule,
        direction,
        occurrence,
      }),
      theorem,
    );
  }

  async rewriteByAssumption(
    assumption: number,
    direction: "→" | "←",
    occurrence = 0,
  ): Promise<void> {
    const panel = this.store.panel;
    if (!panel) return;
    const { theorem, path } = panel.goal;
    await this.mutate(
      this.client.request("rewrite", {
        theorem,
        goal: path,
        assumption,
        direction,
        occurrence,
      }),
      theorem,
    );
  }

  async applyRefl(): Promise<void> {
    const panel = this.store.panel;
    if (!panel) return;
    const { theorem, path } = panel.goal;
    await this.mutate(
      this.client.request("apply_refl", { theorem, goal: path }),
      theorem,
    );
  }

  async clearSubtree(theorem: string, path: GoalPath): Promise<void> {
    await this.client.request("clear_subtree", { theorem, path });
    this.store.closePanel();
    await this.refreshTree(theorem);
  }

  async saveDocument(): Promise<string> {
    const response = await this.client.request("save_document", {});
    return response["text"] as string;
  }

  /** Run a mutating request; on success refresh the tree and move the panel
   * to the first new subgoal, on failure surface the kernel's message inline. */
  private async mutate(
    request: Promise<Record<string, unknown>>,
    theorem: string,
  ): Promise<void> {
    const panel = this.store.panel;
    try {
      const response = await request;
      await this.refreshTree(theorem);
      const newGoals = (response["new_goals"] ?? []) as GoalPath[];
      const openGoals = (response["open_goals"] ?? []) as GoalPath[];
      const next = newGoals[0] ?? openGoals[0];
      if (next !== undefined) {
        await this.fetchSummary(theorem, next, panel?.showAll ?? false);
      } else {
        this.store.closePanel();
      }
    } catch (error) {
      if (error instanceof KernelError) {
        this.store.setError(error.message);
        return;
      }
      throw error;
    }
  }
}
