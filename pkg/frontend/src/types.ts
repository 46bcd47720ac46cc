// Payload shapes of the hbt/1 session protocol, as consumed by the editor.

export type GoalPath = number[];

export interface KernelErrorPayload {
  code: string;
  message: string;
}

export interface NumberedAssumption {
  number: number;
  text: string;
}

export interface GoalSummary {
  target: string;
  locals: string[];
  assumptions: NumberedAssumption[];
  candidates: string[];
}

export interface StepInfo {
  op: "intro" | "assumption" | "elim" | "rewrite" | "refl";
  rule?: string;
  assumption?: number;
  direction?: string;
  occurrence?: number;
}

export interface TreeNode {
  target: string;
  new_locals: string[];
  new_assumptions: NumberedAssumption[];
  step: StepInfo | null;
  children: TreeNode[];
}

export interface TheoremTree {
  name: string;
  style: Style;
  statement: string;
  tree: TreeNode;
}

export interface RenderedRule {
  name: string;
  text: string;
}

export type DocumentItem =
  | { kind: "prose"; text: string }
  | { kind: "axioms"; rules: RenderedRule[] }
  | { kind: "inductive"; judgments: string[]; rules: RenderedRule[] }
  | { kind: "theorem"; name: string; statement: string; style: Style };

export interface LoadedDocument {
  title: string;
  items: DocumentItem[];
}

export interface OpenGoals {
  new_goals: GoalPath[];
  open_goals: GoalPath[];
}

export type Style = "hybrid" | "linear" | "vertical" | "tree" | "prose";

export const STYLES: Style[] = ["hybrid", "linear", "vertical", "tree", "prose"];
