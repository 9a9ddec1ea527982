// Mirrors of the session service JSON payloads.

export type EnvEntry = [string, string];

export interface GoalView {
  index: number;
  kind: "term" | "list";
  metavar: string;
  env: EnvEntry[];
  env_compact: EnvEntry[];
  type: string;
  type_compact: string;
  stoup?: string;
  stoup_compact?: string;
}

export interface ConstraintView {
  index: number;
  env: EnvEntry[];
  lhs: string;
  rhs: string;
  lhs_compact: string;
  rhs_compact: string;
  solved: boolean;
}

export interface ApplicableRule {
  goal_index: number;
  rule: string;
  head?: string;
  sort?: string;
  triple?: [string, string, string];
}

export interface SessionState {
  id: string;
  spec: { sorts: string[]; axioms: string[][]; rules: string[][] };
  spec_name: string;
  root_env: EnvEntry[];
  root_goal: string;
  goals: GoalView[];
  constraints: ConstraintView[];
  partial_term: string;
  partial_term_compact: string;
  bindings: { metavar: string; binders: string[]; body: string }[];
  status: "open" | "solved" | "failed";
  failure: { message: string; lhs: string; rhs: string; reason: string } | null;
  history_length: number;
  applicable: ApplicableRule[];
}

export interface ErrorEnvelope {
  code: string;
  message: string;
  goal_index?: number;
  rule?: string;
  detail?: string;
}

export type Action =
  | { type: "apply_rule"; goal: number; rule: string; head?: string; sort?: string; triple?: string[] }
  | { type: "claim"; goal: number }
  | { type: "provide_term"; goal: number; term: string }
  | { type: "simplify" }
  | { type: "auto"; strategy: "lazy" | "eager"; budget: number }
  | { type: "undo" };

// Everything the board renders: server state plus purely local UI state, so
// a hard refresh (which resets the local part) reproduces the same board.
export interface SessionView {
  state: SessionState;
  selectedGoal: number | null;
  compact: boolean;
  pending: boolean;
  notice: string | null; // last error or walkthrough caption
}
