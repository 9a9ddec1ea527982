import { describe, expect, it } from "vitest";

import { boardSignature, h, renderBoard, renderPalette, ruleLabel, termWithMetas, toHtml }
  from "../src/render.js";
import type { SessionState, SessionView } from "../src/types.js";

function state(partial: Partial<SessionState> = {}): SessionState {
  return {
    id: "abc",
    spec: { sorts: ["*", "#"], axioms: [["*", "#"]], rules: [["*", "*", "*"]] },
    spec_name: "systemF",
    root_env: [["A", "*"], ["B", "*"]],
    root_goal: "G",
    goals: [],
    constraints: [],
    partial_term: "?root(A{nil}, B{nil})",
    partial_term_compact: "?root(A, B)",
    bindings: [],
    status: "open",
    failure: null,
    history_length: 0,
    applicable: [],
    ...partial,
  };
}

function view(partial: Partial<SessionState> = {}, extra: Partial<SessionView> = {}): SessionView {
  return { state: state(partial), selectedGoal: null, compact: true,
           pending: false, notice: null, ...extra };
}

const goal = {
  index: 0, kind: "term" as const, metavar: "a1",
  env: [["A", "*"], ["x", "A{nil}"]] as [string, string][],
  env_compact: [["A", "*"], ["x", "A"]] as [string, string][],
  type: "B{nil}", type_compact: "B",
};

describe("term rendering", () => {
  it("highlights known meta-variables and leaves the rest verbatim", () => {
    const parts = termWithMetas("\\x. ?a1(x) :: ??b2(x)", ["a1", "b2"]);
    const html = parts.map(p => toHtml(p as any)).join("");
    expect(html).toContain('data-meta="a1"');
    expect(html).toContain('data-meta="b2"');
    expect(html).toContain("\\x. ");
  });

  it("does not highlight unknown names", () => {
    const parts = termWithMetas("?ghost(x)", ["a1"]);
    expect(parts.every(p => typeof p === "string")).toBe(true);
  });

  it("escapes html in terms", () => {
    expect(toHtml(h("code", {}, "<A> & B"))).toBe("<code>&lt;A&gt; &amp; B</code>");
  });
});

describe("goal board", () => {
  it("renders goal cards in goal-environment order with the turnstile", () => {
    const v = view({ goals: [goal] });
    const html = toHtml(renderBoard(v));
    expect(html).toContain("goals (1)");
    expect(html).toContain("A : *, x : A");
    expect(html).toContain("⊢");
    expect(html).toContain("?a1 : B");
  });

  it("shows the stoup on list goals", () => {
    const lg = { ...goal, kind: "list" as const, stoup: "A{nil} -> B{nil}",
                 stoup_compact: "A -> B" };
    const html = toHtml(renderBoard(view({ goals: [lg] })));
    expect(html).toContain("[stoup A -&gt; B]");
  });

  it("renders constraint badges exactly as reported", () => {
    const html = toHtml(renderBoard(view({ constraints: [
      { index: 1, env: [], lhs: "Q{nil}", rhs: "Q{nil}",
        lhs_compact: "Q", rhs_compact: "Q", solved: true },
      { index: 2, env: [], lhs: "?m(x)", rhs: "A{nil}",
        lhs_compact: "?m(x)", rhs_compact: "A", solved: false },
    ] })));
    expect(html).toContain("solved");
    expect(html).toContain("pending");
    expect(html).toContain("Q = Q");
  });

  it("shows the solved banner with the final term when there are no goals", () => {
    const html = toHtml(renderBoard(view({
      status: "solved", partial_term_compact: "\\x. x", goals: [] })));
    expect(html).toContain("solved — final term");
    expect(html).toContain("\\x. x");
  });

  it("shows the failure diagnostic with an undo affordance", () => {
    const html = toHtml(renderBoard(view({
      status: "failed",
      failure: { message: "m", lhs: "A{nil}", rhs: "B{nil}", reason: "rigid" },
    })));
    expect(html).toContain("dead end");
    expect(html).toContain('data-action="undo"');
  });

  it("is a pure projection: same state and selection, same board", () => {
    const a = boardSignature(view({ goals: [goal] }, { selectedGoal: 0 }));
    const b = boardSignature(view({ goals: [goal] }, { selectedGoal: 0 }));
    expect(a).toBe(b);
  });

  it("full-form toggle switches the printed terms", () => {
    const compact = toHtml(renderBoard(view({ goals: [goal] })));
    const full = toHtml(renderBoard(view({ goals: [goal] }, { compact: false })));
    expect(compact).toContain("?a1 : B<");
    expect(full).toContain("?a1 : B{nil}");
  });
});

describe("rule palette", () => {
  it("asks for a selection first", () => {
    const html = toHtml(renderPalette(view({ goals: [goal] })));
    expect(html).toContain("select a goal");
  });

  it("expands head and formation pickers from the applicable rules", () => {
    const v = view({
      goals: [goal],
      applicable: [
        { goal_index: 0, rule: "PiR" },
        { goal_index: 0, rule: "Contr", head: "x" },
        { goal_index: 0, rule: "Contr", head: "A" },
        { goal_index: 0, rule: "Piwf", triple: ["*", "*", "*"] },
        { goal_index: 0, rule: "Claim" },
        { goal_index: 0, rule: "ProvideTerm" },
      ],
    }, { selectedGoal: 0 });
    const html = toHtml(renderPalette(v));
    expect(html).toContain("intro (PiR)");
    expect(html).toContain("head variable:");
    expect(html).toContain('data-head="x"');
    expect(html).toContain('data-head="A"');
    expect(html).toContain("formation rule:");
    expect(html).toContain('data-triple="*,*,*"');
    expect(html).toContain("provide");
  });

  it("labels every rule kind", () => {
    expect(ruleLabel({ goal_index: 0, rule: "axiom" })).toContain("axiom");
    expect(ruleLabel({ goal_index: 0, rule: "sorted", sort: "*" })).toContain("*");
    expect(ruleLabel({ goal_index: 0, rule: "Claim" })).toContain("defer");
  });
});
