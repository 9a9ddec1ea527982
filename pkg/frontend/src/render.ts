// Pure view layer: SessionView -> a plain virtual tree. No DOM access here,
// so the board logic is unit-testable; the app shell materializes the tree
// and delegates events through data-* attributes.

import type { ApplicableRule, GoalView, SessionView } from "./types.js";

export interface VNode {
  tag: string;
  attrs?: Record<string, string>;
  children?: (VNode | string)[];
}

export function h(tag: string, attrs?: Record<string, string>,
                  ...children: (VNode | string | null | undefined)[]): VNode {
  return { tag, attrs, children: children.filter((c): c is VNode | string => c != null) };
}

const escapeHtml = (s: string) =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
   .replace(/"/g, "&quot;");

export function toHtml(node: VNode | string): string {
  if (typeof node === "string") return escapeHtml(node);
  const attrs = Object.entries(node.attrs ?? {})
    .map(([k, v]) => ` ${k}="${escapeHtml(v)}"`).join("");
  const inner = (node.children ?? []).map(toHtml).join("");
  return `<${node.tag}${attrs}>${inner}</${node.tag}>`;
}

// -- term display -----------------------------------------------------------

// Highlight meta-variable occurrences (?name / ??name) inside a printed term
// so the board can click-to-focus their goals.
export function termWithMetas(text: string, knownMetas: string[]): (VNode | string)[] {
  const out: (VNode | string)[] = [];
  const re = /\?\??([A-Za-z_][A-Za-z0-9_']*)/g;
  let last = 0;
  for (let m = re.exec(text); m; m = re.exec(text)) {
    if (m.index > last) out.push(text.slice(last, m.index));
    const name = m[1];
    if (knownMetas.includes(name)) {
      out.push(h("span", {
        class: "metavar",
        "data-action": "focus-meta",
        "data-meta": name,
      }, m[0]));
    } else {
      out.push(m[0]);
    }
    last = m.index + m[0].length;
  }
  if (last < text.length) out.push(text.slice(last));
  return out;
}

// -- goal cards ---------------------------------------------------------------

function envText(goal: GoalView, compact: boolean): string {
  const entries = compact ? goal.env_compact : goal.env;
  return entries.map(([x, a]) => `${x} : ${a}`).join(", ");
}

export function renderGoalCard(view: SessionView, goal: GoalView): VNode {
  const compact = view.compact;
  const selected = view.selectedGoal === goal.index;
  const ty = compact ? goal.type_compact : goal.type;
  const head = goal.kind === "term"
    ? `?${goal.metavar} : ${ty}`
    : `?${goal.metavar} : ${ty}  [stoup ${compact ? goal.stoup_compact : goal.stoup}]`;
  return h("div", {
    class: `goal-card${selected ? " selected" : ""}`,
    "data-action": "select-goal",
    "data-goal": String(goal.index),
    "data-meta": goal.metavar,
  },
    h("div", { class: "goal-env" }, envText(goal, compact) || "(empty environment)"),
    h("div", { class: "goal-sep" }, "⊢"),
    h("div", { class: "goal-head" }, head),
  );
}

// -- rule palette -------------------------------------------------------------

export function ruleLabel(rule: ApplicableRule): string {
  switch (rule.rule) {
    case "PiR": return "intro (PiR)";
    case "PiL": return "apply argument (PiL)";
    case "Contr": return `head ${rule.head} (Contr)`;
    case "axiom": return "close (axiom)";
    case "sorted": return `sort ${rule.sort} (sorted)`;
    case "Piwf": return `form (${rule.triple!.join(",")})`;
    case "Claim": return "claim (defer)";
    case "ProvideTerm": return "provide a term";
    default: return rule.rule;
  }
}

export function renderPalette(view: SessionView): VNode {
  const idx = view.selectedGoal;
  if (idx == null) {
    return h("div", { class: "palette" },
      h("div", { class: "palette-hint" }, "select a goal to see its rules"));
  }
  const rules = view.state.applicable.filter(r => r.goal_index === idx);
  const heads = rules.filter(r => r.rule === "Contr");
  const triples = rules.filter(r => r.rule === "Piwf");
  const plain = rules.filter(r => r.rule !== "Contr" && r.rule !== "Piwf"
                                  && r.rule !== "ProvideTerm");
  const buttons: VNode[] = plain.map(r => h("button", {
    class: "rule",
    "data-action": "apply-rule",
    "data-goal": String(idx),
    "data-rule": r.rule,
    ...(r.sort ? { "data-sort": r.sort } : {}),
  }, ruleLabel(r)));
  const headPicker = heads.length
    ? h("div", { class: "picker" },
        h("span", { class: "picker-label" }, "head variable:"),
        ...heads.map(r => h("button", {
          class: "rule head",
          "data-action": "apply-rule",
          "data-goal": String(idx),
          "data-rule": "Contr",
          "data-head": r.head!,
        }, r.head!)))
    : null;
  const triplePicker = triples.length
    ? h("div", { class: "picker" },
        h("span", { class: "picker-label" }, "formation rule:"),
        ...triples.map(r => h("button", {
          class: "rule triple",
          "data-action": "apply-rule",
          "data-goal": String(idx),
          "data-rule": "Piwf",
          "data-triple": r.triple!.join(","),
        }, `(${r.triple!.join(",")})`)))
    : null;
  const provide = rules.some(r => r.rule === "ProvideTerm")
    ? h("div", { class: "provide" },
        h("input", { class: "provide-input", type: "text",
                     placeholder: "term for this goal", "data-goal": String(idx) }),
        h("button", { class: "rule", "data-action": "provide-term",
                      "data-goal": String(idx) }, "provide"))
    : null;
  return h("div", { class: "palette" }, ...buttons, headPicker, triplePicker, provide);
}

// -- whole board ---------------------------------------------------------------

export function renderBoard(view: SessionView): VNode {
  const s = view.state;
  const metas = s.goals.map(g => g.metavar);
  const goalCards = s.goals.length
    ? s.goals.map(g => renderGoalCard(view, g))
    : [];
  const solvedBanner = s.status === "solved"
    ? h("div", { class: "banner solved" }, "solved — final term: ",
        h("code", {}, view.compact ? s.partial_term_compact : s.partial_term))
    : null;
  const failedBanner = s.status === "failed" && s.failure
    ? h("div", { class: "banner failed" },
        `dead end: ${s.failure.lhs} = ${s.failure.rhs} (${s.failure.reason}) `,
        h("button", { class: "rule", "data-action": "undo" }, "undo"))
    : null;
  const constraints = h("div", { class: "constraints" },
    h("h3", {}, `constraints (${s.constraints.length})`),
    ...s.constraints.map(c => h("div", { class: `constraint ${c.solved ? "ok" : "pending"}` },
      h("span", { class: "badge" }, c.solved ? "solved" : "pending"),
      ` ${view.compact ? c.lhs_compact : c.lhs} = ${view.compact ? c.rhs_compact : c.rhs}`)));
  return h("div", { class: "board" },
    h("div", { class: "status-row" },
      h("span", { class: `status ${s.status}` }, s.status),
      h("span", { class: "spec" }, s.spec_name),
      view.pending ? h("span", { class: "pending" }, "working…") : null,
      view.notice ? h("span", { class: "notice" }, view.notice) : null),
    solvedBanner,
    failedBanner,
    h("div", { class: "columns" },
      h("div", { class: "goals" },
        h("h3", {}, `goals (${s.goals.length})`),
        ...goalCards,
        renderPalette(view)),
      h("div", { class: "side" },
        constraints,
        h("div", { class: "partial" },
          h("h3", {}, "partial proof term"),
          h("code", { class: "partial-term" },
            ...termWithMetas(
              view.compact ? s.partial_term_compact : s.partial_term, metas))),
        h("div", { class: "root-goal" },
          h("h3", {}, "root goal"),
          h("code", {}, s.root_goal)))));
}

export function boardSignature(view: SessionView): string {
  // identity of the rendered board given the API state and selection; a hard
  // refresh rebuilds exactly this
  return toHtml(renderBoard(view));
}
