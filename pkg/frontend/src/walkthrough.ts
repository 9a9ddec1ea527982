// Scripted replay: commutativity of conjunction in the System F preset,
// built step by step the way the interactive strategy would.

import type { Action } from "./types.js";

const CONJ = "(Q:*) -> (A -> (B -> Q)) -> Q";

export const WALKTHROUGH_ENV = "A : *, B : *";
export const WALKTHROUGH_GOAL =
  `(x : ${CONJ}) -> (Q : *) -> (y : B -> (A -> Q)) -> Q`;

export interface Step {
  caption: string;
  action: Action;
}

export const WALKTHROUGH_STEPS: Step[] = [
  { caption: "the goal is a function type: introduce the pair hypothesis x",
    action: { type: "apply_rule", goal: 0, rule: "PiR" } },
  { caption: "introduce the result type Q",
    action: { type: "apply_rule", goal: 0, rule: "PiR" } },
  { caption: "introduce the continuation y",
    action: { type: "apply_rule", goal: 0, rule: "PiR" } },
  { caption: "commit to head variable y: its codomain already matches Q",
    action: { type: "apply_rule", goal: 0, rule: "Contr", head: "y" } },
  { caption: "feed y its first argument as a deferred claim",
    action: { type: "apply_rule", goal: 0, rule: "PiL" } },
  { caption: "feed y its second argument as a deferred claim",
    action: { type: "apply_rule", goal: 1, rule: "PiL" } },
  { caption: "close the argument list; this emits the constraint Q = Q",
    action: { type: "apply_rule", goal: 2, rule: "axiom" } },
  { caption: "simplify: the solved constraint is discharged, two claims remain",
    action: { type: "simplify" } },
  { caption: "let the solver finish both claims from the constraints",
    action: { type: "auto", strategy: "lazy", budget: 50000 } },
];
