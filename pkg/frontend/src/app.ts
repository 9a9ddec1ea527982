// App shell: owns the fetch loop, selection, one in-flight mutation, undo,
// auto with polling and cancellation, and the scripted walkthrough. All
// rendering goes through the pure view layer; session identity lives in the
// URL hash so a hard refresh reproduces the same board from GET.

import { ApiError, Client } from "./api.js";
import { renderBoard, toHtml, VNode } from "./render.js";
import type { Action, SessionState, SessionView } from "./types.js";
import { WALKTHROUGH_ENV, WALKTHROUGH_GOAL, WALKTHROUGH_STEPS } from "./walkthrough.js";

const client = new Client("");

interface AppState {
  session: SessionState | null;
  selectedGoal: number | null;
  compact: boolean;
  pending: boolean;
  notice: string | null;
  autoHandle: string | null;
}

const app: AppState = {
  session: null,
  selectedGoal: null,
  compact: true,
  pending: false,
  notice: null,
  autoHandle: null,
};

function view(): SessionView {
  return {
    state: app.session!,
    selectedGoal: app.selectedGoal,
    compact: app.compact,
    pending: app.pending,
    notice: app.notice,
  };
}

function materialize(node: VNode | string): Node {
  if (typeof node === "string") return document.createTextNode(node);
  const el = document.createElement(node.tag);
  for (const [k, v] of Object.entries(node.attrs ?? {})) el.setAttribute(k, v);
  for (const child of node.children ?? []) el.appendChild(materialize(child));
  return el;
}

function draw(): void {
  const root = document.getElementById("board")!;
  root.innerHTML = "";
  if (!app.session) {
    root.innerHTML = "<p class='palette-hint'>create a session to begin</p>";
    return;
  }
  if (app.selectedGoal != null
      && !app.session.goals.some(g => g.index === app.selectedGoal)) {
    app.selectedGoal = app.session.goals.length ? app.session.goals[0].index : null;
  }
  root.appendChild(materialize(renderBoard(view())));
}

function setSession(state: SessionState): void {
  app.session = state;
  window.location.hash = state.id;
  draw();
}

async function mutate(fn: () => Promise<SessionState>): Promise<void> {
  if (app.pending) return; // one in-flight mutation per session
  app.pending = true;
  app.notice = null;
  draw();
  try {
    setSession(await fn());
  } catch (e) {
    app.notice = e instanceof ApiError
      ? `${e.envelope.code}: ${e.envelope.message}${e.envelope.detail ? " — " + e.envelope.detail : ""}`
      : String(e);
  } finally {
    app.pending = false;
    draw();
  }
}

async function runAction(action: Action): Promise<void> {
  const id = app.session!.id;
  if (action.type === "auto") {
    await mutate(async () => {
      const out = await client.auto(id, action.strategy, action.budget, 3.0);
      if (out.state) return out.state;
      app.autoHandle = out.handle!;
      drawCancel(true);
      while (true) {
        await new Promise(r => setTimeout(r, 500));
        const st = await client.autoStatus(app.autoHandle!);
        if (st.status === "finished") {
          app.autoHandle = null;
          drawCancel(false);
          if (st.error) throw new ApiError(st.error);
          return st.state!;
        }
      }
    });
    return;
  }
  await mutate(() => client.act(id, action));
}

function drawCancel(on: boolean): void {
  const btn = document.getElementById("cancel-auto")!;
  btn.style.display = on ? "inline-block" : "none";
}

function wireEvents(): void {
  document.getElementById("board")!.addEventListener("click", ev => {
    const target = (ev.target as HTMLElement).closest("[data-action]") as HTMLElement | null;
    if (!target || !app.session) return;
    const kind = target.dataset.action!;
    if (kind === "select-goal") {
      app.selectedGoal = Number(target.dataset.goal);
      draw();
    } else if (kind === "focus-meta") {
      const goal = app.session.goals.find(g => g.metavar === target.dataset.meta);
      if (goal) {
        app.selectedGoal = goal.index;
        draw();
      }
    } else if (kind === "apply-rule") {
      const action: Action = {
        type: "apply_rule",
        goal: Number(target.dataset.goal),
        rule: target.dataset.rule!,
      };
      if (target.dataset.head) (action as any).head = target.dataset.head;
      if (target.dataset.sort) (action as any).sort = target.dataset.sort;
      if (target.dataset.triple) (action as any).triple = target.dataset.triple.split(",");
      void runAction(action);
    } else if (kind === "provide-term") {
      const goal = Number(target.dataset.goal);
      const input = document.querySelector<HTMLInputElement>(
        `.provide-input[data-goal="${goal}"]`);
      if (input && input.value.trim()) {
        void runAction({ type: "provide_term", goal, term: input.value.trim() });
      }
    } else if (kind === "undo") {
      void mutate(() => client.undo(app.session!.id));
    }
  });

  document.getElementById("new-session")!.addEventListener("click", () => {
    const preset = (document.getElementById("preset") as HTMLSelectElement).value;
    const env = (document.getElementById("env") as HTMLInputElement).value;
    const goal = (document.getElementById("goal") as HTMLInputElement).value;
    void mutate(async () => (await client.createSession(preset, env, goal)).state);
  });
  document.getElementById("undo")!.addEventListener("click", () => {
    if (app.session) void mutate(() => client.undo(app.session!.id));
  });
  document.getElementById("simplify")!.addEventListener("click", () => {
    if (app.session) void runAction({ type: "simplify" });
  });
  document.getElementById("auto")!.addEventListener("click", () => {
    if (app.session) void runAction({ type: "auto", strategy: "lazy", budget: 50000 });
  });
  document.getElementById("cancel-auto")!.addEventListener("click", () => {
    if (app.autoHandle) void client.autoCancel(app.autoHandle);
  });
  document.getElementById("compact")!.addEventListener("change", ev => {
    app.compact = (ev.target as HTMLInputElement).checked;
    draw();
  });
  document.getElementById("walkthrough")!.addEventListener("click", () => {
    void runWalkthrough();
  });
}

async function runWalkthrough(): Promise<void> {
  (document.getElementById("env") as HTMLInputElement).value = WALKTHROUGH_ENV;
  (document.getElementById("goal") as HTMLInputElement).value = WALKTHROUGH_GOAL;
  await mutate(async () =>
    (await client.createSession("systemF", WALKTHROUGH_ENV, WALKTHROUGH_GOAL)).state);
  for (const step of WALKTHROUGH_STEPS) {
    if (!app.session) return;
    app.notice = step.caption;
    draw();
    await new Promise(r => setTimeout(r, 650));
    await runAction(step.action);
    if (app.notice && !app.pending && app.session.status !== "failed"
        && app.notice.includes(":")) {
      // an action was rejected; stop the script so the user can inspect
      return;
    }
  }
  app.notice = "walkthrough complete";
  draw();
}

async function boot(): Promise<void> {
  wireEvents();
  const fromHash = window.location.hash.replace("#", "");
  if (fromHash) {
    try {
      setSession(await client.getSession(fromHash));
    } catch {
      window.location.hash = "";
      draw();
    }
  } else {
    draw();
  }
}

void boot();

export { toHtml };
