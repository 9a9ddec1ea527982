// Thin client over the session service; the endpoint URL is the single
// configuration knob. The UI computes no typing or reduction itself.

import type { Action, ErrorEnvelope, SessionState } from "./types.js";

export class ApiError extends Error {
  envelope: ErrorEnvelope;
  constructor(envelope: ErrorEnvelope) {
    super(envelope.message);
    this.envelope = envelope;
  }
}

async function unwrap(res: Response): Promise<any> {
  const body = await res.json().catch(() => ({}));
  if (!res.ok) {
    const envelope: ErrorEnvelope =
      body && body.error ? body.error
      : body && body.detail && body.detail.code ? body.detail
      : { code: `http_${res.status}`, message: res.statusText };
    throw new ApiError(envelope);
  }
  return body;
}

export class Client {
  constructor(readonly base: string = "") {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  async presets(): Promise<Record<string, unknown>> {
    return unwrap(await fetch(this.url("/presets")));
  }

  async createSession(preset: string, env: string, goal: string):
      Promise<{ id: string; state: SessionState }> {
    return unwrap(await fetch(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ preset, env, goal }),
    }));
  }

  async getSession(id: string): Promise<SessionState> {
    return unwrap(await fetch(this.url(`/sessions/${id}`)));
  }

  async act(id: string, action: Action): Promise<SessionState> {
    return unwrap(await fetch(this.url(`/sessions/${id}/actions`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ action }),
    }));
  }

  async undo(id: string): Promise<SessionState> {
    return unwrap(await fetch(this.url(`/sessions/${id}/undo`), { method: "POST" }));
  }

  // Resolves with the new state, or a handle when the run is still going.
  async auto(id: string, strategy: "lazy" | "eager", budget: number, wait = 5.0):
      Promise<{ state?: SessionState; handle?: string }> {
    const res = await fetch(this.url(`/sessions/${id}/auto`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ strategy, budget, wait }),
    });
    if (res.status === 202) {
      const body = await res.json();
      return { handle: body.handle };
    }
    return { state: await unwrap(res) };
  }

  async autoStatus(handle: string):
      Promise<{ status: string; state?: SessionState; error?: ErrorEnvelope }> {
    return unwrap(await fetch(this.url(`/auto/${handle}`)));
  }

  async autoCancel(handle: string): Promise<void> {
    await fetch(this.url(`/auto/${handle}`), { method: "DELETE" });
  }

  async exportSession(id: string): Promise<unknown> {
    return unwrap(await fetch(this.url(`/sessions/${id}/export`)));
  }
}
