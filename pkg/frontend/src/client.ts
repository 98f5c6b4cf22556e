// Thin HTTP client for the game service.

import type { LevelView, PathPayload, RecordView } from "./protocol.js";

export class ServiceClient {
  constructor(
    readonly baseUrl: string,
    readonly playerToken: string,
  ) {}

  async listLevels(): Promise<LevelView[]> {
    const r = await fetch(`${this.baseUrl}/levels`);
    if (!r.ok) throw new Error(`GET /levels failed: ${r.status}`);
    return (await r.json()) as LevelView[];
  }

  async submit(
    levelId: string,
    path: PathPayload,
    clientFidelity: number,
  ): Promise<RecordView> {
    const r = await fetch(`${this.baseUrl}/levels/${levelId}/trajectories`, {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        Authorization: `Bearer ${this.playerToken}`,
      },
      body: JSON.stringify({ path, client_fidelity: clientFidelity }),
    });
    if (r.status === 422) {
      const detail = await r.json();
      throw new SubmissionRejected(detail.detail?.violations ?? []);
    }
    if (!r.ok) throw new Error(`submission failed: ${r.status}`);
    return (await r.json()) as RecordView;
  }

  async leaderboard(levelId: string, limit = 10): Promise<RecordView[]> {
    const r = await fetch(`${this.baseUrl}/levels/${levelId}/leaderboard?limit=${limit}`);
    if (!r.ok) throw new Error(`leaderboard failed: ${r.status}`);
    return (await r.json()) as RecordView[];
  }
}

export class SubmissionRejected extends Error {
  constructor(readonly violations: string[]) {
    super(`submission rejected: ${violations.join("; ")}`);
  }
}
