// Client for the labeling service. The console talks to exactly three
// endpoints: GET /api/next, GET /api/status, POST /api/label.

export interface PendingItem {
  item_id: string;
  url: string | null;
  iteration: number;
}

export interface RunStatus {
  iteration: number;
  budget: number;
  n_pos: number;
  n_neg: number;
  auc_history: number[];
}

export type SubmitResult = "ok" | "conflict";

export class LabelingApi {
  constructor(private readonly base: string = "") {}

  // 204 means nothing is awaiting a label right now.
  async next(): Promise<PendingItem | null> {
    const resp = await fetch(`${this.base}/api/next`);
    if (resp.status === 204) return null;
    if (!resp.ok) throw new Error(`GET /api/next -> ${resp.status}`);
    return (await resp.json()) as PendingItem;
  }

  async status(): Promise<RunStatus> {
    const resp = await fetch(`${this.base}/api/status`);
    if (!resp.ok) throw new Error(`GET /api/status -> ${resp.status}`);
    return (await resp.json()) as RunStatus;
  }

  // 409 = the id is not the pending one (already consumed or stale);
  // callers refresh instead of resubmitting.
  async submit(itemId: string, label: 0 | 1): Promise<SubmitResult> {
    const resp = await fetch(`${this.base}/api/label`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ item_id: itemId, label }),
    });
    if (resp.status === 409) return "conflict";
    if (!resp.ok) throw new Error(`POST /api/label -> ${resp.status}`);
    return "ok";
  }
}
