// Console state machine: polling, submission rules, reconnect behavior.
// The client is stateless with respect to the run — everything shown is
// re-derived from the server on every poll, so a page reload always lands
// back in the current server state.

import { LabelingApi, PendingItem, RunStatus } from "./api.js";

export interface ConsoleState {
  connected: boolean;
  pending: PendingItem | null;
  status: RunStatus | null;
  submitting: boolean;
}

export function isDone(state: ConsoleState): boolean {
  return state.status !== null && state.status.iteration >= state.status.budget;
}

export class LabelingConsole {
  readonly state: ConsoleState = {
    connected: true,
    pending: null,
    status: null,
    submitting: false,
  };

  private timer: ReturnType<typeof setInterval> | null = null;
  private pollInFlight = false;

  constructor(
    private readonly api: LabelingApi,
    private readonly onChange: (state: ConsoleState) => void,
    private readonly pollIntervalMs = 1000,
  ) {}

  start(): void {
    void this.pollOnce();
    this.timer = setInterval(() => void this.pollOnce(), this.pollIntervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  // Polls never overlap: a slow round trip makes the interval skip ticks
  // instead of stacking concurrent requests.
  async pollOnce(): Promise<void> {
    if (this.pollInFlight) return;
    this.pollInFlight = true;
    try {
      const [pending, status] = await Promise.all([this.api.next(), this.api.status()]);
      this.state.pending = pending;
      this.state.status = status;
      this.state.connected = true;
    } catch {
      // Connection trouble: show the banner and let the interval retry.
      this.state.connected = false;
    } finally {
      this.pollInFlight = false;
    }
    this.onChange(this.state);
  }

  // At most one submission is in flight. A 409 means the server already
  // moved on, so refresh rather than resubmit; one transient network
  // failure is retried once before giving up until the next poll.
  async submit(label: 0 | 1): Promise<void> {
    const pending = this.state.pending;
    if (pending === null || this.state.submitting) return;
    this.state.submitting = true;
    this.onChange(this.state);
    try {
      for (let attempt = 0; attempt < 2; attempt++) {
        try {
          await this.api.submit(pending.item_id, label);
          break;
        } catch {
          if (attempt === 1) {
            this.state.connected = false;
            return;
          }
        }
      }
      this.state.pending = null;
    } finally {
      this.state.submitting = false;
      this.onChange(this.state);
      await this.pollOnce();
    }
  }
}
