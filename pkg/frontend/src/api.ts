/** Typed client for the review service.
 *
 * Mutations go through submitDecision, which fixes one idempotency key per
 * draft and retries transient failures with that same key: the server
 * deduplicates, so a verdict is applied exactly once no matter how many
 * network-level retries happen.  A verdict is never dropped silently; the
 * returned promise rejects only after retries are exhausted, and the draft
 * stays in the outbox for a later flush.
 */
import type {
  DecisionDraft, DecisionRecord, DescriptionDetail, QueueFilters, QueuePage,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

function makeKey(): string {
  const c = globalThis.crypto;
  if (c?.randomUUID) return c.randomUUID();
  return `key-${Date.now()}-${Math.random().toString(36).slice(2)}`;
}

export function queueParams(filters: QueueFilters, limit?: number,
                            offset?: number): string {
  // filters map 1:1 to the documented /queue parameters; unset ones are
  // simply absent, nothing else is ever sent
  const params = new URLSearchParams();
  if (filters.label) params.set("label", filters.label);
  if (filters.fonds) params.set("fonds", filters.fonds);
  if (filters.status) params.set("status", filters.status);
  if (limit !== undefined) params.set("limit", String(limit));
  if (offset !== undefined) params.set("offset", String(offset));
  const s = params.toString();
  return s ? `?${s}` : "";
}

export class ReviewApi {
  constructor(private base: string = "",
              private fetchFn: FetchLike =
                  (url, init) => globalThis.fetch(url, init)) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      throw new ApiError(resp.status, await resp.text());
    }
    return resp.json() as Promise<T>;
  }

  getQueue(filters: QueueFilters = {}, limit = 50, offset = 0):
      Promise<QueuePage> {
    return this.request<QueuePage>(
      `/queue${queueParams(filters, limit, offset)}`);
  }

  getDescription(id: string): Promise<DescriptionDetail> {
    return this.request<DescriptionDetail>(
      `/descriptions/${encodeURIComponent(id)}`);
  }

  async postDecision(draft: DecisionDraft, key: string):
      Promise<DecisionRecord> {
    return this.request<DecisionRecord>("/decisions", {
      method: "POST",
      headers: {
        "Content-Type": "application/json",
        "Idempotency-Key": key,
      },
      body: JSON.stringify(draft),
    });
  }

  async getExport(): Promise<string> {
    const resp = await this.fetchFn(`${this.base}/export`);
    if (!resp.ok) throw new ApiError(resp.status, await resp.text());
    return resp.text();
  }
}

export interface PendingDecision {
  key: string;
  draft: DecisionDraft;
  attempts: number;
}

export interface SubmitResult {
  record: DecisionRecord;
  attempts: number;
}

/** Outbox of unacknowledged decisions.  A draft gets its key on enqueue
 * and keeps it across every retry. */
export class DecisionOutbox {
  private pending: PendingDecision[] = [];

  constructor(private api: ReviewApi,
              private sleep: (ms: number) => Promise<void> =
                  (ms) => new Promise((r) => setTimeout(r, ms)),
              private backoffMs = 250) {}

  get size(): number {
    return this.pending.length;
  }

  enqueue(draft: DecisionDraft): PendingDecision {
    const entry: PendingDecision = { key: makeKey(), draft, attempts: 0 };
    this.pending.push(entry);
    return entry;
  }

  /** Retry a single entry until it is acknowledged or the attempt budget
   * of this call runs out.  4xx responses are permanent: the entry is
   * dropped and the error rethrown (a 409 means the key was reused with a
   * different body, which is a bug guard).  Network and 5xx failures leave
   * the entry queued so a later flush can retry it with the same key. */
  async submit(entry: PendingDecision, maxAttempts = 3): Promise<SubmitResult> {
    let lastError: unknown = null;
    entry.attempts = 0;
    while (entry.attempts < maxAttempts) {
      entry.attempts += 1;
      try {
        const record = await this.api.postDecision(entry.draft, entry.key);
        this.drop(entry);
        return { record, attempts: entry.attempts };
      } catch (err) {
        lastError = err;
        if (err instanceof ApiError && err.status < 500) {
          this.drop(entry);
          throw err;
        }
        if (entry.attempts < maxAttempts) {
          await this.sleep(this.backoffMs * entry.attempts);
        }
      }
    }
    throw lastError;  // stays queued for a later flush
  }

  /** Re-submit everything still pending, oldest first. */
  async flush(maxAttempts = 3): Promise<SubmitResult[]> {
    const results: SubmitResult[] = [];
    for (const entry of [...this.pending]) {
      results.push(await this.submit(entry, maxAttempts));
    }
    return results;
  }

  private drop(entry: PendingDecision): void {
    this.pending = this.pending.filter((p) => p !== entry);
  }
}
