import { Label, SegmentCard, SessionInfo } from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchFn = typeof fetch;

/**
 * Thin client for the annotation server. The fetch function is injectable
 * so tests can run without a server (and without a browser).
 */
export class ApiClient {
  private fetchFn: FetchFn;

  constructor(fetchFn?: FetchFn) {
    this.fetchFn = fetchFn ?? fetch.bind(globalThis);
  }

  private async getJson<T>(url: string): Promise<T> {
    const res = await this.fetchFn(url);
    if (!res.ok) {
      throw new ApiError(`GET ${url} failed with ${res.status}`, res.status);
    }
    return (await res.json()) as T;
  }

  session(): Promise<SessionInfo> {
    return this.getJson<SessionInfo>("/api/session");
  }

  segments(raterId: string | null): Promise<SegmentCard[]> {
    const url = raterId
      ? `/api/segments?rater_id=${encodeURIComponent(raterId)}`
      : "/api/segments";
    return this.getJson<SegmentCard[]>(url);
  }

  /** Resolves only on the server's 204 acknowledgment. */
  async submitLabel(segmentFile: string, raterId: string, label: Label): Promise<void> {
    const res = await this.fetchFn("/api/labels", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ segment_file: segmentFile, rater_id: raterId, label }),
    });
    if (res.status === 204) return;
    let detail = `status ${res.status}`;
    try {
      const body = (await res.json()) as { error?: string };
      if (body && body.error) detail = body.error;
    } catch {
      // keep the status text
    }
    throw new ApiError(`label rejected: ${detail}`, res.status);
  }

  audioUrl(segmentFile: string): string {
    return `/api/audio/${encodeURIComponent(segmentFile)}`;
  }

  exportUrl(): string {
    return "/api/export.csv";
  }
}
