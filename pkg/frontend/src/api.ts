import type {
  ApiErrorBody,
  BacklogDoc,
  CreatedDoc,
  GridDoc,
  PromotionDoc,
  StatusDoc,
  VerifyDoc,
} from "./types.js";

/** Domain error from the service, surfaced verbatim (code + message). */
export class ApiError extends Error {
  constructor(
    readonly code: string,
    message: string,
    readonly ids: string[],
    readonly status: number,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface PromotionRequest {
  observation?: string;
  observation_payload?: Record<string, unknown>;
  outcome: string;
  confidence?: number;
}

export class Client {
  private readonly fetchFn: FetchLike;

  constructor(
    readonly base: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      let payload: ApiErrorBody | null = null;
      try {
        payload = (await response.json()) as ApiErrorBody;
      } catch {
        payload = null;
      }
      throw new ApiError(
        payload?.code ?? `HTTP${response.status}`,
        payload?.message ?? response.statusText,
        payload?.ids ?? [],
        response.status,
      );
    }
    return (await response.json()) as T;
  }

  getGrid(): Promise<GridDoc> {
    return this.request("GET", "/grid");
  }

  getStatus(hypothesis: string): Promise<StatusDoc> {
    return this.request("GET", `/hypotheses/${hypothesis}/status`);
  }

  getBacklog(): Promise<BacklogDoc> {
    return this.request("GET", "/backlog");
  }

  verify(): Promise<VerifyDoc> {
    return this.request("GET", "/verify");
  }

  createContainer(
    kind: string,
    payload: Record<string, unknown>,
    periodTag?: string,
    labels?: string[],
  ): Promise<CreatedDoc> {
    const body: Record<string, unknown> = { kind, payload };
    if (periodTag) body["period_tag"] = periodTag;
    if (labels && labels.length > 0) body["labels"] = labels;
    return this.request("POST", "/containers", body);
  }

  link(source: string, target: string, kind: string): Promise<unknown> {
    return this.request("POST", "/associations", { source, target, kind });
  }

  setWinner(test: string, hypothesis: string): Promise<unknown> {
    return this.request("POST", `/tests/${test}/winner`, { hypothesis });
  }

  promote(test: string, promotion: PromotionRequest): Promise<PromotionDoc> {
    return this.request("POST", `/tests/${test}/observation`, promotion);
  }
}
