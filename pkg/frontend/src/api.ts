/**
 * Typed client for the session service. Non-ok responses reject with
 * HttpError carrying the service's {code, message, detail} body. The
 * condition endpoint streams NDJSON and is surfaced as an async
 * iterable of parsed lines, one per prompt label.
 */

import type {
  ConditionLine,
  ApiErrorBody,
  MatrixPayload,
  Meta,
  PmiPayload,
  SelectionResponse,
  SelectionState,
  ViolinPayload,
} from "./types.js";

export interface Api {
  meta(): Promise<Meta>;
  violin(label: string, subset?: number): Promise<ViolinPayload>;
  matrix(promptLabel: string, discoveredLabel: string): Promise<MatrixPayload>;
  selectionState(): Promise<SelectionState>;
  setSelection(sceneIds: number[]): Promise<SelectionResponse>;
  pmi(label: string, scene: number): Promise<PmiPayload>;
  condition(label: string, scene: number): AsyncIterable<ConditionLine>;
}

export class HttpError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message || `HTTP ${status}`);
    this.name = "HttpError";
    this.status = status;
    this.body = body;
  }
}

type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

async function toHttpError(res: Response): Promise<HttpError> {
  let body: ApiErrorBody;
  try {
    body = (await res.json()) as ApiErrorBody;
  } catch {
    body = {
      code: `HTTP_${res.status}`,
      message: res.statusText || `HTTP ${res.status}`,
      detail: null,
    };
  }
  return new HttpError(res.status, body);
}

/** The reader-bearing part of ReadableStream; tests feed fakes. */
export interface ByteSource {
  getReader(): { read(): Promise<{ done: boolean; value?: Uint8Array }> };
}

/** Parses an NDJSON byte stream into objects, tolerating chunk
 * boundaries that fall mid-line and a final line without newline. */
export async function* readNdjson<T>(body: ByteSource): AsyncGenerator<T> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  for (;;) {
    const { done, value } = await reader.read();
    buffer += decoder.decode(value ?? new Uint8Array(0), { stream: !done });
    let nl: number;
    while ((nl = buffer.indexOf("\n")) >= 0) {
      const line = buffer.slice(0, nl).trim();
      buffer = buffer.slice(nl + 1);
      if (line) yield JSON.parse(line) as T;
    }
    if (done) break;
  }
  const tail = buffer.trim();
  if (tail) yield JSON.parse(tail) as T;
}

export class HttpApi implements Api {
  private readonly base: string;
  private readonly fetchFn: FetchFn;

  constructor(base = "", fetchFn?: FetchFn) {
    this.base = base.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchFn(this.base + path, init);
    if (!res.ok) throw await toHttpError(res);
    return (await res.json()) as T;
  }

  meta(): Promise<Meta> {
    return this.request<Meta>("/api/meta");
  }

  violin(label: string, subset?: number): Promise<ViolinPayload> {
    const query = subset === undefined ? "" : `?subset=${subset}`;
    return this.request<ViolinPayload>(
      `/api/object/${encodeURIComponent(label)}/violin${query}`,
    );
  }

  matrix(promptLabel: string, discoveredLabel: string): Promise<MatrixPayload> {
    return this.request<MatrixPayload>(
      `/api/matrix/${encodeURIComponent(promptLabel)}/${encodeURIComponent(discoveredLabel)}`,
    );
  }

  selectionState(): Promise<SelectionState> {
    return this.request<SelectionState>("/api/selection");
  }

  setSelection(sceneIds: number[]): Promise<SelectionResponse> {
    return this.request<SelectionResponse>("/api/selection", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ scene_ids: sceneIds }),
    });
  }

  pmi(label: string, scene: number): Promise<PmiPayload> {
    return this.request<PmiPayload>(
      `/api/pmi?label=${encodeURIComponent(label)}&scene=${scene}`,
    );
  }

  async *condition(label: string, scene: number): AsyncIterable<ConditionLine> {
    const res = await this.fetchFn(this.base + "/api/condition", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ label, scene }),
    });
    if (!res.ok) throw await toHttpError(res);
    if (!res.body) throw new Error("condition response has no body");
    yield* readNdjson<ConditionLine>(res.body);
  }
}
