import { describe, expect, it } from "vitest";

import { HttpApi, HttpError, readNdjson } from "../src/api.js";
import type { ByteSource } from "../src/api.js";
import { fixtures } from "./fixtures.js";

function byteSource(chunks: string[]): ByteSource {
  const encoder = new TextEncoder();
  let i = 0;
  return {
    getReader: () => ({
      read: () =>
        Promise.resolve(
          i < chunks.length
            ? { done: false, value: encoder.encode(chunks[i++]) }
            : { done: true as const },
        ),
    }),
  };
}

function response(status: number, body: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    statusText: "",
    json: () => Promise.resolve(body),
  } as unknown as Response;
}

describe("readNdjson", () => {
  it("parses lines across arbitrary chunk boundaries", async () => {
    const src = byteSource(['{"a', '": 1}\n{"b": 2}', "\n\n", '{"c": 3}']);
    const out: Record<string, number>[] = [];
    for await (const obj of readNdjson<Record<string, number>>(src)) out.push(obj);
    expect(out).toEqual([{ a: 1 }, { b: 2 }, { c: 3 }]);
  });

  it("replays the captured condition stream exactly", async () => {
    const text = fixtures.condition.ndjson;
    const chunks: string[] = [];
    for (let i = 0; i < text.length; i += 7) chunks.push(text.slice(i, i + 7));
    const out: unknown[] = [];
    for await (const line of readNdjson(byteSource(chunks))) out.push(line);
    expect(out).toEqual(fixtures.condition.lines);
  });
});

describe("HttpApi", () => {
  it("builds paths, encodes labels, and trims the base url", async () => {
    const calls: string[] = [];
    const api = new HttpApi("http://backend:9000/", (input) => {
      calls.push(input);
      return Promise.resolve(response(200, {}));
    });
    await api.meta();
    await api.violin("teddy bear");
    await api.violin("teddy bear", 3);
    await api.matrix("couch", "teddy bear");
    await api.pmi("teddy bear", 8);
    expect(calls).toEqual([
      "http://backend:9000/api/meta",
      "http://backend:9000/api/object/teddy%20bear/violin",
      "http://backend:9000/api/object/teddy%20bear/violin?subset=3",
      "http://backend:9000/api/matrix/couch/teddy%20bear",
      "http://backend:9000/api/pmi?label=teddy%20bear&scene=8",
    ]);
  });

  it("posts selections as {scene_ids}", async () => {
    let init: RequestInit | undefined;
    const api = new HttpApi("", (_input, requestInit) => {
      init = requestInit;
      return Promise.resolve(response(200, fixtures.selections.empty));
    });
    await api.setSelection([3, 1]);
    expect(init?.method).toBe("POST");
    expect(JSON.parse(String(init?.body))).toEqual({ scene_ids: [3, 1] });
  });

  it("rejects non-ok responses with the service error body", async () => {
    const body = {
      code: "UNKNOWN_LABEL",
      message: "unknown object label: ghost",
      detail: null,
    };
    const api = new HttpApi("", () => Promise.resolve(response(404, body)));
    const err = await api.meta().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(HttpError);
    expect((err as HttpError).status).toBe(404);
    expect((err as HttpError).body).toEqual(body);
    expect((err as HttpError).message).toBe("unknown object label: ghost");
  });

  it("synthesizes an error body when the payload is not JSON", async () => {
    const api = new HttpApi("", () =>
      Promise.resolve({
        ok: false,
        status: 502,
        statusText: "Bad Gateway",
        json: () => Promise.reject(new Error("not json")),
      } as unknown as Response),
    );
    const err = await api.meta().catch((e: unknown) => e);
    expect((err as HttpError).body).toEqual({
      code: "HTTP_502",
      message: "Bad Gateway",
      detail: null,
    });
  });

  it("streams the condition endpoint as parsed NDJSON lines", async () => {
    const api = new HttpApi("", (input, init) => {
      expect(input).toBe("/api/condition");
      expect(JSON.parse(String(init?.body))).toEqual({
        label: fixtures.condition.label,
        scene: fixtures.condition.scene,
      });
      return Promise.resolve({
        ok: true,
        status: 200,
        body: byteSource([fixtures.condition.ndjson]),
      } as unknown as Response);
    });
    const out: unknown[] = [];
    for await (const line of api.condition(fixtures.condition.label, fixtures.condition.scene)) {
      out.push(line);
    }
    expect(out).toEqual(fixtures.condition.lines);
  });
});
