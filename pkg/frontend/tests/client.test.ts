import { describe, expect, it } from "vitest";
import { Client, ServiceError, type Transport } from "../src/protocol.js";

/** Transport that records requests and answers from a script. */
class ScriptedTransport implements Transport {
  sent: Array<{ id: number; op: string; args: Record<string, unknown> }> = [];
  private responses: Array<(id: number) => Record<string, unknown>>;
  delayMs = 0;
  inFlight = 0;
  maxInFlight = 0;

  constructor(responses: Array<(id: number) => Record<string, unknown>>) {
    this.responses = responses;
  }

  async send(line: string): Promise<string> {
    const req = JSON.parse(line);
    this.sent.push(req);
    this.inFlight += 1;
    this.maxInFlight = Math.max(this.maxInFlight, this.inFlight);
    if (this.delayMs > 0) {
      await new Promise((r) => setTimeout(r, this.delayMs));
    }
    this.inFlight -= 1;
    const make = this.responses.shift();
    if (!make) {
      throw new Error("script exhausted");
    }
    return JSON.stringify(make(req.id));
  }

  close(): void {}
}

const okEmpty = (id: number) => ({ id, status: "OK", payload: {} });

describe("Client", () => {
  it("assigns increasing request ids", async () => {
    const transport = new ScriptedTransport([okEmpty, okEmpty, okEmpty]);
    const client = new Client(transport);
    await client.request("pretty", { doc: 1 });
    await client.request("pretty", { doc: 1 });
    await client.request("pretty", { doc: 1 });
    expect(transport.sent.map((r) => r.id)).toEqual([1, 2, 3]);
  });

  it("keeps at most one request in flight", async () => {
    const transport = new ScriptedTransport([okEmpty, okEmpty, okEmpty]);
    transport.delayMs = 5;
    const client = new Client(transport);
    await Promise.all([
      client.request("serialize", { doc: 1 }),
      client.request("serialize", { doc: 1 }),
      client.request("serialize", { doc: 1 }),
    ]);
    expect(transport.maxInFlight).toBe(1);
  });

  it("rejects with ServiceError carrying the kind on ERR", async () => {
    const transport = new ScriptedTransport([
      (id) => ({
        id,
        status: "ERR",
        error: { kind: "TYPE_MISMATCH", message: "no" },
      }),
    ]);
    const client = new Client(transport);
    await expect(client.paste(1, 2)).rejects.toMatchObject({
      kind: "TYPE_MISMATCH",
    });
  });

  it("keeps serving requests after an error", async () => {
    const transport = new ScriptedTransport([
      (id) => ({
        id,
        status: "ERR",
        error: { kind: "PROTOCOL", message: "bad" },
      }),
      (id) => ({ id, status: "OK", payload: { text: "x" } }),
    ]);
    const client = new Client(transport);
    await expect(client.request("nope")).rejects.toBeInstanceOf(ServiceError);
    expect(await client.pretty(1)).toBe("x");
  });

  it("unwraps typed payloads", async () => {
    const transport = new ScriptedTransport([
      (id) => ({
        id,
        status: "OK",
        payload: { items: ["literal", "variable"] },
      }),
      (id) => ({
        id,
        status: "OK",
        payload: { kind: "AMBIGUOUS", candidates: ["a", "b"] },
      }),
    ]);
    const client = new Client(transport);
    expect(await client.listCompletions(1, 2)).toEqual([
      "literal",
      "variable",
    ]);
    const match = await client.aliasExpand("Cre");
    expect(match.kind).toBe("AMBIGUOUS");
    expect(match.candidates).toEqual(["a", "b"]);
  });
});
