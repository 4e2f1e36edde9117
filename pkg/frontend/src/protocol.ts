/** Line-delimited JSON client for the editor service.
 *
 * Each request gets a fresh id; at most one request is in flight at a
 * time and later calls queue behind it, so responses can never be
 * attributed to the wrong request.
 */

import type { WireGeometry } from "./geometry.js";

export interface Transport {
  /** Send one JSON line and resolve with the matching response line. */
  send(line: string): Promise<string>;
  close(): void;
}

export interface ErrorInfo {
  kind: string;
  message: string;
}

export interface Response {
  id: number | null;
  status: "OK" | "ERR";
  payload?: Record<string, unknown>;
  error?: ErrorInfo;
}

export interface DocOpened {
  doc: number;
  root: number;
  geometry: WireGeometry;
}

export interface RoundtripDifference {
  category: string;
  span_original: [number, number];
  span_canonical: [number, number];
}

export interface RoundtripReport {
  identical: boolean;
  canonical: string;
  differences: RoundtripDifference[];
}

export interface AliasMatch {
  kind: "UNIQUE" | "AMBIGUOUS" | "NONE";
  expansion?: string;
  candidates?: string[];
}

export interface LayoutRequest {
  doc: number;
  mode?: string;
  hspace?: number;
  vspace?: number;
}

export class ServiceError extends Error {
  readonly kind: string;

  constructor(info: ErrorInfo) {
    super(info.message);
    this.kind = info.kind;
  }
}

export class Client {
  private transport: Transport;
  private nextId = 1;
  private chain: Promise<unknown> = Promise.resolve();

  constructor(transport: Transport) {
    this.transport = transport;
  }

  /** Serialized request pipeline; rejects with ServiceError on ERR. */
  request(
    op: string,
    args: Record<string, unknown> = {},
  ): Promise<Record<string, unknown>> {
    const run = async (): Promise<Record<string, unknown>> => {
      const id = this.nextId++;
      const line = JSON.stringify({ id, op, args });
      const raw = await this.transport.send(line);
      const resp = JSON.parse(raw) as Response;
      if (resp.status !== "OK") {
        throw new ServiceError(
          resp.error ?? { kind: "PROTOCOL", message: "malformed response" },
        );
      }
      return resp.payload ?? {};
    };
    const next = this.chain.then(run, run);
    this.chain = next.catch(() => undefined);
    return next;
  }

  async newProgram(): Promise<DocOpened> {
    return (await this.request("new_program")) as unknown as DocOpened;
  }

  async listCompletions(doc: number, node: number): Promise<string[]> {
    const p = await this.request("list_completions", { doc, node });
    return p.items as string[];
  }

  async expand(doc: number, node: number, choice: string): Promise<number> {
    const p = await this.request("expand", { doc, node, choice });
    return p.node as number;
  }

  async setTerminal(doc: number, node: number, text: string): Promise<void> {
    await this.request("set_terminal", { doc, node, text });
  }

  async copy(doc: number, node: number): Promise<string> {
    const p = await this.request("copy", { doc, node });
    return p.root_type as string;
  }

  async cut(doc: number, node: number): Promise<number> {
    const p = await this.request("cut", { doc, node });
    return p.node as number;
  }

  async paste(doc: number, node: number): Promise<number> {
    const p = await this.request("paste", { doc, node });
    return p.node as number;
  }

  async replace(doc: number, node: number): Promise<number> {
    const p = await this.request("replace", { doc, node });
    return p.node as number;
  }

  async collapse(doc: number, node: number): Promise<number> {
    const p = await this.request("collapse", { doc, node });
    return p.node as number;
  }

  async setDisplay(doc: number, node: number, state: string): Promise<void> {
    await this.request("set_display", { doc, node, state });
  }

  async attachComment(
    doc: number,
    node: number,
    position: string,
    text: string,
  ): Promise<void> {
    await this.request("attach_comment", { doc, node, position, text });
  }

  async layout(req: LayoutRequest): Promise<WireGeometry> {
    const { doc, ...rest } = req;
    const args: Record<string, unknown> = { doc };
    for (const [k, v] of Object.entries(rest)) {
      if (v !== undefined) {
        args[k] = v;
      }
    }
    return (await this.request("layout", args)) as unknown as WireGeometry;
  }

  async pretty(doc: number): Promise<string> {
    const p = await this.request("pretty", { doc });
    return p.text as string;
  }

  async serialize(doc: number): Promise<string> {
    const p = await this.request("serialize", { doc });
    return p.text as string;
  }

  async parseSubtree(
    doc: number,
    node: number,
    text: string,
    dryRun = false,
  ): Promise<Record<string, unknown>> {
    return this.request("parse_subtree", {
      doc,
      node,
      text,
      dry_run: dryRun,
    });
  }

  async roundtrip(text: string): Promise<RoundtripReport> {
    return (await this.request("roundtrip", {
      text,
    })) as unknown as RoundtripReport;
  }

  async undo(doc: number): Promise<number> {
    const p = await this.request("undo", { doc });
    return p.depth as number;
  }

  async aliasLearn(word: string): Promise<boolean> {
    const p = await this.request("alias_learn", { word });
    return p.learned as boolean;
  }

  async aliasExpand(prefix: string): Promise<AliasMatch> {
    return (await this.request("alias_expand", {
      prefix,
    })) as unknown as AliasMatch;
  }

  async storeSave(doc: number, name?: string): Promise<string> {
    const args: Record<string, unknown> = { doc };
    if (name !== undefined) {
      args.name = name;
    }
    const p = await this.request("store_save", args);
    return p.name as string;
  }

  async storeLoad(name: string): Promise<DocOpened> {
    return (await this.request("store_load", {
      name,
    })) as unknown as DocOpened;
  }

  async storeList(): Promise<string[]> {
    const p = await this.request("store_list");
    return p.names as string[];
  }

  async defaultName(): Promise<string> {
    const p = await this.request("default_name");
    return p.name as string;
  }

  async shutdown(): Promise<void> {
    await this.request("shutdown");
  }

  close(): void {
    this.transport.close();
  }
}
