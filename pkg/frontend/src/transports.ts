/** Transports for the line-delimited protocol.
 *
 * StdioTransport drives a locally spawned service process and is what
 * the tests use.  SocketTransport wraps anything with a WebSocket-like
 * surface (send/onmessage/close) for browser deployments; host and
 * port come from the page URL.
 */

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import type { Transport } from "./protocol.js";

type Resolver = {
  resolve: (line: string) => void;
  reject: (err: Error) => void;
};

export class StdioTransport implements Transport {
  private proc: ChildProcessWithoutNullStreams;
  private pending: Resolver[] = [];
  private buffer = "";

  constructor(command: string, args: string[]) {
    this.proc = spawn(command, args, { stdio: ["pipe", "pipe", "pipe"] });
    this.proc.stdout.setEncoding("utf-8");
    this.proc.stdout.on("data", (chunk: string) => this.onData(chunk));
    this.proc.on("exit", () => {
      for (const waiter of this.pending.splice(0)) {
        waiter.reject(new Error("service process exited"));
      }
    });
  }

  private onData(chunk: string): void {
    this.buffer += chunk;
    let nl = this.buffer.indexOf("\n");
    while (nl >= 0) {
      const line = this.buffer.slice(0, nl);
      this.buffer = this.buffer.slice(nl + 1);
      const waiter = this.pending.shift();
      if (waiter) {
        waiter.resolve(line);
      }
      nl = this.buffer.indexOf("\n");
    }
  }

  send(line: string): Promise<string> {
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.proc.stdin.write(line + "\n");
    });
  }

  close(): void {
    this.proc.stdin.end();
    this.proc.kill();
  }
}

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onmessage: ((event: { data: string }) => void) | null;
}

export class SocketTransport implements Transport {
  private socket: SocketLike;
  private pending: Resolver[] = [];

  constructor(socket: SocketLike) {
    this.socket = socket;
    this.socket.onmessage = (event) => {
      const waiter = this.pending.shift();
      if (waiter) {
        waiter.resolve(event.data.replace(/\n$/, ""));
      }
    };
  }

  send(line: string): Promise<string> {
    return new Promise((resolve, reject) => {
      this.pending.push({ resolve, reject });
      this.socket.send(line + "\n");
    });
  }

  close(): void {
    this.socket.close();
  }
}

/** host/port for SocketTransport taken from the page URL query. */
export function serviceAddress(
  query: string,
  defaults = { host: "127.0.0.1", port: 9321 },
): { host: string; port: number } {
  const params = new URLSearchParams(query);
  const host = params.get("host") ?? defaults.host;
  const port = Number(params.get("port") ?? defaults.port);
  return { host, port: Number.isFinite(port) ? port : defaults.port };
}
