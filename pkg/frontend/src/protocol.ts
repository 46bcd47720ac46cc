// Frame codec and request/response client for the hbt/1 session protocol.
// A frame is the UTF-8 payload's byte length in ASCII decimal, '\n', payload.

import type { KernelErrorPayload } from "./types.js";

export interface Transport {
  write(data: Uint8Array): void;
  onData(handler: (chunk: Uint8Array) => void): void;
  close(): void;
}

const encoder = new TextEncoder();
const decoder = new TextDecoder();

export function encodeFrame(payload: unknown): Uint8Array {
  const body = encoder.encode(JSON.stringify(payload));
  const header = encoder.encode(`${body.byteLength}\n`);
  const frame = new Uint8Array(header.byteLength + body.byteLength);
  frame.set(header, 0);
  frame.set(body, header.byteLength);
  return frame;
}

/** Incremental parser: feed chunks, collect whole JSON payloads. */
export class FrameParser {
  private buffer = new Uint8Array(0);

  push(chunk: Uint8Array): unknown[] {
    const joined = new Uint8Array(this.buffer.byteLength + chunk.byteLength);
    joined.set(this.buffer, 0);
    joined.set(chunk, this.buffer.byteLength);
    this.buffer = joined;
    const frames: unknown[] = [];
    for (;;) {
      const newline = this.buffer.indexOf(0x0a);
      if (newline < 0) break;
      const header = decoder.decode(this.buffer.subarray(0, newline));
      if (!/^[0-9]+$/.test(header)) {
        throw new Error(`malformed frame header: ${JSON.stringify(header)}`);
      }
      const length = Number(header);
      const end = newline + 1 + length;
      if (this.buffer.byteLength < end) break;
      const body = decoder.decode(this.buffer.subarray(newline + 1, end));
      this.buffer = this.buffer.subarray(end);
      frames.push(JSON.parse(body));
    }
    return frames;
  }
}

export class KernelError extends Error {
  constructor(
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "KernelError";
  }
}

interface Pending {
  resolve: (payload: Record<string, unknown>) => void;
  reject: (error: Error) => void;
}

/** Sends requests and matches responses by id; one in-flight map per session. */
export class KernelClient {
  private nextId = 1;
  private pending = new Map<number, Pending>();
  private parser = new FrameParser();
  /** Total mutating/reading requests sent; tests assert on this. */
  requestCount = 0;

  constructor(private transport: Transport) {
    transport.onData((chunk) => this.receive(chunk));
  }

  private receive(chunk: Uint8Array): void {
    for (const frame of this.parser.push(chunk)) {
      const response = frame as Record<string, unknown>;
      const id = response["id"];
      if (typeof id !== "number") continue;
      const pending = this.pending.get(id);
      if (!pending) continue;
      this.pending.delete(id);
      if (response["ok"] === true) {
        pending.resolve(response);
      } else {
        const error = (response["error"] ?? {}) as KernelErrorPayload;
        pending.reject(
          new KernelError(error.code ?? "unknown", error.message ?? "kernel error"),
        );
      }
    }
  }

  request(
    op: string,
    args: Record<string, unknown> = {},
  ): Promise<Record<string, unknown>> {
    const id = this.nextId++;
    this.requestCount++;
    const frame = encodeFrame({ id, op, ...args });
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.transport.write(frame);
    });
  }

  close(): void {
    this.transport.close();
  }
}

/** Browser transport: a WebSocket bridge carrying one frame per message. */
export class WebSocketTransport implements Transport {
  private handlers: Array<(chunk: Uint8Array) => void> = [];

  constructor(private socket: WebSocket) {
    socket.binaryType = "arraybuffer";
    socket.onmessage = (event: MessageEvent) => {
      const data = new Uint8Array(event.data as ArrayBuffer);
      for (const handler of this.handlers) handler(data);
    };
  }

  write(data: Uint8Array): void {
    this.socket.send(data);
  }

  onData(handler: (chunk: Uint8Array) => void): void {
    this.handlers.push(handler);
  }

  close(): void {
    this.socket.close();
  }
}
