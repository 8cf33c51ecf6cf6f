// Minimal SSE client over fetch streaming. EventSource cannot send an
// Authorization header, so the alert stream is consumed by hand; this
// also makes the client testable under plain node.

export interface SseEvent {
  event: string;
  data: string;
}

// Incremental parser: feed chunks, get completed events. Comment lines
// (heartbeats) are dropped.
export class SseParser {
  private buffer = "";

  feed(chunk: string): SseEvent[] {
    this.buffer += chunk.replace(/\r\n/g, "\n");
    const events: SseEvent[] = [];
    let idx: number;
    while ((idx = this.buffer.indexOf("\n\n")) >= 0) {
      const frame = this.buffer.slice(0, idx);
      this.buffer = this.buffer.slice(idx + 2);
      let event = "message";
      const dataLines: string[] = [];
      for (const line of frame.split("\n")) {
        if (line.startsWith(":") || line === "") continue;
        if (line.startsWith("event:")) event = line.slice(6).trim();
        else if (line.startsWith("data:")) dataLines.push(line.slice(5).trim());
      }
      if (dataLines.length > 0) events.push({ event, data: dataLines.join("\n") });
    }
    return events;
  }
}

export interface SubscribeOptions {
  baseUrl: string;
  token: string;
  onEvent: (event: SseEvent) => void;
  onStatus?: (status: "connected" | "reconnecting") => void;
  fetchFn?: typeof fetch;
  // backoff schedule in ms between reconnect attempts
  backoffMs?: number[];
  sleep?: (ms: number) => Promise<void>;
}

export interface Subscription {
  close(): void;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

// Subscribe to the alert stream; reconnects with backoff whenever the
// stream drops, until close() is called.
export function subscribeAlerts(options: SubscribeOptions): Subscription {
  const fetchFn = options.fetchFn ?? fetch;
  const backoff = options.backoffMs ?? [500, 1000, 2000, 5000, 10000];
  const sleep = options.sleep ?? defaultSleep;
  const controller = { closed: false, abort: null as AbortController | null };

  const loop = async () => {
    let attempt = 0;
    while (!controller.closed) {
      try {
        const abort = new AbortController();
        controller.abort = abort;
        const resp = await fetchFn(options.baseUrl + "/api/alerts/stream", {
          headers: { Authorization: `Bearer ${options.token}` },
          signal: abort.signal,
        });
        if (!resp.ok || !resp.body) throw new Error(`stream failed: ${resp.status}`);
        options.onStatus?.("connected");
        attempt = 0;
        const parser = new SseParser();
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          for (const event of parser.feed(decoder.decode(value, { stream: true }))) {
            options.onEvent(event);
          }
        }
      } catch {
        // fall through to reconnect
      }
      if (controller.closed) return;
      options.onStatus?.("reconnecting");
      await sleep(backoff[Math.min(attempt, backoff.length - 1)]);
      attempt += 1;
    }
  };

  void loop();
  return {
    close() {
      controller.closed = true;
      controller.abort?.abort();
    },
  };
}
