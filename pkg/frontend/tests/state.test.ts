import { describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { ChatStore, ToastStore } from "../src/state.js";
import type { Turn } from "../src/types.js";

// A stub API good enough for ChatStore: history reflects exactly what chat
// persisted, mirroring the server's pair-wise persistence contract.
function chatApi(options: { fail?: boolean } = {}) {
  const persisted: Turn[] = [];
  const fetchFn = (async (url: unknown, init?: RequestInit) => {
    const path = String(url);
    if (path.includes("/history")) {
      return new Response(JSON.stringify({ plant_id: "p1", turns: persisted }), { status: 200 });
    }
    if (path.includes("/chat")) {
      if (options.fail) {
        return new Response(
          JSON.stringify({ code: "llm_unavailable", message: "down" }),
          { status: 503 },
        );
      }
      const message = (JSON.parse(String(init?.body)) as { message: string }).message;
      const ts = 1000 + persisted.length;
      persisted.push({ role: "user", text: message, ts });
      persisted.push({ role: "plant", text: `re: ${message}`, ts });
      return new Response(
        JSON.stringify({
          reply: `re: ${message}`,
          mood: { label: "Thriving", comfort: 100, factors: {}, as_of: ts },
          snapshot_ts: ts,
        }),
        { status: 200 },
      );
    }
    throw new Error(`unexpected ${path}`);
  }) as typeof fetch;
  const api = new ApiClient("", fetchFn);
  api.setToken("t");
  return { api, persisted };
}

describe("ChatStore", () => {
  it("appends optimistically and confirms on reply", async () => {
    const { api } = chatApi();
    const store = new ChatStore(api, "p1");

    const sendPromise = store.send("hello");
    expect(store.view().at(-1)).toMatchObject({ text: "hello", pending: true });

    await sendPromise;
    expect(store.pending).toBeNull();
    expect(store.turns.map((t) => t.role)).toEqual(["user", "plant"]);
    expect(store.turns[1].text).toBe("re: hello");
  });

  it("local transcript equals server history after the reply", async () => {
    const { api } = chatApi();
    const store = new ChatStore(api, "p1");
    await store.send("one");
    await store.send("two");
    expect(await store.reconcile()).toBe(true);
    expect(store.turns).toHaveLength(4);
  });

  it("a 503 keeps the text for retry without duplicating the turn", async () => {
    const failing = chatApi({ fail: true });
    const store = new ChatStore(failing.api, "p1");
    await expect(store.send("thirsty?")).rejects.toMatchObject({ status: 503 });

    expect(store.turns).toHaveLength(0); // nothing confirmed
    expect(store.pending).toEqual({ text: "thirsty?", failed: true });
    const rows = store.view();
    expect(rows).toHaveLength(1); // the failed bubble, exactly once
    expect(rows[0]).toMatchObject({ text: "thirsty?", failed: true });

    // server recovers; retry sends the same text once
    const ok = chatApi();
    const store2 = new ChatStore(ok.api, "p1");
    store2.pending = { text: "thirsty?", failed: true };
    await store2.retry();
    expect(store2.turns.map((t) => t.text)).toEqual(["thirsty?", "re: thirsty?"]);
    expect(ok.persisted).toHaveLength(2);
  });

  it("ignores empty sends and double submits", async () => {
    const { api, persisted } = chatApi();
    const store = new ChatStore(api, "p1");
    expect(await store.send("")).toBeNull();
    const first = store.send("msg");
    expect(await store.send("msg-2")).toBeNull(); // one in flight already
    await first;
    expect(persisted).toHaveLength(2);
  });
});

describe("ToastStore", () => {
  const alert = {
    plant_id: "p1",
    from_label: "Thriving",
    to_label: "Thirsty",
    at: 1,
    message: "Ivy now feels Thirsty (was Thriving).",
  };

  it("pushes one toast per alert and dismisses by id", () => {
    const store = new ToastStore();
    let notified = 0;
    store.subscribe(() => notified++);
    const toast = store.push(alert);
    expect(store.toasts).toHaveLength(1);
    store.dismiss(toast.id);
    expect(store.toasts).toHaveLength(0);
    expect(notified).toBe(2);
  });
});
