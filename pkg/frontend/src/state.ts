// UI state stores, kept free of DOM so the logic runs headless in tests.

import type { ApiClient } from "./api.js";
import type { ChatReply, MoodAlert, Turn } from "./types.js";

export interface PendingMessage {
  text: string;
  failed: boolean;
}

type Listener = () => void;

class Emitter {
  private listeners = new Set<Listener>();

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  protected emit(): void {
    for (const fn of this.listeners) fn();
  }
}

// Chat transcript with one optimistic in-flight user turn. The confirmed
// transcript only ever contains what the server persisted, so after a
// reply lands it matches GET history exactly; a failed send keeps the
// text around for retry without duplicating the user turn.
export class ChatStore extends Emitter {
  turns: Turn[] = [];
  pending: PendingMessage | null = null;
  lastMood: string | null = null;

  constructor(
    private api: ApiClient,
    private plantId: string,
  ) {
    super();
  }

  async load(): Promise<void> {
    const body = await this.api.history(this.plantId);
    this.turns = body.turns;
    this.emit();
  }

  async send(text: string): Promise<ChatReply | null> {
    if (!text || this.pending && !this.pending.failed) return null;
    this.pending = { text, failed: false };
    this.emit();
    try {
      const reply = await this.api.chat(this.plantId, text);
      // confirmed turns always come from the server, so the transcript
      // matches GET history exactly once the reply lands
      const body = await this.api.history(this.plantId);
      this.turns = body.turns;
      this.pending = null;
      this.lastMood = reply.mood.label;
      this.emit();
      return reply;
    } catch (err) {
      this.pending = { text, failed: true };
      this.emit();
      throw err;
    }
  }

  async retry(): Promise<ChatReply | null> {
    if (!this.pending?.failed) return null;
    const text = this.pending.text;
    this.pending = null;
    return this.send(text);
  }

  // Transcript rows the panel renders: confirmed turns plus the
  // optimistic pending user bubble.
  view(): Array<Turn | { role: "user"; text: string; pending: true; failed: boolean }> {
    const rows: Array<Turn | { role: "user"; text: string; pending: true; failed: boolean }> =
      [...this.turns];
    if (this.pending) {
      rows.push({ role: "user", text: this.pending.text, pending: true, failed: this.pending.failed });
    }
    return rows;
  }

  async reconcile(): Promise<boolean> {
    const body = await this.api.history(this.plantId);
    const same = JSON.stringify(body.turns) === JSON.stringify(this.turns);
    this.turns = body.turns;
    this.emit();
    return same;
  }
}

export interface Toast {
  id: number;
  alert: MoodAlert;
}

export class ToastStore extends Emitter {
  toasts: Toast[] = [];
  private nextId = 1;

  push(alert: MoodAlert): Toast {
    const toast = { id: this.nextId++, alert };
    this.toasts = [...this.toasts, toast];
    this.emit();
    return toast;
  }

  dismiss(id: number): void {
    this.toasts = this.toasts.filter((t) => t.id !== id);
    this.emit();
  }
}
