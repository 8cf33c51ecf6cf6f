// Browser UI wiring. All data shown here comes straight from the API;
// stores in state.ts hold the logic, this file only renders.

import { ApiClient, ApiError } from "./api.js";
import { chartSvg } from "./chart.js";
import { chartSeries, METRICS, moodColor, tiles } from "./dashboard.js";
import { subscribeAlerts, type Subscription } from "./sse.js";
import { ChatStore, ToastStore } from "./state.js";
import type { MoodAlert, Plant } from "./types.js";

const POLL_INTERVAL_MS = 30_000;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class App {
  private api = new ApiClient("");
  private toasts = new ToastStore();
  private chat: ChatStore | null = null;
  private alertSub: Subscription | null = null;
  private pollTimer: number | null = null;
  private root: HTMLElement;

  constructor(root: HTMLElement) {
    this.root = root;
    this.toasts.subscribe(() => this.renderToasts());
  }

  start(): void {
    this.renderLogin();
  }

  // -- auth ------------------------------------------------------------

  private renderLogin(): void {
    this.root.innerHTML = "";
    const card = el("div", "card login-card");
    card.append(el("h1", "", "planttalk"));
    card.append(el("p", "muted", "Pick a grower name to start talking to your plants."));
    const input = el("input");
    input.placeholder = "grower name";
    const button = el("button", "primary", "Start");
    const error = el("p", "error");
    button.onclick = async () => {
      try {
        await this.api.register(input.value.trim());
        this.openAlertStream();
        await this.renderHome();
      } catch (err) {
        error.textContent =
          err instanceof ApiError && err.status === 409
            ? "That name is taken - pick another."
            : String(err);
      }
    };
    card.append(input, button, error);
    this.root.append(card);
  }

  private openAlertStream(): void {
    const token = this.api.getToken();
    if (!token) return;
    this.alertSub?.close();
    this.alertSub = subscribeAlerts({
      baseUrl: "",
      token,
      onEvent: (event) => {
        if (event.event === "mood_alert") {
          this.toasts.push(JSON.parse(event.data) as MoodAlert);
        }
      },
    });
  }

  // -- plant manager ------------------------------------------------------

  private async renderHome(): Promise<void> {
    this.stopPolling();
    this.root.innerHTML = "";
    const container = el("div", "container");
    const header = el("div", "header");
    header.append(el("h1", "", "planttalk"));
    container.append(header);

    const plants = await this.api.listPlants();
    const list = el("div", "plant-list");
    for (const plant of plants) {
      const row = el("div", "card plant-row");
      row.append(el("strong", "", plant.nickname));
      row.append(el("span", "muted", ` ${plant.species_id}`));
      const open = el("button", "", "Open");
      open.onclick = () => this.renderPlant(plant);
      const remove = el("button", "danger", "Delete");
      remove.onclick = async () => {
        await this.api.deletePlant(plant.plant_id);
        await this.renderHome();
      };
      row.append(open, remove);
      list.append(row);
    }
    container.append(list);

    const form = el("div", "card");
    form.append(el("h2", "", "New plant"));
    const species = el("select");
    for (const s of await this.api.listSpecies()) {
      const opt = el("option", "", s.display_name);
      opt.value = s.species_id;
      species.append(opt);
    }
    const nickname = el("input");
    nickname.placeholder = "nickname";
    const create = el("button", "primary", "Create");
    const keyBox = el("div", "keybox");
    create.onclick = async () => {
      const plant = await this.api.createPlant(species.value, nickname.value.trim());
      const channel = await this.api.createChannel(plant.plant_id);
      // shown exactly once: the server never returns this key again
      keyBox.innerHTML = "";
      keyBox.append(el("p", "", "Device write key (copy it now, it is shown only once):"));
      const code = el("code", "", channel.write_api_key);
      const copy = el("button", "", "Copy");
      copy.onclick = () => void navigator.clipboard.writeText(channel.write_api_key);
      keyBox.append(code, copy);
      await this.renderHome();
      this.root.querySelector(".container")?.append(keyBox);
    };
    form.append(species, nickname, create, keyBox);
    container.append(form);
    this.root.append(container);
  }

  // -- plant view: dashboard + chat ------------------------------------------

  private async renderPlant(plant: Plant): Promise<void> {
    this.chat = new ChatStore(this.api, plant.plant_id);
    this.root.innerHTML = "";
    const container = el("div", "container");

    const header = el("div", "header");
    const back = el("button", "", "< Plants");
    back.onclick = () => void this.renderHome();
    header.append(back, el("h1", "", plant.nickname));
    const moodBadge = el("span", "badge");
    header.append(moodBadge);
    container.append(header);

    const dashCard = el("div", "card dashboard");
    container.append(dashCard);

    const chatCard = el("div", "card chat");
    const transcript = el("div", "transcript");
    const inputRow = el("div", "input-row");
    const input = el("input");
    input.placeholder = "Say something to your plant";
    const send = el("button", "primary", "Send");
    const retry = el("button", "warn hidden", "Retry");
    inputRow.append(input, send, retry);
    chatCard.append(transcript, inputRow);
    container.append(chatCard);
    this.root.append(container);

    const renderChat = () => {
      transcript.innerHTML = "";
      for (const row of this.chat!.view()) {
        const bubble = el("div", `bubble ${row.role}`);
        bubble.textContent = row.text;
        if ("pending" in row && row.pending) {
          bubble.classList.add(row.failed ? "failed" : "sending");
        }
        transcript.append(bubble);
      }
      transcript.scrollTop = transcript.scrollHeight;
      send.disabled = input.value.trim() === "";
      retry.classList.toggle("hidden", !this.chat!.pending?.failed);
    };
    this.chat.subscribe(renderChat);
    input.oninput = () => {
      send.disabled = input.value.trim() === "";
    };

    const doSend = async () => {
      const text = input.value.trim();
      if (!text) return;
      input.value = "";
      try {
        await this.chat!.send(text);
      } catch (err) {
        if (err instanceof ApiError && err.status === 503) {
          this.toastError("The plant is speechless right now - try again.");
        } else {
          this.toastError(String(err));
        }
      }
    };
    send.onclick = () => void doSend();
    input.onkeydown = (e) => {
      if (e.key === "Enter") void doSend();
    };
    retry.onclick = () => void this.chat!.retry().catch(() => undefined);

    const refreshDashboard = async () => {
      const dash = await this.api.dashboard(plant.plant_id);
      moodBadge.textContent = dash.mood.label;
      moodBadge.style.background = moodColor(dash.mood.label);
      dashCard.innerHTML = "";
      const tileRow = el("div", "tiles");
      for (const tile of tiles(dash)) {
        const box = el("div", tile.noData ? "tile nodata" : "tile");
        box.append(el("div", "tile-label", tile.label));
        box.append(
          el(
            "div",
            "tile-value",
            tile.noData || tile.value === null ? "no recent data" : `${tile.value.toFixed(1)}${tile.unit}`,
          ),
        );
        if (tile.lo !== null && tile.hi !== null) {
          box.append(el("div", "tile-band", `ideal ${tile.lo}-${tile.hi}${tile.unit}`));
        }
        tileRow.append(box);
      }
      dashCard.append(tileRow);
      for (const metric of METRICS) {
        const series = chartSeries(dash, metric.key);
        if (series.length === 0) continue;
        const chart = el("div", "chart-box");
        chart.append(el("div", "tile-label", `${metric.label}, last 24 h`));
        const svgWrap = el("div", "chart-svg");
        svgWrap.innerHTML = chartSvg(series, { width: 600, height: 120, padding: 8 }, moodColor(dash.mood.label));
        chart.append(svgWrap);
        dashCard.append(chart);
      }
    };

    await this.chat.load();
    renderChat();
    await refreshDashboard();
    this.pollTimer = window.setInterval(() => void refreshDashboard(), POLL_INTERVAL_MS);
  }

  private stopPolling(): void {
    if (this.pollTimer !== null) {
      clearInterval(this.pollTimer);
      this.pollTimer = null;
    }
  }

  // -- toasts ------------------------------------------------------------------

  private toastError(message: string): void {
    const box = document.querySelector("#toasts");
    if (!box) return;
    const node = el("div", "toast error-toast", message);
    box.append(node);
    setTimeout(() => node.remove(), 6000);
  }

  private renderToasts(): void {
    let box = document.querySelector("#toasts");
    if (!box) {
      box = el("div");
      box.id = "toasts";
      document.body.append(box);
    }
    box.innerHTML = "";
    for (const toast of this.toasts.toasts) {
      const node = el("div", "toast");
      node.textContent = toast.alert.message;
      const close = el("button", "", "x");
      close.onclick = () => this.toasts.dismiss(toast.id);
      node.append(close);
      box.append(node);
      setTimeout(() => this.toasts.dismiss(toast.id), 8000);
    }
  }
}
