// Typed client for the planttalk REST API. The bearer token lives in
// memory only; it is never written to any persistent browser storage.

import type {
  ChatReply,
  Channel,
  Dashboard,
  Plant,
  RegisterResponse,
  Species,
  Turn,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchFn = typeof fetch;

export class ApiClient {
  private token: string | null = null;

  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchFn = fetch,
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  getToken(): string | null {
    return this.token;
  }

  async register(loginName: string): Promise<RegisterResponse> {
    const body = await this.request<RegisterResponse>("POST", "/api/register", {
      login_name: loginName,
    });
    this.token = body.token;
    return body;
  }

  whoami(): Promise<{ user_id: string; login_name: string }> {
    return this.request("GET", "/api/whoami");
  }

  listSpecies(): Promise<Species[]> {
    return this.request("GET", "/api/species");
  }

  listPlants(): Promise<Plant[]> {
    return this.request("GET", "/api/plants");
  }

  createPlant(speciesId: string, nickname: string): Promise<Plant> {
    return this.request("POST", "/api/plants", {
      species_id: speciesId,
      nickname,
    });
  }

  deletePlant(plantId: string): Promise<{ deleted: string }> {
    return this.request("DELETE", `/api/plants/${plantId}`);
  }

  // The write key is only ever returned by this call; there is no way to
  // fetch it again later.
  createChannel(plantId: string): Promise<Channel> {
    return this.request("POST", `/api/plants/${plantId}/channel`);
  }

  dashboard(plantId: string): Promise<Dashboard> {
    return this.request("GET", `/api/plants/${plantId}/dashboard`);
  }

  history(plantId: string, limit = 200): Promise<{ turns: Turn[] }> {
    return this.request("GET", `/api/plants/${plantId}/history?limit=${limit}`);
  }

  chat(plantId: string, message: string): Promise<ChatReply> {
    return this.request("POST", `/api/plants/${plantId}/chat`, { message });
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const resp = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!resp.ok) {
      let code = "unknown";
      let message = `HTTP ${resp.status}`;
      try {
        const parsed = (await resp.json()) as { code?: string; message?: string };
        code = parsed.code ?? code;
        message = parsed.message ?? message;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(resp.status, code, message);
    }
    return (await resp.json()) as T;
  }
}
