// Thin typed client for the fire service. Every request funnels through
// one helper so integration tests can log and audit the calls the UI makes.

import type {
  FireFeature,
  FireRecord,
  RouteFeature,
  ScenarioForm,
  ServiceError,
  TransportMode,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: ServiceError | null,
  ) {
    super(body ? `${body.error}` : `HTTP ${status}`);
  }
}

export type RequestLogEntry = { method: string; path: string; status: number };

export class FireApi {
  readonly log: RequestLogEntry[] = [];

  constructor(private baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    this.log.push({ method, path, status: resp.status });
    if (!resp.ok) {
      let parsed: ServiceError | null = null;
      try {
        parsed = (await resp.json()) as ServiceError;
      } catch {
        parsed = null;
      }
      throw new ApiError(resp.status, parsed);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  createFire(scenario: ScenarioForm): Promise<FireRecord> {
    return this.request("POST", "/fires", scenario);
  }

  listFires(): Promise<{ type: string; features: FireFeature[] }> {
    return this.request("GET", "/fires");
  }

  ignite(fireId: string): Promise<FireRecord> {
    return this.request("POST", `/fires/${fireId}/ignite`);
  }

  stop(fireId: string): Promise<FireRecord> {
    return this.request("POST", `/fires/${fireId}/stop`);
  }

  remove(fireId: string): Promise<{ deleted: string }> {
    return this.request("DELETE", `/fires/${fireId}`);
  }

  route(lon: number, lat: number, mode: TransportMode, fireId: string): Promise<RouteFeature> {
    return this.request("POST", "/route", { lon, lat, mode, fire_id: fireId });
  }
}
