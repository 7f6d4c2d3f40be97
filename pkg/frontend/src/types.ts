// Wire types mirrored from the service's JSON.

export interface WindForm {
  speed: number; // m/s
  direction_to_deg: number; // compass degrees the air moves toward
}

export interface ScenarioForm {
  ignition: [number, number]; // lon, lat
  ignition_time: string; // ISO 8601 UTC
  wind: WindForm;
  humidity: number;
  temperature: number;
  horizon: number;
  ring_interval: number;
  note: string;
}

export type FireStatus = "pending" | "active" | "stopped";

export interface FireRecord {
  id: string;
  status: FireStatus;
  scenario: ScenarioForm;
  note: string;
  rings: MultiPolygon | null;
  ring_minutes?: number[];
}

export interface MultiPolygon {
  type: "MultiPolygon";
  coordinates: number[][][][]; // [polygon][ring][position][lon,lat]
}

export interface LineString {
  type: "LineString";
  coordinates: number[][];
}

export interface FireFeature {
  type: "Feature";
  geometry: MultiPolygon;
  properties: {
    id: string;
    ignition_time: string;
    ring_minutes: number[];
    note: string;
  };
}

export interface RouteFeature {
  type: "Feature";
  geometry: LineString;
  properties: {
    score: number;
    angle_deg: number;
    time_to_safety_s: number;
    mode: string;
    rejected_candidates: RejectionReason[];
  };
}

export interface RejectionReason {
  point: [number, number];
  slot_minutes: number | null;
  user_time_s: number;
}

export interface ServiceError {
  error: string;
  detail: unknown;
}

export interface UiConfig {
  serviceBaseUrl: string;
  tileUrlTemplate: string; // "" disables the raster base layer
  pollIntervalMs: number;
}

export type TransportMode = "walking" | "cycling" | "driving";
