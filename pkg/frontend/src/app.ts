// Application wiring: fire list, add-fire form, route probe, map, toasts.
// State flows one way: service responses -> local caches -> render passes;
// the only mutations are the documented service endpoints.

import { ApiError, FireApi } from "./api";
import { MapView } from "./mapview";
import { legendEntries } from "./ringstyle";
import type {
  FireFeature,
  FireRecord,
  RouteFeature,
  ScenarioForm,
  TransportMode,
  UiConfig,
} from "./types";

type ClickMode = "pan" | "add" | "probe";

export function formatClock(seconds: number): string {
  const m = Math.floor(seconds / 60);
  const s = Math.round(seconds % 60);
  return `${String(m).padStart(2, "0")}:${String(s).padStart(2, "0")}`;
}

export function readScenarioForm(root: ParentNode): ScenarioForm {
  const num = (name: string) =>
    Number((root.querySelector(`[name=${name}]`) as HTMLInputElement).value);
  const str = (name: string) =>
    (root.querySelector(`[name=${name}]`) as HTMLInputElement).value;
  return {
    ignition: [num("lon"), num("lat")],
    ignition_time: str("ignition_time"),
    wind: { speed: num("wind_speed"), direction_to_deg: num("wind_dir") },
    humidity: num("humidity"),
    temperature: num("temperature"),
    horizon: num("horizon"),
    ring_interval: num("ring_interval"),
    note: str("note"),
  };
}

export class App {
  readonly api: FireApi;
  readonly map: MapView;
  fires = new Map<string, FireRecord>();
  features = new Map<string, FireFeature>();
  lastShapes = new Map<string, FireFeature>(); // stopped fires keep their grey ghost
  selectedFire: string | null = null;
  clickMode: ClickMode = "pan";
  transport: TransportMode = "walking";
  route: RouteFeature | null = null;
  connectionOk = true;
  private root: HTMLElement;
  private pollTimer: number | null = null;

  constructor(root: HTMLElement, readonly config: UiConfig) {
    this.root = root;
    this.api = new FireApi(config.serviceBaseUrl);
    root.innerHTML = LAYOUT;
    const mapHost = root.querySelector("#map-host") as HTMLElement;
    this.map = new MapView(mapHost, config.tileUrlTemplate);
    this.map.renderTiles();
    this.map.onClick = (c) => void this.handleMapClick(c.lon, c.lat);
    this.map.svg.addEventListener("viewchanged", () => this.renderMap());
    this.wireControls();
    this.renderLegend([0, 15, 30, 45, 60]);
  }

  startPolling(): void {
    if (this.pollTimer !== null) return;
    this.pollTimer = window.setInterval(
      () => void this.refreshFires(),
      this.config.pollIntervalMs,
    );
  }

  stopPolling(): void {
    if (this.pollTimer !== null) window.clearInterval(this.pollTimer);
    this.pollTimer = null;
  }

  private wireControls(): void {
    this.q("#mode-pan").addEventListener("click", () => this.setClickMode("pan"));
    this.q("#mode-add").addEventListener("click", () => this.setClickMode("add"));
    this.q("#mode-probe").addEventListener("click", () => this.setClickMode("probe"));
    this.q("#zoom-in").addEventListener("click", () => this.map.zoomBy(1));
    this.q("#zoom-out").addEventListener("click", () => this.map.zoomBy(-1));
    const transport = this.q("#transport") as HTMLSelectElement;
    transport.addEventListener("change", () => {
      this.transport = transport.value as TransportMode;
    });
    const form = this.q("#fire-form") as HTMLFormElement;
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.submitFireForm();
    });
    this.q("#form-cancel").addEventListener("click", () => this.hideForm());
    this.validateForm();
    form.addEventListener("input", () => this.validateForm());
  }

  private q(sel: string): HTMLElement {
    return this.root.querySelector(sel) as HTMLElement;
  }

  setClickMode(mode: ClickMode): void {
    this.clickMode = mode;
    for (const id of ["pan", "add", "probe"]) {
      this.q(`#mode-${id}`).classList.toggle("active", id === mode);
    }
  }

  private async handleMapClick(lon: number, lat: number): Promise<void> {
    if (this.clickMode === "add") {
      this.showForm(lon, lat);
    } else if (this.clickMode === "probe") {
      await this.probeRoute(lon, lat);
    }
  }

  // --- add wildfire flow ---------------------------------------------------

  showForm(lon: number, lat: number): void {
    const form = this.q("#fire-form") as HTMLFormElement;
    form.classList.remove("hidden");
    (form.querySelector("[name=lon]") as HTMLInputElement).value = lon.toFixed(6);
    (form.querySelector("[name=lat]") as HTMLInputElement).value = lat.toFixed(6);
    const t = form.querySelector("[name=ignition_time]") as HTMLInputElement;
    if (!t.value) t.value = new Date().toISOString().replace(/\.\d+Z$/, "Z");
    this.setFormError("");
    this.validateForm();
  }

  hideForm(): void {
    this.q("#fire-form").classList.add("hidden");
  }

  /** Submit stays disabled until an ignition point and wind are present. */
  validateForm(): void {
    const form = this.q("#fire-form");
    const filled = ["lon", "lat", "wind_speed", "wind_dir"].every(
      (n) => (form.querySelector(`[name=${n}]`) as HTMLInputElement).value !== "",
    );
    (form.querySelector("[type=submit]") as HTMLButtonElement).disabled = !filled;
  }

  setFormError(text: string): void {
    this.q("#form-error").textContent = text;
  }

  async submitFireForm(): Promise<FireRecord | null> {
    const scenario = readScenarioForm(this.q("#fire-form"));
    try {
      const fire = await this.api.createFire(scenario);
      this.fires.set(fire.id, fire);
      this.hideForm();
      this.toast(`wildfire recorded (${fire.id.slice(0, 8)})`);
      await this.refreshFires();
      this.renderFireList();
      return fire;
    } catch (err) {
      this.setFormError(this.describe(err));
      return null;
    }
  }

  // --- ignite / stop / delete ----------------------------------------------

  async igniteFire(fireId: string): Promise<void> {
    try {
      const fire = await this.api.ignite(fireId);
      this.fires.set(fire.id, fire);
      this.selectedFire = fireId;
      await this.refreshFires();
    } catch (err) {
      this.toast(`ignite failed: ${this.describe(err)}`, true);
    }
    this.renderFireList();
  }

  async stopFire(fireId: string): Promise<void> {
    try {
      const fire = await this.api.stop(fireId);
      this.fires.set(fire.id, fire);
      await this.refreshFires();
    } catch (err) {
      this.toast(`stop failed: ${this.describe(err)}`, true);
    }
    this.renderFireList();
  }

  async deleteFire(fireId: string): Promise<void> {
    try {
      await this.api.remove(fireId);
      this.fires.delete(fireId);
      this.lastShapes.delete(fireId);
      if (this.selectedFire === fireId) this.selectedFire = null;
      await this.refreshFires();
    } catch (err) {
      this.toast(`delete failed: ${this.describe(err)}`, true);
    }
    this.renderFireList();
  }

  // --- probe route -----------------------------------------------------------

  async probeRoute(lon: number, lat: number): Promise<void> {
    const fireId = this.selectedFire;
    if (!fireId) {
      this.toast("select an active fire before probing a route", true);
      return;
    }
    try {
      this.route = await this.api.route(lon, lat, this.transport, fireId);
      this.renderRoutePanel();
      this.renderMap();
    } catch (err) {
      this.route = null;
      this.renderRoutePanel();
      this.renderMap();
      if (err instanceof ApiError && err.body?.error === "no_safe_route") {
        const reasons = Array.isArray(err.body.detail) ? err.body.detail.length : 0;
        this.toast(`no safe route: ${reasons} candidates rejected`, true);
        this.renderRejections(err.body.detail);
      } else {
        this.toast(`route failed: ${this.describe(err)}`, true);
      }
    }
  }

  private renderRejections(detail: unknown): void {
    const panel = this.q("#route-panel");
    if (!Array.isArray(detail)) return;
    const list = detail
      .map((r) => `rejected at slot ${r.slot_minutes ?? "?"} (user ${formatClock(r.user_time_s)})`)
      .join("; ");
    panel.textContent = `no safe route — ${list}`;
    panel.classList.remove("hidden");
  }

  // --- polling / rendering ---------------------------------------------------

  async refreshFires(): Promise<void> {
    try {
      const fc = await this.api.listFires();
      const seen = new Set<string>();
      this.features.clear();
      for (const feat of fc.features) {
        this.features.set(feat.properties.id, feat);
        this.lastShapes.set(feat.properties.id, feat);
        seen.add(feat.properties.id);
      }
      // fires that left the active list were stopped or deleted elsewhere
      for (const fire of this.fires.values()) {
        if (fire.status === "active" && !seen.has(fire.id)) fire.status = "stopped";
      }
      this.setConnection(true);
    } catch {
      this.setConnection(false);
    }
    this.renderMap();
    this.renderFireList();
  }

  setConnection(ok: boolean): void {
    this.connectionOk = ok;
    this.q("#conn-banner").classList.toggle("hidden", ok);
  }

  renderMap(): void {
    this.map.clearFires();
    this.map.clearMarkers();
    for (const [id, feat] of this.features) {
      this.map.renderFire(feat, { selected: id === this.selectedFire });
    }
    for (const fire of this.fires.values()) {
      if (fire.status === "stopped") {
        const ghost = this.lastShapes.get(fire.id);
        if (ghost) this.map.renderFire(ghost, { greyed: true });
      }
      this.map.renderMarker(
        fire.scenario.ignition[0],
        fire.scenario.ignition[1],
        fire.status,
        fire.id,
      );
    }
    if (this.route) this.map.renderRoute(this.route);
    else this.map.clearRoute();
  }

  renderFireList(): void {
    const list = this.q("#fire-list");
    list.replaceChildren();
    const entries = [...this.fires.values()];
    for (const id of this.features.keys()) {
      if (!this.fires.has(id)) {
        // discovered via polling (created by another operator session)
        const feat = this.features.get(id)!;
        entries.push({
          id,
          status: "active",
          scenario: {
            ignition: [0, 0],
            ignition_time: feat.properties.ignition_time,
            wind: { speed: 0, direction_to_deg: 0 },
            humidity: 0,
            temperature: 0,
            horizon: 60,
            ring_interval: 15,
            note: feat.properties.note,
          },
          note: feat.properties.note,
          rings: feat.geometry,
        });
      }
    }
    for (const fire of entries) {
      const item = document.createElement("li");
      item.className = `fire-item ${fire.status}`;
      item.dataset.fire = fire.id;
      const label = document.createElement("span");
      label.textContent = `${fire.id.slice(0, 8)} — ${fire.note || "unnamed"} `;
      const badge = document.createElement("span");
      badge.className = `badge ${fire.status}`;
      badge.textContent = fire.status;
      item.append(label, badge);
      const actions = document.createElement("span");
      actions.className = "actions";
      if (fire.status === "pending") {
        actions.append(this.actionButton("ignite", () => void this.igniteFire(fire.id)));
      }
      if (fire.status === "active") {
        actions.append(this.actionButton("stop", () => void this.stopFire(fire.id)));
        actions.append(
          this.actionButton("select", () => {
            this.selectedFire = fire.id;
            this.renderMap();
            this.renderFireList();
          }),
        );
        actions.append(
          this.actionButton("center", () => {
            const feat = this.features.get(fire.id);
            const first = feat?.geometry.coordinates[0]?.[0]?.[0];
            if (first) this.map.setCenter(first[0]!, first[1]!);
            else this.map.setCenter(fire.scenario.ignition[0], fire.scenario.ignition[1]);
          }),
        );
      }
      actions.append(this.actionButton("delete", () => void this.deleteFire(fire.id)));
      item.append(actions);
      if (fire.id === this.selectedFire) item.classList.add("selected");
      list.append(item);
    }
  }

  private actionButton(label: string, handler: () => void): HTMLButtonElement {
    const btn = document.createElement("button");
    btn.type = "button";
    btn.className = `act-${label}`;
    btn.textContent = label;
    btn.addEventListener("click", handler);
    return btn;
  }

  renderRoutePanel(): void {
    const panel = this.q("#route-panel");
    if (!this.route) {
      panel.classList.add("hidden");
      panel.textContent = "";
      return;
    }
    const p = this.route.properties;
    panel.classList.remove("hidden");
    panel.innerHTML = "";
    const rows: [string, string][] = [
      ["mode", p.mode],
      ["score", p.score.toFixed(3)],
      ["angle", `${p.angle_deg.toFixed(0)}°`],
      ["time to safety", formatClock(p.time_to_safety_s)],
    ];
    for (const [k, v] of rows) {
      const row = document.createElement("div");
      row.className = "route-row";
      row.dataset.key = k.replace(/ /g, "-");
      row.textContent = `${k}: ${v}`;
      panel.append(row);
    }
  }

  renderLegend(ringMinutes: number[]): void {
    const legend = this.q("#legend");
    legend.replaceChildren();
    for (const entry of legendEntries(ringMinutes)) {
      const item = document.createElement("span");
      item.className = "legend-item";
      const swatch = document.createElement("span");
      swatch.className = "legend-swatch";
      swatch.style.opacity = String(entry.opacity);
      const label = document.createElement("span");
      label.textContent = `${entry.minutes} min`;
      item.append(swatch, label);
      legend.append(item);
    }
  }

  toast(text: string, isError = false): void {
    const host = this.q("#toasts");
    const el = document.createElement("div");
    el.className = `toast${isError ? " error" : ""}`;
    el.textContent = text;
    host.append(el);
    window.setTimeout(() => el.remove(), 6000);
  }

  private describe(err: unknown): string {
    if (err instanceof ApiError) {
      const detail = typeof err.body?.detail === "string" ? err.body.detail : "";
      return `${err.status} ${err.body?.error ?? ""} ${detail}`.trim();
    }
    return err instanceof Error ? err.message : String(err);
  }
}

const LAYOUT = `
<div id="conn-banner" class="hidden">service unreachable — retrying</div>
<div class="columns">
  <aside class="sidebar">
    <h1>wildfire operations</h1>
    <div class="toolbar">
      <button id="mode-pan" type="button" class="active">pan</button>
      <button id="mode-add" type="button">add fire</button>
      <button id="mode-probe" type="button">probe route</button>
      <select id="transport">
        <option value="walking">walking</option>
        <option value="cycling">cycling</option>
        <option value="driving">driving</option>
      </select>
    </div>
    <form id="fire-form" class="hidden">
      <h2>new wildfire</h2>
      <label>lon <input name="lon" type="number" step="any" required></label>
      <label>lat <input name="lat" type="number" step="any" required></label>
      <label>ignition time <input name="ignition_time" type="text"></label>
      <label>wind speed m/s <input name="wind_speed" type="number" step="any" value="1.7"></label>
      <label>wind direction ° <input name="wind_dir" type="number" step="any" value="135"></label>
      <label>humidity % <input name="humidity" type="number" step="any" value="30"></label>
      <label>temperature °C <input name="temperature" type="number" step="any" value="30"></label>
      <label>horizon min <input name="horizon" type="number" value="60"></label>
      <label>ring interval min <input name="ring_interval" type="number" value="15"></label>
      <label>note <input name="note" type="text" value=""></label>
      <div id="form-error" class="form-error"></div>
      <button type="submit">create</button>
      <button id="form-cancel" type="button">cancel</button>
    </form>
    <ul id="fire-list"></ul>
    <div id="route-panel" class="hidden"></div>
  </aside>
  <main>
    <div class="map-controls">
      <button id="zoom-in" type="button">+</button>
      <button id="zoom-out" type="button">−</button>
    </div>
    <div id="map-host"></div>
    <div id="legend"></div>
  </main>
</div>
<div id="toasts"></div>
`;
