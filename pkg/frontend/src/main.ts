import { App } from "./app";
import type { UiConfig } from "./types";
import "./style.css";

const DEFAULTS: UiConfig = {
  serviceBaseUrl: "http://127.0.0.1:8000",
  tileUrlTemplate: "",
  pollIntervalMs: 5000,
};

async function loadConfig(): Promise<UiConfig> {
  try {
    const resp = await fetch("./config.json");
    if (!resp.ok) return DEFAULTS;
    return { ...DEFAULTS, ...(await resp.json()) };
  } catch {
    return DEFAULTS;
  }
}

async function boot(): Promise<void> {
  const config = await loadConfig();
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const app = new App(root, config);
  await app.refreshFires();
  app.startPolling();
}

void boot();
