import { beforeEach, describe, expect, it } from "vitest";

import { App, formatClock, readScenarioForm } from "../src/app";
import type { UiConfig } from "../src/types";

const CONFIG: UiConfig = {
  serviceBaseUrl: "http://127.0.0.1:1",
  tileUrlTemplate: "",
  pollIntervalMs: 60000,
};

function mount(): App {
  document.body.innerHTML = '<div id="app"></div>';
  return new App(document.getElementById("app")!, CONFIG);
}

function setInput(name: string, value: string): void {
  const input = document.querySelector(`[name=${name}]`) as HTMLInputElement;
  input.value = value;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

describe("add-fire form", () => {
  let app: App;

  beforeEach(() => {
    app = mount();
  });

  it("serializes exactly to the scenario JSON shape", () => {
    app.showForm(33.310545, 35.108685);
    setInput("ignition_time", "2021-04-01T17:00:00Z");
    setInput("wind_speed", "1.6666666666666667");
    setInput("wind_dir", "135");
    setInput("humidity", "30");
    setInput("temperature", "30");
    setInput("note", "drill");
    const scenario = readScenarioForm(document.getElementById("app")!);
    expect(scenario).toEqual({
      ignition: [33.310545, 35.108685],
      ignition_time: "2021-04-01T17:00:00Z",
      wind: { speed: 1.6666666666666667, direction_to_deg: 135 },
      humidity: 30,
      temperature: 30,
      horizon: 60,
      ring_interval: 15,
      note: "drill",
    });
  });

  it("disables submit until point and wind are present", () => {
    const submit = document.querySelector("#fire-form [type=submit]") as HTMLButtonElement;
    setInput("wind_speed", "");
    expect(submit.disabled).toBe(true);
    app.showForm(33.31, 35.11); // fills the point
    expect(submit.disabled).toBe(true); // wind speed still blank
    setInput("wind_speed", "2.0");
    expect(submit.disabled).toBe(false);
  });

  it("defaults the ignition time to now", () => {
    app.showForm(33.31, 35.11);
    const t = (document.querySelector("[name=ignition_time]") as HTMLInputElement).value;
    expect(t).toMatch(/^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z$/);
  });

  it("shows service errors inline", () => {
    app.setFormError("422 non_burnable_ignition");
    expect(document.getElementById("form-error")!.textContent).toContain("non_burnable");
  });
});

describe("clock formatting", () => {
  it("renders mm:ss", () => {
    expect(formatClock(640)).toBe("10:40");
    expect(formatClock(1280)).toBe("21:20");
    expect(formatClock(58)).toBe("00:58");
  });
});

describe("click modes", () => {
  it("toggles the active toolbar button", () => {
    const app = mount();
    app.setClickMode("probe");
    expect(document.getElementById("mode-probe")!.classList.contains("active")).toBe(true);
    expect(document.getElementById("mode-pan")!.classList.contains("active")).toBe(false);
  });
});

describe("connection banner", () => {
  it("appears when the service is unreachable and clears when it returns", async () => {
    const app = mount(); // config points at an unroutable port
    await app.refreshFires();
    expect(document.getElementById("conn-banner")!.classList.contains("hidden")).toBe(false);
    app.setConnection(true);
    expect(document.getElementById("conn-banner")!.classList.contains("hidden")).toBe(true);
  });
});
