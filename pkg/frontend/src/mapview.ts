// SVG map pane. Screen space is standard Web Mercator (slippy-map world
// coordinates) so an optional raster tile layer drops in pixel-exact; with
// no tile template configured the pane stays a neutral canvas. Vector
// layers (fire rings, probed route, markers) are plain SVG elements, which
// keeps rendering assertable in DOM-level tests.

import { RING_HUE, ringOpacity } from "./ringstyle";
import type { FireFeature, RouteFeature } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";
const TILE_SIZE = 256;

export interface MapClick {
  lon: number;
  lat: number;
}

function mercX(lon: number): number {
  return (lon + 180) / 360;
}

function mercY(lat: number): number {
  const phi = (lat * Math.PI) / 180;
  return (1 - Math.log(Math.tan(phi) + 1 / Math.cos(phi)) / Math.PI) / 2;
}

function invMercX(x: number): number {
  return x * 360 - 180;
}

function invMercY(y: number): number {
  return (Math.atan(Math.sinh(Math.PI * (1 - 2 * y))) * 180) / Math.PI;
}

export class MapView {
  readonly svg: SVGSVGElement;
  readonly width = 800;
  readonly height = 600;
  center: { lon: number; lat: number };
  zoom: number;
  onClick: ((c: MapClick) => void) | null = null;

  private tileLayer: SVGGElement;
  private fireLayer: SVGGElement;
  private routeLayer: SVGGElement;
  private markerLayer: SVGGElement;
  private tileTemplate: string;
  private dragging = false;
  private dragStart: { x: number; y: number; lon: number; lat: number } | null = null;
  private moved = false;

  constructor(container: HTMLElement, tileTemplate: string, center = { lon: 33.35, lat: 35.15 }, zoom = 13) {
    this.center = { ...center };
    this.zoom = zoom;
    this.tileTemplate = tileTemplate;
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("width", String(this.width));
    this.svg.setAttribute("height", String(this.height));
    this.svg.setAttribute("viewBox", `0 0 ${this.width} ${this.height}`);
    this.svg.classList.add("map-pane");
    const bg = document.createElementNS(SVG_NS, "rect");
    bg.setAttribute("width", String(this.width));
    bg.setAttribute("height", String(this.height));
    bg.setAttribute("fill", "#dfe8dc");
    this.svg.appendChild(bg);
    this.tileLayer = this.addLayer("tiles");
    this.fireLayer = this.addLayer("fires");
    this.routeLayer = this.addLayer("route");
    this.markerLayer = this.addLayer("markers");
    container.appendChild(this.svg);

    this.svg.addEventListener("mousedown", (ev) => this.startDrag(ev));
    this.svg.addEventListener("mousemove", (ev) => this.drag(ev));
    this.svg.addEventListener("mouseup", (ev) => this.endDrag(ev));
    this.svg.addEventListener("mouseleave", () => {
      this.dragging = false;
      this.dragStart = null;
    });
  }

  private addLayer(id: string): SVGGElement {
    const g = document.createElementNS(SVG_NS, "g");
    g.setAttribute("id", id);
    this.svg.appendChild(g);
    return g;
  }

  private worldScale(): number {
    return TILE_SIZE * 2 ** this.zoom;
  }

  toScreen(lon: number, lat: number): { x: number; y: number } {
    const s = this.worldScale();
    return {
      x: (mercX(lon) - mercX(this.center.lon)) * s + this.width / 2,
      y: (mercY(lat) - mercY(this.center.lat)) * s + this.height / 2,
    };
  }

  toLonLat(x: number, y: number): MapClick {
    const s = this.worldScale();
    return {
      lon: invMercX(mercX(this.center.lon) + (x - this.width / 2) / s),
      lat: invMercY(mercY(this.center.lat) + (y - this.height / 2) / s),
    };
  }

  private eventPoint(ev: MouseEvent): { x: number; y: number } {
    const rect = this.svg.getBoundingClientRect();
    const sx = rect.width > 0 ? this.width / rect.width : 1;
    const sy = rect.height > 0 ? this.height / rect.height : 1;
    return { x: (ev.clientX - rect.left) * sx, y: (ev.clientY - rect.top) * sy };
  }

  private startDrag(ev: MouseEvent): void {
    const p = this.eventPoint(ev);
    this.dragging = true;
    this.moved = false;
    this.dragStart = { x: p.x, y: p.y, lon: this.center.lon, lat: this.center.lat };
  }

  private drag(ev: MouseEvent): void {
    if (!this.dragging || !this.dragStart) return;
    const p = this.eventPoint(ev);
    const dx = p.x - this.dragStart.x;
    const dy = p.y - this.dragStart.y;
    if (Math.abs(dx) + Math.abs(dy) > 3) this.moved = true;
    if (!this.moved) return;
    const s = this.worldScale();
    this.center = {
      lon: invMercX(mercX(this.dragStart.lon) - dx / s),
      lat: invMercY(mercY(this.dragStart.lat) - dy / s),
    };
    this.renderTiles();
    this.svg.dispatchEvent(new CustomEvent("viewchanged"));
  }

  private endDrag(ev: MouseEvent): void {
    const wasDragging = this.dragging;
    this.dragging = false;
    this.dragStart = null;
    if (!wasDragging || this.moved) return;
    const p = this.eventPoint(ev);
    if (this.onClick) this.onClick(this.toLonLat(p.x, p.y));
  }

  zoomBy(delta: number): void {
    this.zoom = Math.min(19, Math.max(3, this.zoom + delta));
    this.renderTiles();
    this.svg.dispatchEvent(new CustomEvent("viewchanged"));
  }

  setCenter(lon: number, lat: number): void {
    this.center = { lon, lat };
    this.renderTiles();
    this.svg.dispatchEvent(new CustomEvent("viewchanged"));
  }

  /** Raster base layer adapter: any z/x/y tile template, purely cosmetic. */
  renderTiles(): void {
    this.tileLayer.replaceChildren();
    if (!this.tileTemplate) return;
    const s = this.worldScale();
    const n = 2 ** this.zoom;
    const topLeftX = mercX(this.center.lon) * s - this.width / 2;
    const topLeftY = mercY(this.center.lat) * s - this.height / 2;
    const x0 = Math.floor(topLeftX / TILE_SIZE);
    const y0 = Math.floor(topLeftY / TILE_SIZE);
    const x1 = Math.floor((topLeftX + this.width) / TILE_SIZE);
    const y1 = Math.floor((topLeftY + this.height) / TILE_SIZE);
    for (let tx = x0; tx <= x1; tx++) {
      for (let ty = Math.max(0, y0); ty <= Math.min(n - 1, y1); ty++) {
        const img = document.createElementNS(SVG_NS, "image");
        const url = this.tileTemplate
          .replace("{z}", String(this.zoom))
          .replace("{x}", String(((tx % n) + n) % n))
          .replace("{y}", String(ty));
        img.setAttribute("href", url);
        img.setAttribute("x", String(tx * TILE_SIZE - topLeftX));
        img.setAttribute("y", String(ty * TILE_SIZE - topLeftY));
        img.setAttribute("width", String(TILE_SIZE));
        img.setAttribute("height", String(TILE_SIZE));
        this.tileLayer.appendChild(img);
      }
    }
  }

  private pathFor(ring: number[][]): string {
    return (
      ring
        .map((pos, i) => {
          const p = this.toScreen(pos[0]!, pos[1]!);
          return `${i === 0 ? "M" : "L"}${p.x.toFixed(2)},${p.y.toFixed(2)}`;
        })
        .join(" ") + " Z"
    );
  }

  /** Draw one fire's nested rings; greyed renders a stopped fire's last
   * known shape. Polygons arrive outermost first; ring_minutes ascend. */
  renderFire(feature: FireFeature, opts: { greyed?: boolean; selected?: boolean } = {}): void {
    const minutesDesc = [...feature.properties.ring_minutes].sort((a, b) => b - a);
    feature.geometry.coordinates.forEach((polygon, i) => {
      const exterior = polygon[0];
      if (!exterior) return;
      const minutes = minutesDesc[i] ?? 60;
      const path = document.createElementNS(SVG_NS, "path");
      path.setAttribute("d", this.pathFor(exterior));
      path.setAttribute("class", "ring");
      path.setAttribute("data-fire", feature.properties.id);
      path.setAttribute("data-minutes", String(minutes));
      path.setAttribute("fill", opts.greyed ? "#777777" : RING_HUE);
      path.setAttribute("fill-opacity", String(ringOpacity(minutes)));
      path.setAttribute("stroke", opts.selected ? "#401208" : "none");
      path.setAttribute("stroke-width", "1");
      this.fireLayer.appendChild(path);
    });
  }

  clearFires(): void {
    this.fireLayer.replaceChildren();
  }

  renderMarker(lon: number, lat: number, cls: string, fireId: string): void {
    const p = this.toScreen(lon, lat);
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(p.x));
    dot.setAttribute("cy", String(p.y));
    dot.setAttribute("r", "5");
    dot.setAttribute("class", `fire-marker ${cls}`);
    dot.setAttribute("data-fire", fireId);
    this.markerLayer.appendChild(dot);
  }

  clearMarkers(): void {
    this.markerLayer.replaceChildren();
  }

  renderRoute(route: RouteFeature): void {
    this.routeLayer.replaceChildren();
    const pts = route.geometry.coordinates;
    if (pts.length === 0) return;
    const path = document.createElementNS(SVG_NS, "path");
    const d = pts
      .map((pos, i) => {
        const p = this.toScreen(pos[0]!, pos[1]!);
        return `${i === 0 ? "M" : "L"}${p.x.toFixed(2)},${p.y.toFixed(2)}`;
      })
      .join(" ");
    path.setAttribute("d", d);
    path.setAttribute("class", "route-line");
    path.setAttribute("fill", "none");
    path.setAttribute("stroke", "#0b57d0");
    path.setAttribute("stroke-width", "3");
    this.routeLayer.appendChild(path);
    const start = this.toScreen(pts[0]![0]!, pts[0]![1]!);
    const dot = document.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(start.x));
    dot.setAttribute("cy", String(start.y));
    dot.setAttribute("r", "4");
    dot.setAttribute("class", "route-start");
    dot.setAttribute("fill", "#0b57d0");
    this.routeLayer.appendChild(dot);
  }

  clearRoute(): void {
    this.routeLayer.replaceChildren();
  }
}
