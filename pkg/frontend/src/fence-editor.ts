/** Geofence editor: the restaurant default fence and any per-dish fences
 *  drawn as circles on a flat local map, radius draggable. The projection
 *  is equirectangular around the restaurant; fine at fence scale. */

import { ApiClient, DishWire, FenceWire, RestaurantWire } from "./api";
import { clear, h } from "./dom";

const METERS_PER_DEG_LAT = 110574;
const VIEW = 600; // px, square viewport
const VIEW_SPAN_M = 2400; // meters edge to edge

export function projectToView(
  center: { lat: number; lon: number },
  point: { lat: number; lon: number },
): { x: number; y: number } {
  const metersPerDegLon = METERS_PER_DEG_LAT * Math.cos((center.lat * Math.PI) / 180);
  const dx = (point.lon - center.lon) * metersPerDegLon;
  const dy = (point.lat - center.lat) * METERS_PER_DEG_LAT;
  const scale = VIEW / VIEW_SPAN_M;
  return { x: VIEW / 2 + dx * scale, y: VIEW / 2 - dy * scale };
}

export function metersToPx(meters: number): number {
  return meters * (VIEW / VIEW_SPAN_M);
}

export interface FenceRow {
  fence: FenceWire;
  label: string; // "default" or the dish name
  dishId: string | null;
}

export function collectFences(restaurant: RestaurantWire, dishes: DishWire[]): FenceRow[] {
  const rows: FenceRow[] = [];
  if (restaurant.default_fence) {
    rows.push({ fence: restaurant.default_fence, label: "default", dishId: null });
  }
  for (const dish of dishes) {
    if (dish.dedicated_fence) {
      rows.push({ fence: dish.dedicated_fence, label: dish.name, dishId: dish.id });
    }
  }
  return rows;
}

export class FenceEditor {
  root: HTMLElement;
  mapEl: SVGSVGElement;
  tableEl: HTMLElement;
  errorEl: HTMLElement;
  restaurant: RestaurantWire | null = null;
  rows: FenceRow[] = [];
  /** radius edits not yet saved, by fence id */
  pending: Map<string, number> = new Map();

  constructor(
    private client: ApiClient,
    private restaurantId: string,
    root: HTMLElement,
  ) {
    this.root = root;
    this.mapEl = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    this.mapEl.setAttribute("viewBox", `0 0 ${VIEW} ${VIEW}`);
    this.mapEl.setAttribute("class", "fence-map");
    this.tableEl = h("div", { class: "fence-table" });
    this.errorEl = h("div", { class: "fence-error" });
    root.append(this.mapEl, this.errorEl, this.tableEl);
  }

  async refresh(): Promise<void> {
    this.restaurant = await this.client.getRestaurant(this.restaurantId);
    const dishes = await this.client.listDishes(this.restaurantId);
    this.rows = collectFences(this.restaurant, dishes);
    this.pending.clear();
    this.render();
  }

  /** Radius change from dragging or typing; rejected client-side when <= 0. */
  setRadius(fenceId: string, radiusM: number): boolean {
    if (!(radiusM > 0)) {
      this.errorEl.textContent = "Radius must be greater than zero.";
      return false;
    }
    this.errorEl.textContent = "";
    this.pending.set(fenceId, radiusM);
    this.render();
    return true;
  }

  async saveRadius(fenceId: string): Promise<void> {
    const radius = this.pending.get(fenceId);
    if (radius === undefined) return;
    await this.client.updateFence(fenceId, { radius_m: radius });
    await this.refresh();
  }

  async addDishFence(dishId: string, radiusM: number): Promise<void> {
    if (!this.restaurant) throw new Error("not loaded");
    if (!(radiusM > 0)) {
      this.errorEl.textContent = "Radius must be greater than zero.";
      return;
    }
    await this.client.createFence({
      owner_type: "dish",
      owner_id: dishId,
      center: this.restaurant.location,
      radius_m: radiusM,
    });
    await this.refresh();
  }

  async removeFence(fenceId: string): Promise<void> {
    await this.client.deleteFence(fenceId);
    await this.refresh(); // the dish reverts to the default fence
  }

  displayedRadius(row: FenceRow): number {
    return this.pending.get(row.fence.id) ?? row.fence.radius_m;
  }

  render(): void {
    if (!this.restaurant) return;
    clear(this.mapEl);
    const center = this.restaurant.location;
    for (const row of this.rows) {
      const at = projectToView(center, row.fence.center);
      const circle = document.createElementNS("http://www.w3.org/2000/svg", "circle");
      circle.setAttribute("cx", String(at.x));
      circle.setAttribute("cy", String(at.y));
      circle.setAttribute("r", String(metersToPx(this.displayedRadius(row))));
      circle.setAttribute("class", row.dishId ? "fence-circle dish" : "fence-circle default");
      circle.setAttribute("data-fence", row.fence.id);
      this.mapEl.append(circle);
    }

    clear(this.tableEl);
    for (const row of this.rows) {
      const radiusInput = h("input", {
        type: "number",
        step: "1",
        "data-radius-for": row.fence.id,
      }) as HTMLInputElement;
      radiusInput.value = String(Math.round(this.displayedRadius(row)));
      radiusInput.addEventListener("change", () => this.setRadius(row.fence.id, Number(radiusInput.value)));
      this.tableEl.append(
        h(
          "div",
          { class: "fence-row", "data-fence-row": row.fence.id },
          h("span", { class: "fence-label" }, row.label),
          radiusInput,
          h("span", {}, "m"),
          h("button", { type: "button", onclick: () => void this.saveRadius(row.fence.id) }, "Save"),
          row.dishId
            ? h("button", { type: "button", onclick: () => void this.removeFence(row.fence.id) }, "Delete")
            : null,
        ),
      );
    }
  }
}
