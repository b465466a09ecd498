import { beforeEach, describe, expect, it } from "vitest";

import { DishWire, FenceWire, RestaurantWire } from "../src/api";
import { FenceEditor, collectFences, metersToPx, projectToView } from "../src/fence-editor";

const DEFAULT_FENCE: FenceWire = {
  id: "f1", owner_type: "restaurant", owner_id: "r1",
  center: { lat: 52.0, lon: 7.0 }, radius_m: 250, enabled: true,
};

const RESTAURANT: RestaurantWire = {
  id: "r1", name: "Harbor Grill", chain_id: null,
  location: { lat: 52.0, lon: 7.0 },
  hours: {}, default_fence_id: "f1", default_fence: DEFAULT_FENCE,
  enabled: true, utc_offset_min: 0,
};

function dishWith(fence: FenceWire | null, id = "d1"): DishWire {
  return {
    id, restaurant_id: "r1", name: `Dish ${id}`, nickname: null, image_ref: "",
    ingredients: ["x"], description: "", price_minor: 100, avatar_gender: "unspecified",
    allergens: [], cuisine: "", local: false, organic: false, diet_class: "vegan",
    seasonal_effect: "none", dedicated_fence_id: fence?.id ?? null,
    dedicated_fence: fence, active: true, created_at: "2021-09-01T00:00:00Z",
  };
}

class StubClient {
  restaurant = RESTAURANT;
  dishes: DishWire[] = [];
  patches: Array<[string, unknown]> = [];
  deleted: string[] = [];

  async getRestaurant() {
    return this.restaurant;
  }
  async listDishes() {
    return this.dishes;
  }
  async updateFence(id: string, patch: unknown) {
    this.patches.push([id, patch]);
    return { ...DEFAULT_FENCE, ...(patch as object) };
  }
  async createFence(payload: { owner_id: string; radius_m: number }) {
    const fence: FenceWire = {
      ...DEFAULT_FENCE, id: "f-new", owner_type: "dish", owner_id: payload.owner_id,
      radius_m: payload.radius_m,
    };
    this.dishes = this.dishes.map((d) =>
      d.id === payload.owner_id ? { ...d, dedicated_fence: fence, dedicated_fence_id: fence.id } : d,
    );
    return fence;
  }
  async deleteFence(id: string) {
    this.deleted.push(id);
    this.dishes = this.dishes.map((d) =>
      d.dedicated_fence_id === id ? { ...d, dedicated_fence: null, dedicated_fence_id: null } : d,
    );
  }
}

describe("projection", () => {
  it("keeps the center in the middle of the view", () => {
    const at = projectToView(RESTAURANT.location, RESTAURANT.location);
    expect(at).toEqual({ x: 300, y: 300 });
  });

  it("roughly one pixel per four meters", () => {
    expect(metersToPx(400)).toBe(100);
  });

  it("north is up", () => {
    const north = projectToView(RESTAURANT.location, { lat: 52.001, lon: 7.0 });
    expect(north.y).toBeLessThan(300);
    expect(Math.abs(north.x - 300)).toBeLessThan(1e-9);
  });
});

describe("collectFences", () => {
  it("labels default and per-dish fences", () => {
    const own: FenceWire = { ...DEFAULT_FENCE, id: "f2", owner_type: "dish", owner_id: "d1" };
    const rows = collectFences(RESTAURANT, [dishWith(own), dishWith(null, "d2")]);
    expect(rows.map((r) => r.label)).toEqual(["default", "Dish d1"]);
  });
});

describe("FenceEditor", () => {
  let editor: FenceEditor;
  let client: StubClient;

  beforeEach(async () => {
    document.body.innerHTML = "";
    const root = document.createElement("div");
    document.body.append(root);
    client = new StubClient();
    client.dishes = [dishWith(null)];
    editor = new FenceEditor(client as never, "r1", root);
    await editor.refresh();
  });

  it("draws one circle per fence", () => {
    expect(editor.mapEl.querySelectorAll("circle")).toHaveLength(1);
  });

  it("rejects a non-positive radius before any request", async () => {
    expect(editor.setRadius("f1", 0)).toBe(false);
    expect(editor.setRadius("f1", -10)).toBe(false);
    expect(editor.errorEl.textContent).toContain("greater than zero");
    await editor.saveRadius("f1");
    expect(client.patches).toHaveLength(0);
  });

  it("dragging the radius updates the circle, saving patches the fence", async () => {
    expect(editor.setRadius("f1", 500)).toBe(true);
    const circle = editor.mapEl.querySelector("circle")!;
    expect(Number(circle.getAttribute("r"))).toBe(metersToPx(500));
    await editor.saveRadius("f1");
    expect(client.patches).toEqual([["f1", { radius_m: 500 }]]);
  });

  it("adding and deleting a dish fence round-trips to the default", async () => {
    await editor.addDishFence("d1", 400);
    expect(editor.rows.map((r) => r.label)).toEqual(["default", "Dish d1"]);
    await editor.removeFence("f-new");
    expect(client.deleted).toEqual(["f-new"]);
    expect(editor.rows.map((r) => r.label)).toEqual(["default"]);
  });
});
