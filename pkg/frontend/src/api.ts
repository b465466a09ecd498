/** Typed client for the tabletalk gateway. Every call carries the bearer
 *  token; the console never computes domain numbers itself, it only
 *  renders what these endpoints return. */

export interface GeoPointWire {
  lat: number;
  lon: number;
}

export interface FenceWire {
  id: string;
  owner_type: "restaurant" | "dish";
  owner_id: string;
  center: GeoPointWire;
  radius_m: number;
  enabled: boolean;
}

export interface RestaurantWire {
  id: string;
  name: string;
  chain_id: string | null;
  location: GeoPointWire;
  hours: Record<string, [number, number][]>;
  default_fence_id: string;
  default_fence: FenceWire | null;
  enabled: boolean;
  utc_offset_min: number;
}

export interface DishWire {
  id: string;
  restaurant_id: string;
  name: string;
  nickname: string | null;
  image_ref: string;
  ingredients: string[];
  description: string;
  price_minor: number;
  avatar_gender: "male" | "female" | "unspecified";
  allergens: string[];
  cuisine: string;
  local: boolean;
  organic: boolean;
  diet_class: "vegan" | "vegetarian" | "meat";
  seasonal_effect: "none" | "spring" | "easter" | "summer" | "fall" | "winter";
  dedicated_fence_id: string | null;
  dedicated_fence: FenceWire | null;
  active: boolean;
  created_at: string;
}

export type DishPayload = Partial<Omit<DishWire, "dedicated_fence">> & {
  dedicated_fence?: { center?: GeoPointWire; radius_m: number } | null;
};

export interface RankedRow {
  dish_id: string;
  inquiries?: number;
  distinct_users?: number;
  recent?: number;
  prior?: number;
}

export interface KpiReportWire {
  window: { from: string; to: string };
  total_inquiries: number;
  responded: number;
  fallback_count: number;
  fallback_rate_pct?: number;
  outcome_totals: Record<string, number>;
  category_totals: Record<string, number>;
  phase_totals: Record<string, number>;
  most_talked_to: RankedRow[];
  most_popular: RankedRow[];
  trending_local: RankedRow[];
  registered_users: number;
  active_users: number;
}

export type PhaseHistogram = Record<string, Record<string, number>>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public violations: string[] = [],
  ) {
    super(message);
  }
}

export class NetworkError extends Error {}

export class ApiClient {
  constructor(
    public baseUrl: string,
    private token: string,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(method: string, path: string, body?: unknown, rawBody?: string): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, {
        method,
        headers: {
          Authorization: `Bearer ${this.token}`,
          ...(rawBody === undefined ? { "Content-Type": "application/json" } : {}),
        },
        body: rawBody !== undefined ? rawBody : body !== undefined ? JSON.stringify(body) : undefined,
      });
    } catch (err) {
      throw new NetworkError(`cannot reach ${this.baseUrl}: ${err}`);
    }
    if (!response.ok) {
      let message = `${method} ${path} failed (${response.status})`;
      let violations: string[] = [];
      try {
        const payload = await response.json();
        if (payload.error) message = payload.error;
        if (Array.isArray(payload.violations)) violations = payload.violations;
      } catch {
        /* non-JSON error body; keep the generic message */
      }
      throw new ApiError(response.status, message, violations);
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  // restaurants
  listRestaurants(): Promise<RestaurantWire[]> {
    return this.request("GET", "/restaurants");
  }
  getRestaurant(id: string): Promise<RestaurantWire> {
    return this.request("GET", `/restaurants/${id}`);
  }
  createRestaurant(payload: unknown): Promise<RestaurantWire> {
    return this.request("POST", "/restaurants", payload);
  }
  updateRestaurant(id: string, patch: unknown): Promise<RestaurantWire> {
    return this.request("PATCH", `/restaurants/${id}`, patch);
  }

  // dishes
  listDishes(restaurantId: string): Promise<DishWire[]> {
    return this.request("GET", `/restaurants/${restaurantId}/dishes`);
  }
  getDish(id: string): Promise<DishWire> {
    return this.request("GET", `/dishes/${id}`);
  }
  createDish(restaurantId: string, payload: DishPayload): Promise<DishWire> {
    return this.request("POST", `/restaurants/${restaurantId}/dishes`, payload);
  }
  updateDish(id: string, patch: DishPayload): Promise<DishWire> {
    return this.request("PATCH", `/dishes/${id}`, patch);
  }
  deleteDish(id: string): Promise<void> {
    return this.request("DELETE", `/dishes/${id}`);
  }

  // geofences
  createFence(payload: unknown): Promise<FenceWire> {
    return this.request("POST", "/geofences", payload);
  }
  updateFence(id: string, patch: unknown): Promise<FenceWire> {
    return this.request("PATCH", `/geofences/${id}`, patch);
  }
  deleteFence(id: string): Promise<void> {
    return this.request("DELETE", `/geofences/${id}`);
  }

  // avatar pass-through
  putAvatar(dishId: string, blob: unknown): Promise<{ dish_id: string; blob: unknown }> {
    return this.request("PUT", `/dishes/${dishId}/avatar`, { blob });
  }
  getAvatar(dishId: string): Promise<{ dish_id: string; blob: unknown }> {
    return this.request("GET", `/dishes/${dishId}/avatar`);
  }

  // analytics
  kpis(windowFrom?: string, windowTo?: string): Promise<KpiReportWire> {
    const params = new URLSearchParams();
    if (windowFrom) params.set("from", windowFrom);
    if (windowTo) params.set("to", windowTo);
    const query = params.toString();
    return this.request("GET", `/kpis${query ? "?" + query : ""}`);
  }
  phaseHistogram(): Promise<PhaseHistogram> {
    return this.request("GET", "/analytics/phases");
  }
  importCorpus(ndjson: string): Promise<{ imported: number }> {
    return this.request("POST", "/analytics/corpus", undefined, ndjson);
  }
}
