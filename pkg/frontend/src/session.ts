/** Console session: server URL, bearer token, selected restaurant. */

import { ApiClient } from "./api";

export interface SessionState {
  serverUrl: string;
  token: string;
  restaurantId: string | null;
}

const STORAGE_KEY = "tabletalk-console-session";

export class ConsoleSession {
  state: SessionState;

  constructor(state?: SessionState) {
    this.state = state ?? { serverUrl: "http://127.0.0.1:8037", token: "", restaurantId: null };
  }

  static restore(storage: Storage = localStorage): ConsoleSession {
    try {
      const raw = storage.getItem(STORAGE_KEY);
      if (raw) return new ConsoleSession(JSON.parse(raw));
    } catch {
      /* fall through to a fresh session */
    }
    return new ConsoleSession();
  }

  save(storage: Storage = localStorage): void {
    storage.setItem(STORAGE_KEY, JSON.stringify(this.state));
  }

  connect(serverUrl: string, token: string): ApiClient {
    this.state.serverUrl = serverUrl;
    this.state.token = token;
    return this.client();
  }

  client(): ApiClient {
    return new ApiClient(this.state.serverUrl, this.state.token);
  }

  selectRestaurant(id: string | null): void {
    this.state.restaurantId = id;
  }
}
