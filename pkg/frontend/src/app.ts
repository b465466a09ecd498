/** Console shell: connect screen, restaurant picker, three tabs. */

import { ApiClient } from "./api";
import { AvatarPanel } from "./avatar-panel";
import { Dashboard } from "./dashboard";
import { DishEditor } from "./dish-editor";
import { clear, h } from "./dom";
import { FenceEditor } from "./fence-editor";
import { ConsoleSession } from "./session";

export class ConsoleApp {
  session: ConsoleSession;
  client: ApiClient | null = null;

  constructor(private root: HTMLElement) {
    this.session = typeof localStorage === "undefined" ? new ConsoleSession() : ConsoleSession.restore();
  }

  start(): void {
    this.renderConnect();
  }

  renderConnect(): void {
    clear(this.root);
    const url = h("input", { type: "text", value: this.session.state.serverUrl }) as HTMLInputElement;
    const token = h("input", { type: "password", value: this.session.state.token }) as HTMLInputElement;
    const error = h("p", { class: "fence-error" });
    this.root.append(
      h(
        "div",
        { class: "connect" },
        h("h2", {}, "Connect to your tabletalk server"),
        h("label", {}, "Server URL", url),
        h("label", {}, "Access token", token),
        h(
          "button",
          {
            type: "button",
            onclick: async () => {
              try {
                this.client = this.session.connect(url.value, token.value);
                await this.client.listRestaurants();
                if (typeof localStorage !== "undefined") this.session.save();
                await this.renderPicker();
              } catch (err) {
                error.textContent = String(err);
              }
            },
          },
          "Connect",
        ),
        error,
      ),
    );
  }

  async renderPicker(): Promise<void> {
    if (!this.client) return;
    clear(this.root);
    const restaurants = await this.client.listRestaurants();
    const list = h("div", { class: "restaurant-list" });
    for (const restaurant of restaurants) {
      list.append(
        h(
          "button",
          {
            type: "button",
            class: restaurant.enabled ? "restaurant" : "restaurant disabled",
            onclick: () => {
              this.session.selectRestaurant(restaurant.id);
              void this.renderWorkspace(restaurant.id);
            },
          },
          restaurant.name,
        ),
      );
    }
    this.root.append(h("h2", {}, "Pick a restaurant"), list);
  }

  async renderWorkspace(restaurantId: string): Promise<void> {
    if (!this.client) return;
    clear(this.root);
    const tabs = h("nav", { class: "tabs" });
    const body = h("div", { class: "tab-body" });
    this.root.append(tabs, body);

    const views: Record<string, () => Promise<void>> = {
      Dishes: async () => {
        clear(body);
        const editor = new DishEditor(this.client!, restaurantId, body);
        await editor.refresh();
      },
      Geofences: async () => {
        clear(body);
        const editor = new FenceEditor(this.client!, restaurantId, body);
        await editor.refresh();
      },
      Dashboard: async () => {
        clear(body);
        const controls = h("div", { class: "window-controls" });
        const from = h("input", { type: "datetime-local" }) as HTMLInputElement;
        const to = h("input", { type: "datetime-local" }) as HTMLInputElement;
        const chartRoot = h("div", {});
        const dashboard = new Dashboard(this.client!, chartRoot);
        controls.append(
          h("label", {}, "From", from),
          h("label", {}, "To", to),
          h(
            "button",
            {
              type: "button",
              onclick: () =>
                void dashboard.refresh(
                  from.value ? new Date(from.value).toISOString() : undefined,
                  to.value ? new Date(to.value).toISOString() : undefined,
                ),
            },
            "Apply window",
          ),
        );
        body.append(controls, chartRoot);
        await dashboard.refresh();
      },
      Avatar: async () => {
        clear(body);
        new AvatarPanel(this.client!, body);
      },
    };

    for (const name of Object.keys(views)) {
      tabs.append(h("button", { type: "button", onclick: () => void views[name]() }, name));
    }
    await views.Dishes();
  }
}

declare global {
  interface Window {
    consoleApp?: ConsoleApp;
  }
}

if (typeof document !== "undefined" && document.getElementById("console-root")) {
  const app = new ConsoleApp(document.getElementById("console-root") as HTMLElement);
  window.consoleApp = app;
  app.start();
}
