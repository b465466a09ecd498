/** Avatar stub panel: the avatar itself is edited in an external tool;
 *  the console only stores and retrieves the opaque blob. */

import { ApiClient, ApiError } from "./api";
import { h } from "./dom";

export class AvatarPanel {
  textarea: HTMLTextAreaElement;
  status: HTMLElement;

  constructor(
    private client: ApiClient,
    root: HTMLElement,
  ) {
    this.textarea = h("textarea", { rows: "6", class: "avatar-blob" }) as HTMLTextAreaElement;
    this.status = h("p", { class: "caption" });
    const dishInput = h("input", { type: "text", placeholder: "dish id" }) as HTMLInputElement;
    root.append(
      h("p", { class: "caption" }, "Paste the avatar blob exported from your avatar tool; it is stored as-is."),
      dishInput,
      this.textarea,
      h("button", { type: "button", onclick: () => void this.save(dishInput.value) }, "Store"),
      h("button", { type: "button", onclick: () => void this.load(dishInput.value) }, "Load"),
      this.status,
    );
  }

  async save(dishId: string): Promise<void> {
    await this.client.putAvatar(dishId, this.textarea.value);
    this.status.textContent = `stored avatar for ${dishId}`;
  }

  async load(dishId: string): Promise<void> {
    try {
      const result = await this.client.getAvatar(dishId);
      this.textarea.value = String(result.blob ?? "");
      this.status.textContent = `loaded avatar of ${dishId}`;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.status.textContent = `no avatar stored for ${dishId} yet`;
        return;
      }
      throw err;
    }
  }
}
