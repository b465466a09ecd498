/** Dish editor: one form, one field per dish attribute, nothing hidden
 *  from the server. Rarely-touched fields sit in a collapsed "advanced"
 *  section so the common path stays a short page. */

import { ApiClient, ApiError, DishPayload, DishWire, NetworkError } from "./api";
import { clear, h } from "./dom";

export const SEASONAL_EFFECTS = ["none", "spring", "easter", "summer", "fall", "winter"] as const;
export const DIET_CLASSES = ["vegan", "vegetarian", "meat"] as const;
export const AVATAR_GENDERS = ["male", "female", "unspecified"] as const;

/** Which form field a server violation belongs to. */
export function violationField(violation: string): string {
  if (violation.includes("price")) return "price_minor";
  if (violation.includes("ingredients")) return "ingredients";
  if (violation.includes("restaurant")) return "restaurant_id";
  return "";
}

function select(name: string, options: readonly string[]): HTMLSelectElement {
  const el = document.createElement("select");
  el.name = name;
  for (const option of options) {
    el.append(h("option", { value: option }, option));
  }
  return el;
}

function field(labelText: string, input: HTMLElement, hint?: string): HTMLElement {
  const wrap = h("label", { class: "field" }, h("span", { class: "field-label" }, labelText), input);
  if (hint) wrap.append(h("small", {}, hint));
  wrap.append(h("span", { class: "field-error", "data-for": (input as HTMLInputElement).name ?? "" }));
  return wrap;
}

export function buildDishForm(): HTMLFormElement {
  const form = document.createElement("form");
  form.className = "dish-form";
  form.noValidate = true;

  const main = h("div", { class: "form-main" });
  main.append(
    field("Name", h("input", { name: "name", type: "text" })),
    field("Nickname", h("input", { name: "nickname", type: "text" }), "what the chat persona calls itself"),
    field("Image URL", h("input", { name: "image_ref", type: "text" })),
    field("Ingredients", h("textarea", { name: "ingredients", rows: "4" }), "one per line, first to last"),
    field("Description", h("textarea", { name: "description", rows: "2" })),
    field("Price (cents)", h("input", { name: "price_minor", type: "number", step: "1" })),
    field("Diet", select("diet_class", DIET_CLASSES)),
    field("Allergens", h("input", { name: "allergens", type: "text" }), "comma separated codes, e.g. gluten, mustard"),
  );

  const advanced = h(
    "details",
    { class: "form-advanced" },
    h("summary", {}, "Advanced"),
    field("Avatar gender", select("avatar_gender", AVATAR_GENDERS), "picks the avatar voice"),
    field("Cuisine", h("input", { name: "cuisine", type: "text" })),
    field("Seasonal swipe effect", select("seasonal_effect", SEASONAL_EFFECTS)),
    field("Local ingredients", h("input", { name: "local", type: "checkbox" })),
    field("Organic ingredients", h("input", { name: "organic", type: "checkbox" })),
    field("Available (uncheck to temporarily disable)", h("input", { name: "active", type: "checkbox" })),
  );
  (advanced.querySelector('input[name="active"]') as HTMLInputElement).checked = true;

  form.append(
    main,
    advanced,
    h("div", { class: "form-errors" }),
    h("button", { type: "submit" }, "Save dish"),
  );
  return form;
}

function input<T extends HTMLInputElement | HTMLTextAreaElement | HTMLSelectElement>(
  form: HTMLFormElement,
  name: string,
): T {
  return form.querySelector(`[name="${name}"]`) as T;
}

export function readDishForm(form: HTMLFormElement): DishPayload {
  const text = (name: string) => input<HTMLInputElement>(form, name).value.trim();
  const checked = (name: string) => input<HTMLInputElement>(form, name).checked;
  return {
    name: text("name"),
    nickname: text("nickname") || null,
    image_ref: text("image_ref"),
    ingredients: input<HTMLTextAreaElement>(form, "ingredients")
      .value.split("\n")
      .map((line) => line.trim())
      .filter(Boolean),
    description: input<HTMLTextAreaElement>(form, "description").value,
    price_minor: Number(text("price_minor") || "0"),
    diet_class: input<HTMLSelectElement>(form, "diet_class").value as DishPayload["diet_class"],
    allergens: text("allergens")
      .split(",")
      .map((code) => code.trim().toLowerCase())
      .filter(Boolean),
    avatar_gender: input<HTMLSelectElement>(form, "avatar_gender").value as DishPayload["avatar_gender"],
    cuisine: text("cuisine"),
    seasonal_effect: input<HTMLSelectElement>(form, "seasonal_effect").value as DishPayload["seasonal_effect"],
    local: checked("local"),
    organic: checked("organic"),
    active: checked("active"),
  };
}

export function populateDishForm(form: HTMLFormElement, dish: DishWire): void {
  input<HTMLInputElement>(form, "name").value = dish.name;
  input<HTMLInputElement>(form, "nickname").value = dish.nickname ?? "";
  input<HTMLInputElement>(form, "image_ref").value = dish.image_ref;
  input<HTMLTextAreaElement>(form, "ingredients").value = dish.ingredients.join("\n");
  input<HTMLTextAreaElement>(form, "description").value = dish.description;
  input<HTMLInputElement>(form, "price_minor").value = String(dish.price_minor);
  input<HTMLSelectElement>(form, "diet_class").value = dish.diet_class;
  input<HTMLInputElement>(form, "allergens").value = dish.allergens.join(", ");
  input<HTMLSelectElement>(form, "avatar_gender").value = dish.avatar_gender;
  input<HTMLInputElement>(form, "cuisine").value = dish.cuisine;
  input<HTMLSelectElement>(form, "seasonal_effect").value = dish.seasonal_effect;
  input<HTMLInputElement>(form, "local").checked = dish.local;
  input<HTMLInputElement>(form, "organic").checked = dish.organic;
  input<HTMLInputElement>(form, "active").checked = dish.active;
}

export function showViolations(form: HTMLFormElement, violations: string[]): void {
  clearErrors(form);
  const leftovers: string[] = [];
  for (const violation of violations) {
    const target = form.querySelector(`.field-error[data-for="${violationField(violation)}"]`);
    if (target) {
      target.textContent = violation;
    } else {
      leftovers.push(violation);
    }
  }
  const box = form.querySelector(".form-errors");
  if (box && leftovers.length) box.textContent = leftovers.join("; ");
}

export function clearErrors(form: HTMLFormElement): void {
  form.querySelectorAll(".field-error").forEach((el) => (el.textContent = ""));
  const box = form.querySelector(".form-errors");
  if (box) box.textContent = "";
}

export class DishEditor {
  root: HTMLElement;
  form: HTMLFormElement;
  listEl: HTMLElement;
  banner: HTMLElement;
  editingId: string | null = null;

  constructor(
    private client: ApiClient,
    private restaurantId: string,
    root: HTMLElement,
  ) {
    this.root = root;
    this.banner = h("div", { class: "banner", hidden: true });
    this.listEl = h("div", { class: "dish-list" });
    this.form = buildDishForm();
    this.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.save();
    });
    const newButton = h("button", { type: "button", onclick: () => this.startNew() }, "New dish");
    root.append(this.banner, this.listEl, newButton, this.form);
  }

  async refresh(): Promise<void> {
    const dishes = await this.client.listDishes(this.restaurantId);
    clear(this.listEl);
    for (const dish of dishes) {
      const row = h(
        "div",
        { class: dish.active ? "dish-row" : "dish-row disabled", "data-dish": dish.id },
        h("span", { class: "dish-name" }, dish.name),
        dish.dedicated_fence ? h("span", { class: "badge" }, "own fence") : null,
        dish.active ? null : h("span", { class: "badge muted" }, "disabled"),
        h("button", { type: "button", onclick: () => void this.edit(dish.id) }, "Edit"),
        h(
          "button",
          { type: "button", onclick: () => void this.toggleActive(dish) },
          dish.active ? "Disable" : "Enable",
        ),
      );
      this.listEl.append(row);
    }
  }

  startNew(): void {
    this.editingId = null;
    this.form.reset();
    (this.form.querySelector('input[name="active"]') as HTMLInputElement).checked = true;
    clearErrors(this.form);
  }

  async edit(dishId: string): Promise<void> {
    const dish = await this.client.getDish(dishId);
    this.editingId = dishId;
    populateDishForm(this.form, dish);
    clearErrors(this.form);
  }

  async toggleActive(dish: DishWire): Promise<void> {
    await this.client.updateDish(dish.id, { active: !dish.active });
    await this.refresh();
  }

  async save(): Promise<DishWire | null> {
    clearErrors(this.form);
    this.banner.hidden = true;
    const payload = readDishForm(this.form);
    try {
      const saved = this.editingId
        ? await this.client.updateDish(this.editingId, payload)
        : await this.client.createDish(this.restaurantId, payload);
      this.editingId = saved.id;
      await this.refresh();
      return saved;
    } catch (err) {
      if (err instanceof ApiError) {
        showViolations(this.form, err.violations.length ? err.violations : [err.message]);
      } else if (err instanceof NetworkError) {
        // keep the form exactly as typed; only surface the banner
        this.banner.textContent = `Could not reach the server; your edits are preserved. (${err.message})`;
        this.banner.hidden = false;
      } else {
        throw err;
      }
      return null;
    }
  }
}
