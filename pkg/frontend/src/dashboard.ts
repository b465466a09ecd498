/** KPI dashboard. Every number shown here comes verbatim from the
 *  analytics endpoints; the console does no aggregation of its own. Each
 *  figure carries a one-line plain-language caption. */

import { ApiClient, KpiReportWire, RankedRow } from "./api";
import { clear, h } from "./dom";

export function formatRate(report: KpiReportWire): string {
  return report.fallback_rate_pct === undefined ? "n/a" : `${report.fallback_rate_pct.toFixed(1)}%`;
}

function barChart(title: string, caption: string, counts: Record<string, number>, order?: string[]): HTMLElement {
  const keys = order ?? Object.keys(counts);
  const max = Math.max(1, ...keys.map((key) => counts[key] ?? 0));
  const bars = keys.map((key) => {
    const value = counts[key] ?? 0;
    return h(
      "div",
      { class: "bar-row" },
      h("span", { class: "bar-label" }, key.replaceAll("_", " ")),
      h("div", { class: "bar", style: `width:${(100 * value) / max}%` }),
      h("span", { class: "bar-value", "data-kpi": `${title}:${key}` }, String(value)),
    );
  });
  return h("section", { class: "chart" }, h("h3", {}, title), h("p", { class: "caption" }, caption), ...bars);
}

function rankedTable(
  title: string,
  caption: string,
  rows: RankedRow[],
  columns: [string, keyof RankedRow][],
): HTMLElement {
  const header = h("tr", {}, h("th", {}, "dish"), ...columns.map(([label]) => h("th", {}, label)));
  const body = rows.slice(0, 10).map((row) =>
    h(
      "tr",
      {},
      h("td", {}, row.dish_id),
      ...columns.map(([, key]) => h("td", { "data-kpi": `${title}:${row.dish_id}` }, String(row[key] ?? 0))),
    ),
  );
  return h(
    "section",
    { class: "chart" },
    h("h3", {}, title),
    h("p", { class: "caption" }, caption),
    rows.length ? h("table", {}, header, ...body) : h("p", { class: "zero" }, "nothing in this window"),
  );
}

export function renderDashboard(root: HTMLElement, report: KpiReportWire): void {
  clear(root);
  if (report.total_inquiries === 0) {
    root.append(
      h(
        "div",
        { class: "zero-state" },
        h("h3", {}, "No inquiries in this window"),
        h("p", { class: "caption" }, "Once guests start chatting with your dishes, numbers show up here."),
        h("p", { "data-kpi": "registered_users" }, `Registered users: ${report.registered_users}`),
        h("p", { "data-kpi": "active_users" }, `Active users: ${report.active_users}`),
      ),
    );
    return;
  }
  root.append(
    h(
      "div",
      { class: "headline" },
      h("div", { class: "figure" },
        h("span", { class: "figure-value", "data-kpi": "fallback_rate" }, formatRate(report)),
        h("span", { class: "caption" }, "share of questions the chatbots could not answer"),
      ),
      h("div", { class: "figure" },
        h("span", { class: "figure-value", "data-kpi": "total_inquiries" }, String(report.total_inquiries)),
        h("span", { class: "caption" }, "questions asked in this window"),
      ),
      h("div", { class: "figure" },
        h("span", { class: "figure-value", "data-kpi": "responded" }, String(report.responded)),
        h("span", { class: "caption" }, "of them got an answer"),
      ),
    ),
    barChart(
      "What guests use the chat for",
      "every question sorted into fun, food facts, or app control",
      report.category_totals,
      ["entertainment", "information_advice", "control"],
    ),
    barChart(
      "When guests chat",
      "questions by visit phase, from before arriving to after the meal",
      report.phase_totals,
      ["prearrival", "postarrival_preprocess", "while_dining", "after_dining"],
    ),
    rankedTable(
      "Most talked to dishes",
      "dishes ranked by how many questions they got",
      report.most_talked_to,
      [["questions", "inquiries"]],
    ),
    rankedTable(
      "Most popular items",
      "dishes ranked by how many different guests chatted with them",
      report.most_popular,
      [["guests", "distinct_users"]],
    ),
    rankedTable(
      "Trending local menu items",
      "local dishes: chats in the last 7 days next to the 7 days before",
      report.trending_local,
      [["last 7 days", "recent"], ["7 days before", "prior"]],
    ),
    h(
      "section",
      { class: "chart" },
      h("h3", {}, "User statistics"),
      h("p", { class: "caption" }, "who is on the platform and who was around recently"),
      h("p", { "data-kpi": "registered_users" }, `Registered users: ${report.registered_users}`),
      h("p", { "data-kpi": "active_users" }, `Active users: ${report.active_users}`),
    ),
  );
}

export class Dashboard {
  constructor(
    private client: ApiClient,
    public root: HTMLElement,
  ) {}

  async refresh(windowFrom?: string, windowTo?: string): Promise<KpiReportWire> {
    const report = await this.client.kpis(windowFrom, windowTo);
    renderDashboard(this.root, report);
    return report;
  }
}
