/** Browser entry point: boots the app and wires delegated click handling. */

import { ApiClient } from "./api.js";
import type { Gesture } from "./dispatch.js";
import { AppState } from "./state.js";
import {
  renderError,
  renderHistory,
  renderPattern,
  renderTable,
  renderTableList,
} from "./render.js";

function gestureFromElement(el: HTMLElement): Gesture | null {
  const kind = el.dataset.gesture;
  switch (kind) {
    case "open-table":
      return { gesture: "open-table", nodeType: el.dataset.nodeType! };
    case "label-click":
      return { gesture: "label-click", node: el.dataset.node! };
    case "count-badge-click":
      return {
        gesture: "count-badge-click",
        row: el.dataset.row!,
        column: el.dataset.column!,
      };
    case "pivot-menu":
      return { gesture: "pivot-menu", column: el.dataset.column! };
    case "sort-menu":
      return {
        gesture: "sort-menu",
        column: el.dataset.column!,
        direction: el.dataset.direction === "desc" ? "desc" : "asc",
      };
    case "hide-column":
      return {
        gesture: "hide-column",
        column: el.dataset.column!,
        visible: el.dataset.visible === "true",
      };
    case "history-click":
      return { gesture: "history-click", step: Number(el.dataset.step) };
    case "filter-column": {
      // The only gesture that needs extra input: a value for the predicate.
      const attr = el.dataset.column!.replace(/^a:/, "");
      const raw = window.prompt(`Filter: ${attr} contains / equals…`, "");
      if (raw === null || raw === "") return null;
      const asNumber = Number(raw);
      const value = raw.trim() !== "" && !Number.isNaN(asNumber) ? asNumber : raw;
      const op = typeof value === "number" ? "=" : "contains";
      return {
        gesture: "filter-form",
        predicates: [{ target: { kind: "attribute", name: attr }, op, value }],
      };
    }
    default:
      return null;
  }
}

export function boot(root: Document = document): void {
  const app = new AppState(new ApiClient(""));

  const tables = root.getElementById("tables")!;
  const grid = root.getElementById("grid")!;
  const pattern = root.getElementById("pattern")!;
  const history = root.getElementById("history")!;
  const errors = root.getElementById("errors")!;

  app.subscribe((state) => {
    if (state.schema) tables.innerHTML = renderTableList(state.schema);
    errors.innerHTML = state.error ? renderError(state.error) : "";
    if (state.page) {
      grid.innerHTML = renderTable(state.page);
      pattern.innerHTML = renderPattern(state.page.pattern);
      history.innerHTML = renderHistory(state.page.history);
    }
    root.body.classList.toggle("busy", state.busy);
  });

  root.body.addEventListener("click", (event) => {
    const target = (event.target as HTMLElement).closest<HTMLElement>("[data-gesture]");
    if (!target) return;
    const gesture = gestureFromElement(target);
    if (gesture) void app.dispatch(gesture);
  });

  void app.boot().catch((err) => {
    errors.innerHTML = renderError(String(err));
  });
}

if (typeof document !== "undefined" && document.getElementById("grid")) {
  boot();
}
