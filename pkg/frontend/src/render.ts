/** Pure HTML-string renderers for the server's page documents.
 *
 * The view never recomputes query semantics: every row, count, and ordering
 * comes straight from the document. Interactive elements carry data-gesture
 * attributes; main.ts wires them with a single delegated click handler.
 */

import type {
  HistoryStepDoc,
  PageDoc,
  PatternDoc,
  PredicateDoc,
  SchemaDoc,
} from "./types.js";
import { isRefCell } from "./types.js";

export const REF_DISPLAY_LIMIT = 5;

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function attrValue(text: string): string {
  return escapeHtml(text).replace(/'/g, "&#39;");
}

export function renderTableList(schema: SchemaDoc): string {
  const items = schema.node_types
    .map(
      (nt) =>
        `<li><button class="table-link" data-gesture="open-table" ` +
        `data-node-type="${attrValue(nt.id)}">${escapeHtml(nt.name)}</button></li>`,
    )
    .join("");
  return `<ul class="table-list">${items}</ul>`;
}

function describePredicate(pred: PredicateDoc): string {
  const subject =
    pred.target.kind === "attribute"
      ? pred.target.name ?? "?"
      : pred.target.kind === "neighbor_label"
        ? `label(${pred.target.edge_type ?? "?"})`
        : "node";
  return `${subject} ${pred.op} ${JSON.stringify(pred.value)}`;
}

function columnMenu(doc: PageDoc, columnId: string, kind: string): string {
  const entries: string[] = [
    `<button data-gesture="sort-menu" data-column="${attrValue(columnId)}" data-direction="asc">sort ↑</button>`,
    `<button data-gesture="sort-menu" data-column="${attrValue(columnId)}" data-direction="desc">sort ↓</button>`,
    `<button data-gesture="hide-column" data-column="${attrValue(columnId)}" data-visible="false">hide</button>`,
  ];
  if (kind === "base_attribute") {
    entries.push(`<button data-gesture="filter-column" data-column="${attrValue(columnId)}">filter…</button>`);
  } else {
    entries.push(`<button data-gesture="pivot-menu" data-column="${attrValue(columnId)}">pivot</button>`);
  }
  return `<span class="column-menu">${entries.join("")}</span>`;
}

function renderCell(doc: PageDoc, rowKey: string, columnId: string): string {
  const row = doc.rows.find((r) => r.key === rowKey)!;
  const cell = row.cells[columnId];
  if (cell === undefined || cell === null) {
    return `<td class="cell null-cell"></td>`;
  }
  if (!isRefCell(cell)) {
    return `<td class="cell base-cell">${escapeHtml(String(cell))}</td>`;
  }
  const labels = cell.refs
    .slice(0, REF_DISPLAY_LIMIT)
    .map(
      (ref) =>
        `<button class="ref-label" data-gesture="label-click" ` +
        `data-node="${attrValue(ref.node)}">${escapeHtml(ref.label)}</button>`,
    );
  const overflow =
    cell.count > REF_DISPLAY_LIMIT
      ? `<span class="ref-overflow">+${cell.count - REF_DISPLAY_LIMIT}</span>`
      : "";
  const badge =
    `<button class="count-badge" data-gesture="count-badge-click" ` +
    `data-row="${attrValue(rowKey)}" data-column="${attrValue(columnId)}">${cell.count}</button>`;
  return `<td class="cell ref-cell">${labels.join("")}${overflow}${badge}</td>`;
}

export function renderTable(doc: PageDoc): string {
  const visible = doc.columns.filter((c) => c.visible);
  const hidden = doc.columns.filter((c) => !c.visible);

  if (doc.rows.length === 0) {
    const primary = doc.pattern.occurrences.find((o) => o.id === doc.pattern.primary);
    const filters = (primary?.predicates ?? []).map(describePredicate);
    const filterText = filters.length
      ? `active filters: ${filters.map(escapeHtml).join("; ")}`
      : "no active filters";
    return `<div class="empty-state">No matching rows. <span class="active-filters">${filterText}</span></div>`;
  }

  const headerCells = visible
    .map(
      (c) =>
        `<th class="col-${c.kind}" data-column="${attrValue(c.id)}">` +
        `${escapeHtml(c.header)}${columnMenu(doc, c.id, c.kind)}</th>`,
    )
    .join("");
  const hiddenMenu = hidden.length
    ? `<div class="hidden-columns">hidden: ${hidden
        .map(
          (c) =>
            `<button data-gesture="hide-column" data-column="${attrValue(c.id)}" ` +
            `data-visible="true">${escapeHtml(c.header)}</button>`,
        )
        .join("")}</div>`
    : "";

  const bodyRows = doc.rows
    .map((row) => {
      const cells = visible.map((c) => renderCell(doc, row.key, c.id)).join("");
      return `<tr class="data-row" data-row-key="${attrValue(row.key)}">${cells}</tr>`;
    })
    .join("");

  const paging =
    `<div class="paging">page ${doc.page} — ` +
    `${doc.rows.length} of ${doc.total_row_count} rows</div>`;
  return (
    `<table class="etable"><thead><tr>${headerCells}</tr></thead>` +
    `<tbody>${bodyRows}</tbody></table>${hiddenMenu}${paging}`
  );
}

export function renderPattern(pattern: PatternDoc): string {
  const boxes = pattern.occurrences
    .map((occ) => {
      const primary = occ.id === pattern.primary ? " primary" : "";
      const badges = occ.predicates
        .map((p) => `<span class="condition-badge">${escapeHtml(describePredicate(p))}</span>`)
        .join("");
      return (
        `<div class="occurrence-box${primary}" data-occurrence="${attrValue(occ.id)}">` +
        `<span class="occurrence-alias">${escapeHtml(occ.alias)}</span>${badges}</div>`
      );
    })
    .join("");
  const links = pattern.edges
    .map(
      (e) =>
        `<div class="pattern-link" data-from="${attrValue(e.from)}" ` +
        `data-to="${attrValue(e.to)}">${escapeHtml(e.edge_type)}</div>`,
    )
    .join("");
  return `<div class="pattern-diagram">${boxes}${links}</div>`;
}

export function renderHistory(history: HistoryStepDoc[]): string {
  const items = history
    .map(
      (h) =>
        `<li><button class="history-step" data-gesture="history-click" ` +
        `data-step="${h.step}">${h.step}. ${escapeHtml(h.description)}</button></li>`,
    )
    .join("");
  return `<ol class="history-list">${items}</ol>`;
}

export function renderError(message: string): string {
  return `<div class="error-banner" role="alert">${escapeHtml(message)}</div>`;
}

/** Row keys in display order — used by tests to compare view against API. */
export function renderedRowKeys(html: string): string[] {
  const keys: string[] = [];
  const pattern = /data-row-key="([^"]*)"/g;
  let match: RegExpExecArray | null;
  while ((match = pattern.exec(html)) !== null) {
    keys.push(match[1]);
  }
  return keys;
}
