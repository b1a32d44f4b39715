/** Gesture-to-envelope mapping: each gesture produces exactly one envelope. */

import type { ActionEnvelope, PredicateDoc } from "./types.js";

export type Gesture =
  | { gesture: "open-table"; nodeType: string }
  | { gesture: "label-click"; node: string }
  | { gesture: "count-badge-click"; row: string; column: string }
  | { gesture: "pivot-menu"; column: string }
  | { gesture: "filter-form"; predicates: PredicateDoc[] }
  | { gesture: "sort-menu"; column: string; direction: "asc" | "desc" }
  | { gesture: "hide-column"; column: string; visible: boolean }
  | { gesture: "history-click"; step: number };

/** The bijection between interactive elements and action kinds. */
export function envelopeFor(gesture: Gesture): ActionEnvelope {
  switch (gesture.gesture) {
    case "open-table":
      return { kind: "Open", args: { node_type: gesture.nodeType } };
    case "label-click":
      return { kind: "Single", args: { node: gesture.node } };
    case "count-badge-click":
      return { kind: "Seeall", args: { row: gesture.row, column: gesture.column } };
    case "pivot-menu":
      return { kind: "Pivot", args: { column: gesture.column } };
    case "filter-form":
      return { kind: "Filter", args: { predicates: gesture.predicates } };
    case "sort-menu":
      return { kind: "Sort", args: { column: gesture.column, direction: gesture.direction } };
    case "hide-column":
      return { kind: "SetVisibility", args: { column: gesture.column, visible: gesture.visible } };
    case "history-click":
      return { kind: "Revert", args: { step: gesture.step } };
  }
}
