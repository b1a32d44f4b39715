import { describe, expect, it } from "vitest";
import { envelopeFor, type Gesture } from "../src/dispatch.js";

const CASES: [Gesture, string][] = [
  [{ gesture: "open-table", nodeType: "Papers" }, "Open"],
  [{ gesture: "label-click", node: "Authors:1" }, "Single"],
  [{ gesture: "count-badge-click", row: "Papers:1", column: "n:Papers->Authors" }, "Seeall"],
  [{ gesture: "pivot-menu", column: "n:Papers->Authors" }, "Pivot"],
  [
    {
      gesture: "filter-form",
      predicates: [{ target: { kind: "attribute", name: "year" }, op: ">", value: 2014 }],
    },
    "Filter",
  ],
  [{ gesture: "sort-menu", column: "a:year", direction: "desc" }, "Sort"],
  [{ gesture: "hide-column", column: "a:year", visible: false }, "SetVisibility"],
  [{ gesture: "history-click", step: 2 }, "Revert"],
];

describe("envelopeFor", () => {
  it("maps each gesture kind to a distinct action kind", () => {
    const kinds = CASES.map(([gesture]) => envelopeFor(gesture).kind);
    expect(kinds).toEqual(CASES.map(([, kind]) => kind));
    expect(new Set(kinds).size).toBe(CASES.length);
  });

  it("carries gesture parameters into envelope args verbatim", () => {
    expect(envelopeFor({ gesture: "open-table", nodeType: "Papers" }).args).toEqual({
      node_type: "Papers",
    });
    expect(
      envelopeFor({
        gesture: "count-badge-click",
        row: "Papers:1",
        column: "n:Papers->Authors",
      }).args,
    ).toEqual({ row: "Papers:1", column: "n:Papers->Authors" });
    expect(
      envelopeFor({ gesture: "sort-menu", column: "a:year", direction: "asc" }).args,
    ).toEqual({ column: "a:year", direction: "asc" });
    expect(envelopeFor({ gesture: "history-click", step: 3 }).args).toEqual({ step: 3 });
  });
});
