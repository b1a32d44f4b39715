/** Wire types mirroring the service's JSON documents. */

export interface AttributeDoc {
  name: string;
  kind: string;
}

export interface NodeTypeDoc {
  id: string;
  name: string;
  attributes: AttributeDoc[];
  label_attribute: string;
  origin: string;
}

export interface EdgeTypeDoc {
  id: string;
  name: string;
  source_type: string;
  target_type: string;
  reverse_of: string | null;
  origin: string;
}

export interface SchemaDoc {
  node_types: NodeTypeDoc[];
  edge_types: EdgeTypeDoc[];
}

export interface ColumnDoc {
  id: string;
  header: string;
  kind: "base_attribute" | "participating" | "neighbor";
  visible: boolean;
}

export interface EntityRefDoc {
  node: string;
  label: string;
}

export interface RefCellDoc {
  refs: EntityRefDoc[];
  count: number;
}

export type CellDoc = RefCellDoc | string | number | boolean | null;

export interface RowDoc {
  key: string;
  cells: Record<string, CellDoc>;
}

export interface PredicateDoc {
  target: { kind: string; name?: string; edge_type?: string };
  op: string;
  value: unknown;
}

export interface OccurrenceDoc {
  id: string;
  node_type: string;
  alias: string;
  predicates: PredicateDoc[];
}

export interface PatternDoc {
  primary: string;
  occurrences: OccurrenceDoc[];
  edges: { edge_type: string; from: string; to: string }[];
}

export interface HistoryStepDoc {
  step: number;
  kind: string;
  args: Record<string, unknown>;
  description: string;
}

export interface PageDoc {
  session: string;
  columns: ColumnDoc[];
  rows: RowDoc[];
  page: number;
  page_size: number;
  total_row_count: number;
  pattern: PatternDoc;
  history: HistoryStepDoc[];
}

export interface RefsDoc {
  refs: EntityRefDoc[];
  count: number;
  page: number;
  page_size: number;
}

export interface ErrorEnvelope {
  error: { code: string; message: string; detail?: unknown };
}

export interface ActionEnvelope {
  kind: string;
  args: Record<string, unknown>;
}

export function isRefCell(cell: CellDoc): cell is RefCellDoc {
  return typeof cell === "object" && cell !== null && "refs" in cell;
}
