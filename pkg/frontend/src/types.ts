/** Wire formats served by the evident HTTP service, mirrored verbatim.
 *  The workbench never derives classification, placement, or status on its
 *  own; these shapes are the whole contract. */

export interface GridCellTest {
  id: string;
  kind: string;
  outcome: string;
  metric?: string;
  confidence?: number;
}

export interface GridAxisEntry {
  id: string;
  label: string;
}

export interface GridDoc {
  rows: GridAxisEntry[];
  columns: GridAxisEntry[];
  cells: Record<string, Record<string, GridCellTest[]>>;
  tbd: [string, string][];
}

export interface StatusDoc {
  hypothesis: string;
  per_test: Record<string, string>;
  summary: string;
}

export interface BacklogEntry {
  kind: string;
  row: string;
  column: string;
  test?: string;
  period_tag?: string;
}

export interface BacklogDoc {
  entries: BacklogEntry[];
}

export interface VerifyDoc {
  ok: boolean;
  events: number;
  first_bad_seq?: number;
}

export interface CreatedDoc {
  id: string;
}

export interface PromotionDoc {
  test: string;
  observation: string;
  successor: string;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  ids: string[];
}

export const PENDING = "PENDING";
