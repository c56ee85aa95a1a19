import type { Client, PromotionRequest } from "./api.js";
import { renderBacklog, renderGrid } from "./render.js";
import type { BacklogDoc, GridDoc, StatusDoc } from "./types.js";

/** Fetch-and-render orchestration, kept free of DOM wiring so the refresh
 *  and form flows are testable against a fake client. */

export interface ViewState {
  grid: GridDoc;
  statuses: Record<string, StatusDoc>;
  backlog: BacklogDoc;
}

export type ViewClient = Pick<
  Client,
  "getGrid" | "getStatus" | "getBacklog" | "createContainer" | "link" | "setWinner" | "promote"
>;

export async function loadView(client: ViewClient): Promise<ViewState> {
  const grid = await client.getGrid();
  const statuses: Record<string, StatusDoc> = {};
  for (const row of grid.rows) {
    statuses[row.id] = await client.getStatus(row.id);
  }
  const backlog = await client.getBacklog();
  return { grid, statuses, backlog };
}

export function viewHtml(state: ViewState): { grid: string; backlog: string } {
  return {
    grid: renderGrid(state.grid, state.statuses),
    backlog: renderBacklog(state.backlog),
  };
}

/** Create a container from form fields; returns the server-assigned id. */
export async function submitContainer(
  client: ViewClient,
  kind: string,
  fields: Record<string, string>,
): Promise<string> {
  const payload: Record<string, unknown> = {};
  for (const [key, raw] of Object.entries(fields)) {
    const value = raw.trim();
    if (value === "") continue;
    payload[key] = key === "confidence" ? Number(value) : value;
  }
  const created = await client.createContainer(kind, payload);
  return created.id;
}

export async function submitPromotion(
  client: ViewClient,
  test: string,
  observation: string,
  outcome: string,
  confidence: string,
): Promise<string> {
  const request: PromotionRequest = { observation, outcome };
  if (confidence.trim() !== "") {
    request.confidence = Number(confidence);
  }
  const result = await client.promote(test, request);
  return result.successor;
}
