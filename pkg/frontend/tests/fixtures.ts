import { readFileSync } from "node:fs";

import type { BacklogDoc, GridDoc, StatusDoc } from "../src/types.js";

function load<T>(name: string): T {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8")) as T;
}

/** Captured from a real service run of the walkthrough scenario:
 *  one induction, one abduction over three hypotheses, one deduction
 *  promoted to induction. */
export const gridBefore = load<GridDoc>("grid_before_promotion.json");
export const gridAfter = load<GridDoc>("grid_after_promotion.json");
export const statusesBefore = keyByHypothesis(
  load<Record<string, StatusDoc>>("statuses_before_promotion.json"),
);
export const statusesAfter = keyByHypothesis(
  load<Record<string, StatusDoc>>("statuses_after_promotion.json"),
);
export const backlogAfter = load<BacklogDoc>("backlog_after_promotion.json");
export const ids = load<Record<string, string>>("scenario_ids.json");

function keyByHypothesis(byName: Record<string, StatusDoc>): Record<string, StatusDoc> {
  const result: Record<string, StatusDoc> = {};
  for (const status of Object.values(byName)) {
    result[status.hypothesis] = status;
  }
  return result;
}
