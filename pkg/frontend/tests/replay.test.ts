// Dashboard replay: projecting the recorded event stream of a finished run
// must land on exactly the statuses the server reports, and badges seeded
// from the stored report must carry the report's own numbers.

import { describe, expect, it } from "vitest";
import {
  applyEvents,
  badgeKey,
  initialViewState,
  loadReportBadges,
  scoreFromAxisReport,
} from "../src/state.js";
import { FIXTURE_DETAIL, FIXTURE_EVENTS, FIXTURE_REPORT } from "./helpers.js";

describe("fixture replay", () => {
  it("final component statuses equal the run detail", () => {
    const state = initialViewState(FIXTURE_DETAIL.run_id, FIXTURE_DETAIL.plan);
    applyEvents(state, FIXTURE_EVENTS);

    for (const [name, status] of Object.entries(FIXTURE_DETAIL.statuses)) {
      expect(state.statuses.get(name), name).toBe(status);
    }
    // plan members without a stored status are the pre-documented ones the
    // run skipped; the stream still reports them
    for (const name of FIXTURE_DETAIL.plan) {
      if (!(name in FIXTURE_DETAIL.statuses)) {
        expect(state.statuses.get(name), name).toBe("skipped");
      }
    }
    expect(state.done).toBe(true);
    expect(state.runStatus).toBe("completed");
    expect(state.approved).toBe(FIXTURE_DETAIL.processed);
    expect(state.order).toEqual(FIXTURE_DETAIL.plan);
  });

  it("every event advances lastSeq to the final sequence number", () => {
    const state = initialViewState(FIXTURE_DETAIL.run_id, FIXTURE_DETAIL.plan);
    applyEvents(state, FIXTURE_EVENTS);
    const last = FIXTURE_EVENTS[FIXTURE_EVENTS.length - 1];
    expect(last?.kind).toBe("run_done");
    expect(state.lastSeq).toBe(last?.seq);
  });

  it("processed components accumulate an agent-step transcript", () => {
    const state = initialViewState(FIXTURE_DETAIL.run_id, FIXTURE_DETAIL.plan);
    applyEvents(state, FIXTURE_EVENTS);
    for (const name of Object.keys(FIXTURE_DETAIL.statuses)) {
      const steps = state.steps.get(name) ?? [];
      expect(steps.length, name).toBeGreaterThan(0);
      expect(steps[steps.length - 1]).toBe(`done: ${FIXTURE_DETAIL.statuses[name]}`);
    }
  });

  it("badge scores seeded from the stored report equal the report file", () => {
    const badges = loadReportBadges(FIXTURE_REPORT);
    const components = FIXTURE_REPORT["components"] as Record<
      string,
      Record<string, Record<string, unknown>>
    >;
    let checked = 0;
    for (const [name, axes] of Object.entries(components)) {
      for (const axis of ["completeness", "helpfulness", "truthfulness"] as const) {
        const report = axes[axis];
        if (!report) {
          continue;
        }
        const expected = scoreFromAxisReport(axis, report);
        const badge = badges.get(badgeKey(name, axis));
        if (expected === null) {
          expect(badge, `${name}/${axis}`).toBeUndefined();
          continue;
        }
        expect(badge?.score, `${name}/${axis}`).toBe(expected);
        // cross-check the extractor against the raw report keys
        if (axis === "completeness") {
          expect(badge?.score).toBe(report["score"]);
        }
        checked += 1;
      }
    }
    expect(checked).toBeGreaterThanOrEqual(Object.keys(components).length);
    // a badge exists only where the report has a number: no invented scores
    expect(badges.size).toBe(checked);
  });
});
