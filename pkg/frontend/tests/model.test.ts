import { describe, expect, it } from "vitest";

import {
  CategoryReport,
  DecisionDraft,
  buildPayload,
  nextFlagged,
  normalizePhi,
  orderQueue,
  validateDraft,
} from "../src/model.js";

function draft(overrides: Partial<DecisionDraft> = {}): DecisionDraft {
  return {
    category: "mugs",
    asset_id: "m1",
    action: "accept",
    alpha: null,
    phi_deg: null,
    reviewer: "rv",
    ...overrides,
  };
}

function report(category: string, consistent: boolean, pending = 0): CategoryReport {
  return {
    category,
    alpha_histogram: { "0": 0, "1": 1, "2": 0, "4": 0 },
    consistent,
    majority_alpha: 1,
    flagged_asset_ids: [],
    n_assets: 1,
    n_pending: pending,
  };
}

describe("normalizePhi", () => {
  it("keeps in-range values", () => {
    expect(normalizePhi(215)).toBe(215);
  });
  it("wraps negatives", () => {
    expect(normalizePhi(-10)).toBe(350);
  });
  it("wraps past a full turn", () => {
    expect(normalizePhi(370)).toBe(10);
    expect(normalizePhi(360)).toBe(0);
  });
});

describe("validateDraft", () => {
  it("accepts a plain accept", () => {
    expect(validateDraft(draft())).toEqual({});
  });

  it("blocks out-of-label-space alpha before any POST", () => {
    const errors = validateDraft(draft({ action: "override", alpha: 3, phi_deg: 10 }));
    expect(errors.alpha).toMatch(/0, 1, 2, 4/);
  });

  it("requires phi for overrides", () => {
    const errors = validateDraft(draft({ action: "override", alpha: 2, phi_deg: null }));
    expect(errors.phi_deg).toBeTruthy();
  });

  it("accepts every legal symmetry class", () => {
    for (const alpha of [0, 1, 2, 4]) {
      expect(validateDraft(draft({ action: "override", alpha, phi_deg: 5 }))).toEqual({});
    }
  });
});

describe("buildPayload", () => {
  it("normalizes phi into [0, 360)", () => {
    const payload = buildPayload(draft({ action: "override", alpha: 2, phi_deg: -145 }));
    expect(payload.phi_deg).toBe(215);
    expect(payload.alpha).toBe(2);
  });

  it("omits alpha and phi for accepts", () => {
    const payload = buildPayload(draft());
    expect(payload).not.toHaveProperty("alpha");
    expect(payload).not.toHaveProperty("phi_deg");
  });

  it("throws on label-space violations", () => {
    expect(() => buildPayload(draft({ action: "override", alpha: 3, phi_deg: 1 }))).toThrow(/0, 1, 2, 4/);
  });
});

describe("orderQueue", () => {
  it("puts flagged categories first, each group alphabetical", () => {
    const queue = orderQueue([
      report("zebra", true),
      report("mugs", false, 2),
      report("apples", true),
      report("boxes", false, 1),
    ]);
    expect(queue.map((r) => r.category)).toEqual(["boxes", "mugs", "apples", "zebra"]);
  });

  it("is stable across refresh with unchanged server state", () => {
    const reports = [report("b", false), report("a", false), report("c", true)];
    const once = orderQueue(reports).map((r) => r.category);
    const again = orderQueue([...reports].reverse()).map((r) => r.category);
    expect(once).toEqual(again);
  });
});

describe("nextFlagged", () => {
  const queue = orderQueue([report("a", false), report("b", true), report("c", false)]);

  it("starts at the first flagged category", () => {
    expect(nextFlagged(queue, null)).toBe("a");
  });

  it("advances and wraps over flagged categories only", () => {
    expect(nextFlagged(queue, "a")).toBe("c");
    expect(nextFlagged(queue, "c")).toBe("a");
  });

  it("returns null when everything is resolved", () => {
    expect(nextFlagged(orderQueue([report("a", true)]), null)).toBeNull();
  });
});
