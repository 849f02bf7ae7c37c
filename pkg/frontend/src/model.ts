// View-model types and pure logic for the review flow.

export const SYMMETRY_CLASSES = [0, 1, 2, 4] as const;
export type SymmetryClass = (typeof SYMMETRY_CLASSES)[number];

export type DecisionAction = "accept" | "override" | "discard";

export interface CategoryReport {
  category: string;
  alpha_histogram: Record<string, number>;
  consistent: boolean;
  majority_alpha: number | null;
  flagged_asset_ids: string[];
  n_assets: number;
  n_pending: number;
}

export interface AssetDetail {
  asset_id: string;
  category: string;
  alpha: number;
  phi_deg: number;
  sigma: number;
  residual: number;
  n_views: number;
  status: string;
  reason: string | null;
  candidates: number[];
  curve: number[];
  histogram: number[] | null;
  polar_deg?: number;
  inplane_deg?: number;
}

export interface ServiceStatus {
  assets: number;
  categories: number;
  flagged_categories: number;
  pending: number;
  resolved: number;
}

export interface DecisionDraft {
  category: string;
  asset_id: string; // "*" targets the whole category
  action: DecisionAction;
  alpha: number | null;
  phi_deg: number | null;
  reviewer: string;
}

export interface DecisionPayload {
  category: string;
  asset_id: string;
  action: DecisionAction;
  alpha?: number;
  phi_deg?: number;
  reviewer: string;
}

/** Wrap any angle into [0, 360). */
export function normalizePhi(phi: number): number {
  const r = ((phi % 360) + 360) % 360;
  return r >= 360 ? 0 : r;
}

export function isSymmetryClass(alpha: number): alpha is SymmetryClass {
  return (SYMMETRY_CLASSES as readonly number[]).includes(alpha);
}

/**
 * Field-level validation mirroring the server's rules, so an invalid payload
 * (in particular an out-of-label-space alpha) never reaches the wire.
 */
export function validateDraft(draft: DecisionDraft): Record<string, string> {
  const errors: Record<string, string> = {};
  if (!draft.category) errors.category = "category is required";
  if (!draft.asset_id) errors.asset_id = "asset is required";
  if (draft.action === "override") {
    if (draft.alpha === null || !Number.isInteger(draft.alpha) || !isSymmetryClass(draft.alpha)) {
      errors.alpha = "symmetry class must be one of 0, 1, 2, 4";
    }
    if (draft.phi_deg === null || !Number.isFinite(draft.phi_deg)) {
      errors.phi_deg = "front-face angle is required";
    }
  }
  return errors;
}

/** Build the POST body; throws if the draft fails the client-side guard. */
export function buildPayload(draft: DecisionDraft): DecisionPayload {
  const errors = validateDraft(draft);
  if (Object.keys(errors).length > 0) {
    throw new Error(`invalid draft: ${Object.values(errors).join("; ")}`);
  }
  const payload: DecisionPayload = {
    category: draft.category,
    asset_id: draft.asset_id,
    action: draft.action,
    reviewer: draft.reviewer || "reviewer",
  };
  if (draft.action === "override") {
    payload.alpha = draft.alpha as number;
    payload.phi_deg = normalizePhi(draft.phi_deg as number);
  }
  return payload;
}

/** Flagged categories first, each group alphabetical: a stable, deterministic queue. */
export function orderQueue(reports: CategoryReport[]): CategoryReport[] {
  return [...reports].sort((a, b) => {
    if (a.consistent !== b.consistent) return a.consistent ? 1 : -1;
    return a.category < b.category ? -1 : a.category > b.category ? 1 : 0;
  });
}

/** Next category still needing review after the current one, queue order. */
export function nextFlagged(queue: CategoryReport[], current: string | null): string | null {
  const flagged = queue.filter((r) => !r.consistent);
  if (flagged.length === 0) return null;
  if (current === null) return flagged[0].category;
  const idx = flagged.findIndex((r) => r.category === current);
  const next = flagged[(idx + 1) % flagged.length];
  return next.category;
}
