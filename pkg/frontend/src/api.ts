// Typed client for the review service's JSON API.

import {
  AssetDetail,
  CategoryReport,
  DecisionDraft,
  DecisionPayload,
  ServiceStatus,
  buildPayload,
} from "./model.js";

/** The server rejected the request; fieldErrors carries per-field messages. */
export class ApiError extends Error {
  constructor(
    public status: number,
    public fieldErrors: Record<string, string>,
    message?: string,
  ) {
    super(message ?? `request failed with status ${status}`);
  }
}

/** The request never reached the server (offline, refused, aborted). */
export class NetworkError extends Error {}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let resp: Response;
  try {
    resp = await fetch(url, init);
  } catch (err) {
    throw new NetworkError(`network failure: ${String(err)}`);
  }
  let body: unknown = null;
  try {
    body = await resp.json();
  } catch {
    // non-JSON bodies fall through with body = null
  }
  if (!resp.ok) {
    const detail = (body as { detail?: unknown })?.detail;
    const fields: Record<string, string> = {};
    if (detail && typeof detail === "object" && !Array.isArray(detail)) {
      for (const [k, v] of Object.entries(detail as Record<string, unknown>)) {
        fields[k] = String(v);
      }
    }
    const message = typeof detail === "string" ? detail : undefined;
    throw new ApiError(resp.status, fields, message);
  }
  return body as T;
}

export interface DecisionResponse {
  decision: DecisionPayload & { timestamp: string };
  applied: AssetDetail[];
}

export class ReviewApi {
  constructor(private baseUrl = "") {}

  getStatus(): Promise<ServiceStatus> {
    return request(`${this.baseUrl}/api/status`);
  }

  getCategories(status: "all" | "flagged" | "consistent" = "all"): Promise<CategoryReport[]> {
    return request(`${this.baseUrl}/api/categories?status=${status}`);
  }

  getCategory(name: string): Promise<CategoryReport & { assets: AssetDetail[] }> {
    return request(`${this.baseUrl}/api/categories/${encodeURIComponent(name)}`);
  }

  getAsset(assetId: string): Promise<AssetDetail> {
    return request(`${this.baseUrl}/api/assets/${encodeURIComponent(assetId)}`);
  }

  /**
   * Validate client-side, then POST the decision.  Drafts that fail the
   * label-space guard reject before any network traffic.
   */
  async submitDecision(draft: DecisionDraft): Promise<DecisionResponse> {
    const payload = buildPayload(draft);
    return request(`${this.baseUrl}/api/decisions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }
}
