// Review app: category queue, asset cards with rose diagrams, decision form.
// Keyboard-first: j/k moves between assets, a/o/d pick the action, Enter
// submits, n jumps to the next flagged category.

import { ApiError, NetworkError, ReviewApi } from "./api.js";
import {
  AssetDetail,
  CategoryReport,
  DecisionAction,
  DecisionDraft,
  SYMMETRY_CLASSES,
  nextFlagged,
  orderQueue,
  validateDraft,
} from "./model.js";
import { RoseError, renderRoseSVG } from "./rose.js";

const api = new ReviewApi("");

interface AppState {
  queue: CategoryReport[];
  currentCategory: string | null;
  assets: AssetDetail[];
  selectedAsset: number;
  draft: Partial<DecisionDraft>;
  banner: { kind: "error" | "info"; text: string; retry?: () => void } | null;
}

const state: AppState = {
  queue: [],
  currentCategory: null,
  assets: [],
  selectedAsset: 0,
  draft: { action: "accept", alpha: 1, phi_deg: 0, reviewer: "reviewer" },
  banner: null,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function setBanner(banner: AppState["banner"]) {
  state.banner = banner;
  const box = el<HTMLDivElement>("banner");
  box.innerHTML = "";
  box.className = banner ? `banner ${banner.kind}` : "banner hidden";
  if (!banner) return;
  const span = document.createElement("span");
  span.textContent = banner.text;
  box.appendChild(span);
  if (banner.retry) {
    const btn = document.createElement("button");
    btn.textContent = "retry";
    btn.onclick = () => {
      setBanner(null);
      banner.retry?.();
    };
    box.appendChild(btn);
  }
}

async function refreshQueue() {
  const [reports, status] = await Promise.all([api.getCategories("all"), api.getStatus()]);
  state.queue = orderQueue(reports);
  el<HTMLSpanElement>("status-line").textContent =
    `${status.flagged_categories}/${status.categories} categories flagged · ` +
    `${status.pending} pending · ${status.resolved} resolved`;
  renderQueue();
}

function renderQueue() {
  const list = el<HTMLUListElement>("queue");
  list.innerHTML = "";
  for (const report of state.queue) {
    const item = document.createElement("li");
    item.className = report.consistent ? "done" : "flagged";
    if (report.category === state.currentCategory) item.classList.add("current");
    const counts = Object.entries(report.alpha_histogram)
      .filter(([, n]) => n > 0)
      .map(([a, n]) => `α${a}×${n}`)
      .join(" ");
    item.textContent = `${report.category} ${report.consistent ? "✓" : `⚠ ${report.n_pending}`} ${counts}`;
    item.onclick = () => void openCategory(report.category);
    list.appendChild(item);
  }
}

async function openCategory(name: string) {
  const detail = await api.getCategory(name);
  state.currentCategory = name;
  state.assets = [];
  for (const a of detail.assets) {
    state.assets.push(await api.getAsset(a.asset_id));
  }
  state.selectedAsset = 0;
  renderQueue();
  renderAssets();
}

function roseMarkup(asset: AssetDetail): string {
  try {
    return renderRoseSVG(asset.histogram ?? asset.curve, asset.curve, asset.candidates);
  } catch (err) {
    if (err instanceof RoseError) {
      return `<div class="rose-error">cannot render rose: ${err.message}</div>`;
    }
    throw err;
  }
}

function renderAssets() {
  const panel = el<HTMLDivElement>("assets");
  panel.innerHTML = "";
  if (state.currentCategory === null) {
    panel.innerHTML = "<p class='hint'>Select a category. Flagged ones sort first.</p>";
    return;
  }
  state.assets.forEach((asset, idx) => {
    const card = document.createElement("div");
    card.className = `card status-${asset.status}`;
    if (idx === state.selectedAsset) card.classList.add("selected");
    card.innerHTML = `
      <div class="card-rose">${roseMarkup(asset)}</div>
      <div class="card-meta">
        <h3>${asset.asset_id}</h3>
        <p>α=${asset.alpha} φ=${asset.phi_deg.toFixed(1)}° σ=${asset.sigma.toFixed(3)}</p>
        <p>residual ${asset.residual.toExponential(2)} · ${asset.n_views} views</p>
        <p class="status">${asset.status}</p>
      </div>`;
    card.onclick = () => {
      state.selectedAsset = idx;
      renderAssets();
    };
    panel.appendChild(card);
  });
}

function readDraft(): DecisionDraft {
  const action = (el<HTMLSelectElement>("action").value || "accept") as DecisionAction;
  const alphaRaw = el<HTMLSelectElement>("alpha").value;
  const phiRaw = el<HTMLInputElement>("phi").value;
  const asset = state.assets[state.selectedAsset];
  return {
    category: state.currentCategory ?? "",
    asset_id: el<HTMLInputElement>("whole-category").checked ? "*" : asset?.asset_id ?? "",
    action,
    alpha: alphaRaw === "" ? null : Number(alphaRaw),
    phi_deg: phiRaw === "" ? null : Number(phiRaw),
    reviewer: el<HTMLInputElement>("reviewer").value || "reviewer",
  };
}

function showFieldErrors(errors: Record<string, string>) {
  for (const field of ["category", "asset_id", "action", "alpha", "phi_deg"]) {
    const slot = document.getElementById(`err-${field}`);
    if (slot) slot.textContent = errors[field] ?? "";
  }
}

async function submit() {
  const draft = readDraft();
  const errors = validateDraft(draft);
  showFieldErrors(errors);
  if (Object.keys(errors).length > 0) {
    setBanner({ kind: "error", text: "fix the highlighted fields before submitting" });
    return;
  }
  try {
    await api.submitDecision(draft);
  } catch (err) {
    if (err instanceof ApiError) {
      showFieldErrors(err.fieldErrors);
      setBanner({ kind: "error", text: err.message });
      return; // draft inputs stay as they are
    }
    if (err instanceof NetworkError) {
      setBanner({ kind: "error", text: "network failure while submitting", retry: () => void submit() });
      return;
    }
    throw err;
  }
  setBanner(null);
  showFieldErrors({});
  const category = state.currentCategory;
  await refreshQueue();
  if (category) await openCategory(category);
  advanceSelection();
}

function advanceSelection() {
  const pendingIdx = state.assets.findIndex(
    (a, i) => i > state.selectedAsset && a.status === "needs_review",
  );
  if (pendingIdx >= 0) {
    state.selectedAsset = pendingIdx;
  } else if (state.assets.every((a) => a.status !== "needs_review")) {
    const next = nextFlagged(state.queue, state.currentCategory);
    if (next && next !== state.currentCategory) void openCategory(next);
  }
  renderAssets();
}

function onKey(ev: KeyboardEvent) {
  if (ev.target instanceof HTMLInputElement || ev.target instanceof HTMLSelectElement) {
    if (ev.key === "Enter") {
      ev.preventDefault();
      void submit();
    }
    return;
  }
  switch (ev.key) {
    case "j":
      state.selectedAsset = Math.min(state.selectedAsset + 1, state.assets.length - 1);
      renderAssets();
      break;
    case "k":
      state.selectedAsset = Math.max(state.selectedAsset - 1, 0);
      renderAssets();
      break;
    case "a":
      el<HTMLSelectElement>("action").value = "accept";
      break;
    case "o":
      el<HTMLSelectElement>("action").value = "override";
      break;
    case "d":
      el<HTMLSelectElement>("action").value = "discard";
      break;
    case "n": {
      const next = nextFlagged(state.queue, state.currentCategory);
      if (next) void openCategory(next);
      break;
    }
    case "Enter":
      void submit();
      break;
  }
}

function populateAlphaOptions() {
  const select = el<HTMLSelectElement>("alpha");
  select.innerHTML = "";
  for (const cls of SYMMETRY_CLASSES) {
    const option = document.createElement("option");
    option.value = String(cls);
    option.textContent = `α = ${cls}${cls === 0 ? " (no front face)" : ""}`;
    select.appendChild(option);
  }
  select.value = "1";
}

export async function start() {
  populateAlphaOptions();
  el<HTMLButtonElement>("submit").onclick = () => void submit();
  document.addEventListener("keydown", onKey);
  try {
    await refreshQueue();
  } catch (err) {
    setBanner({ kind: "error", text: `cannot reach the review service: ${String(err)}`, retry: () => void start() });
    return;
  }
  const firstFlagged = nextFlagged(state.queue, null);
  if (firstFlagged) await openCategory(firstFlagged);
  else renderAssets();
}

if (typeof document !== "undefined" && document.getElementById("app-root")) {
  void start();
}
