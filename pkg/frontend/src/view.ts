/** DOM rendering: queue screen, item detail, model panel, train button.
 * Rendering is a pure function of the store state — no hidden view state. */

import type { ReviewStore, StoreState } from "./store.js";
import type { QueueItem } from "./types.js";

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderScoreBars(item: QueueItem): HTMLElement {
  const wrap = el("div", "score-bars");
  item.attribution.scores.forEach((score, author) => {
    const row = el("div", "score-row");
    const label = el(
      "span",
      author === item.attribution.selected_author ? "score-label selected" : "score-label",
      `author ${author}`,
    );
    const bar = el("div", "score-bar");
    bar.style.width = `${Math.round(score * 100)}%`;
    bar.setAttribute("data-score", score.toFixed(4));
    const value = el("span", "score-value", score.toFixed(3));
    row.append(label, bar, value);
    wrap.appendChild(row);
  });
  return wrap;
}

export function renderItemDetail(item: QueueItem): HTMLElement {
  const panel = el("section", "item-detail");
  panel.appendChild(el("h2", "detail-title", item.item_id));
  panel.appendChild(
    el(
      "p",
      "detail-margin",
      `selected author ${item.attribution.selected_author}, margin ${item.attribution.margin.toFixed(3)}`,
    ),
  );
  panel.appendChild(renderScoreBars(item));
  const groups = el("ul", "top-groups");
  for (const g of item.top_groups) {
    groups.appendChild(
      el("li", "top-group", `${g.group_name}: ${(g.frequency * 100).toFixed(1)}%`),
    );
  }
  panel.appendChild(groups);
  return panel;
}

export function renderQueue(store: ReviewStore): HTMLElement {
  const state = store.getState();
  const visible = store.visibleItems();
  const selected = store.selectedItem();
  const screen = el("section", "queue-screen");
  screen.appendChild(
    el("h2", "queue-title", `review queue (${visible.length} pending)`),
  );
  const counter = el("p", "verdict-counter", `verdicts submitted: ${state.verdictCount}`);
  counter.setAttribute("data-count", String(state.verdictCount));
  screen.appendChild(counter);
  const list = el("ul", "queue-list");
  for (const item of visible) {
    const row = el(
      "li",
      item.item_id === selected?.item_id ? "queue-item selected" : "queue-item",
      `${item.item_id} → author ${item.attribution.selected_author} ` +
        `(margin ${item.attribution.margin.toFixed(3)})`,
    );
    row.setAttribute("data-item-id", item.item_id);
    list.appendChild(row);
  }
  screen.appendChild(list);
  if (selected) screen.appendChild(renderItemDetail(selected));
  if (state.lastError) screen.appendChild(el("p", "error-banner", state.lastError));
  return screen;
}

export function renderModelPanel(state: StoreState): HTMLElement {
  const panel = el("section", "model-panel");
  panel.appendChild(el("h2", "panel-title", "model"));
  const s = state.status;
  if (s) {
    panel.appendChild(el("p", "snapshot-id", `snapshot ${s.serving_snapshot_id ?? "none"}`));
    panel.appendChild(
      el(
        "p",
        "model-sizes",
        `inputs ${s.n_features ?? "-"} · pattern units ${s.n_samples ?? "-"} · authors ${s.n_authors ?? "-"}`,
      ),
    );
    if (s.last_eval?.accuracy !== undefined) {
      panel.appendChild(
        el(
          "p",
          "last-eval",
          `accuracy ${s.last_eval.accuracy.toFixed(3)} · missed ${(s.last_eval.missed_rate ?? 0).toFixed(3)}`,
        ),
      );
    }
  }
  const p = state.pHumanHistory[state.pHumanHistory.length - 1];
  const gauge = el(
    "div",
    "autonomy-gauge",
    p === undefined ? "autonomy: n/a" : `human routing probability: ${p.toFixed(3)}`,
  );
  if (p !== undefined) gauge.setAttribute("data-p-human", String(p));
  panel.appendChild(gauge);

  const history = el("ul", "gate-history");
  for (const entry of state.gateHistory) {
    history.appendChild(
      el(
        "li",
        entry.decision.persist_candidate ? "gate-entry persisted" : "gate-entry discarded",
        `${entry.decision.retrain ? "retrained" : "idle"} · ` +
          `${entry.decision.persist_candidate ? "persisted" : "discarded"} · ${entry.decision.reason}`,
      ),
    );
  }
  panel.appendChild(history);
  return panel;
}

export function renderTrainButton(store: ReviewStore): HTMLElement {
  const button = el("button", "train-button", "run train cycle") as HTMLButtonElement;
  button.addEventListener("click", async () => {
    button.disabled = true;
    try {
      await store.runTrainCycle();
    } finally {
      button.disabled = false;
    }
  });
  return button;
}

export function renderApp(root: HTMLElement, store: ReviewStore): void {
  root.replaceChildren(renderQueue(store), renderModelPanel(store.getState()), renderTrainButton(store));
}
