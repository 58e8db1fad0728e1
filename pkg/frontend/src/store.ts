/** UI state container.
 *
 * State is a pure function of the last API responses plus the set of pending
 * optimistic actions: a verdict removes its item from the visible queue
 * immediately and is rolled back if the server rejects it. A hard refresh
 * (refreshQueue + refreshStatus) reconstructs the same state from the API.
 */

import type { ApiClient } from "./api.js";
import { ApiRequestError } from "./api.js";
import type { GateDecision, ModelStatus, QueueItem, TrainResult } from "./types.js";

export interface GateHistoryEntry {
  decision: GateDecision;
  servingSnapshotId: string;
  candidateSnapshotId: string | null;
  at: string;
}

export interface StoreState {
  items: QueueItem[];
  /** item_ids with an in-flight optimistic verdict, hidden from the queue */
  inFlight: Set<string>;
  /** item_ids the server confirmed judged; never submittable again */
  judged: Set<string>;
  verdictCount: number;
  selectedIndex: number;
  pHumanHistory: number[];
  status: ModelStatus | null;
  gateHistory: GateHistoryEntry[];
  lastError: string | null;
}

export type Listener = (state: StoreState) => void;

export class ReviewStore {
  private state: StoreState = {
    items: [],
    inFlight: new Set(),
    judged: new Set(),
    verdictCount: 0,
    selectedIndex: 0,
    pHumanHistory: [],
    status: null,
    gateHistory: [],
    lastError: null,
  };
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  getState(): StoreState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private set(partial: Partial<StoreState>): void {
    this.state = { ...this.state, ...partial };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Pending items minus those optimistically judged. */
  visibleItems(): QueueItem[] {
    return this.state.items.filter(
      (item) => !this.state.inFlight.has(item.item_id) && !this.state.judged.has(item.item_id),
    );
  }

  selectedItem(): QueueItem | null {
    const visible = this.visibleItems();
    if (visible.length === 0) return null;
    const index = Math.min(this.state.selectedIndex, visible.length - 1);
    return visible[index];
  }

  selectNext(): void {
    const max = Math.max(this.visibleItems().length - 1, 0);
    this.set({ selectedIndex: Math.min(this.state.selectedIndex + 1, max) });
  }

  selectPrevious(): void {
    this.set({ selectedIndex: Math.max(this.state.selectedIndex - 1, 0) });
  }

  async refreshQueue(): Promise<void> {
    const items = await this.api.fetchQueue("pending");
    this.set({
      items,
      selectedIndex: Math.min(this.state.selectedIndex, Math.max(items.length - 1, 0)),
    });
  }

  async refreshStatus(): Promise<void> {
    const status = await this.api.status();
    const history = this.state.pHumanHistory;
    const p = status.p_human;
    this.set({
      status,
      pHumanHistory:
        p !== null && history[history.length - 1] !== p ? [...history, p] : history,
    });
  }

  /** Submit a verdict with an optimistic removal; rolled back on API error.
   * Rejections without a corrected author are blocked client-side. */
  async submitVerdict(itemId: string, accepted: boolean, trueAuthor?: number): Promise<boolean> {
    if (!accepted && trueAuthor === undefined) {
      this.set({ lastError: "choose the true author before rejecting" });
      return false;
    }
    if (this.state.judged.has(itemId) || this.state.inFlight.has(itemId)) {
      return false; // never submittable twice
    }
    const inFlight = new Set(this.state.inFlight);
    inFlight.add(itemId);
    this.set({ inFlight, lastError: null });
    try {
      const result = await this.api.submitVerdict(itemId, accepted, trueAuthor);
      const judged = new Set(this.state.judged);
      judged.add(itemId);
      const cleared = new Set(this.state.inFlight);
      cleared.delete(itemId);
      this.set({
        judged,
        inFlight: cleared,
        verdictCount: this.state.verdictCount + 1,
        pHumanHistory: [...this.state.pHumanHistory, result.p_human],
        selectedIndex: Math.min(
          this.state.selectedIndex,
          Math.max(this.visibleItems().length - 1, 0),
        ),
      });
      return true;
    } catch (err) {
      // roll the optimistic removal back: the item reappears in the queue
      const cleared = new Set(this.state.inFlight);
      cleared.delete(itemId);
      const judged = new Set(this.state.judged);
      let message = String(err);
      if (err instanceof ApiRequestError) {
        message = `${err.code}: ${err.message}`;
        if (err.code === "conflict") {
          // the server already holds a verdict; keep the item hidden
          judged.add(itemId);
        }
      }
      this.set({ inFlight: cleared, judged, lastError: message });
      return false;
    }
  }

  async runTrainCycle(): Promise<TrainResult | null> {
    try {
      const result = await this.api.train();
      this.set({
        gateHistory: [
          ...this.state.gateHistory,
          {
            decision: result.decision,
            servingSnapshotId: result.serving_snapshot_id,
            candidateSnapshotId: result.candidate_snapshot_id,
            at: new Date().toISOString(),
          },
        ],
        lastError: null,
      });
      await this.refreshStatus();
      return result;
    } catch (err) {
      this.set({
        lastError: err instanceof ApiRequestError ? `${err.code}: ${err.message}` : String(err),
      });
      return null;
    }
  }
}
