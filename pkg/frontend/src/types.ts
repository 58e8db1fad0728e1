/** Wire types mirroring the /v1 API. The UI holds no business logic of its
 * own: every field here is produced by the server. */

export interface Attribution {
  sample_id: string;
  scores: number[];
  selected_author: number;
  margin: number;
}

export interface TopGroup {
  group_id: number;
  group_name: string;
  frequency: number;
}

export interface QueueItem {
  item_id: string;
  created_at: string;
  state: string;
  attribution: Attribution;
  top_groups: TopGroup[];
}

export interface QueuePage {
  items: QueueItem[];
  next_cursor: string | null;
}

export interface VerdictResult {
  verdict: {
    item_id: string;
    source: string;
    accepted: boolean;
    true_author: number | null;
    xi: number[];
  };
  p_human: number;
}

export interface GateDecision {
  retrain: boolean;
  persist_candidate: boolean;
  reason: string;
}

export interface TrainResult {
  decision: GateDecision;
  serving_snapshot_id: string;
  candidate_snapshot_id: string | null;
  candidate_accuracy: number | null;
  serving_accuracy: number | null;
}

export interface ModelStatus {
  serving_snapshot_id: string | null;
  n_features: number | null;
  n_samples: number | null;
  n_authors: number | null;
  last_eval: { accuracy?: number; missed_rate?: number; false_positive_rate?: number } | null;
  p_human: number | null;
  pending_items: number;
  lexicon_version: number | null;
}

export interface ApiError {
  code: string;
  message: string;
}
