/** Payload shapes of the /api/v1 endpoints. The UI renders these
 * verbatim and never re-derives scores or counts on the client. */

export type AlertStatus =
  | "open"
  | "confirmed_active"
  | "confirmed_stealthy"
  | "dismissed_benign";

export type TriState = "true" | "false" | "unknown";

export interface SimilarityBreakdown {
  normalized_damerau_levenshtein: number;
  ngram_jaccard: number;
  phonetic: number;
  substring: number;
  fuzzy_ratio: number;
  max_score: number;
}

export interface PairRef {
  registry: string;
  name: string;
}

export interface CandidatePairPayload {
  suspect: PairRef;
  target: PairRef;
  lexical_distance: number;
  cosine_full: number;
  cosine_namespace: number | null;
  cosine_identifier: number | null;
  composite: SimilarityBreakdown;
  category: string;
  channel: string;
}

export interface ReportPayload {
  pair: CandidatePairPayload;
  outcomes: Record<string, TriState>;
  sources: Record<string, string>;
  risk_score: number;
  verdict: string;
  explanation: [string, string][];
}

export interface AlertPayload {
  id: string;
  created_at: string;
  status: AlertStatus;
  analyst_note: string | null;
  registry: string;
  suspect: string;
  target: string;
  category: string;
  risk_score: number;
  draft: {
    suspect: PairRef;
    pairs: CandidatePairPayload[];
    created_at: string;
  };
  report: ReportPayload;
}

export interface PackageMetadataPayload {
  name: string;
  description: string | null;
  readme: string | null;
  license: string | null;
  maintainers: string[];
  repository_url: string | null;
}

export interface AlertDetailPayload extends AlertPayload {
  suspect_metadata: PackageMetadataPayload;
  target_metadata: PackageMetadataPayload;
}

export interface AlertListPayload {
  alerts: AlertPayload[];
  total: number;
}

export interface StatsPayload {
  total: number;
  by_status: Record<string, number>;
  by_category: Record<string, number>;
  by_registry: Record<string, number>;
}

export interface VerdictRequest {
  status: Exclude<AlertStatus, "open">;
  note?: string;
  add_to_allowlist?: { kind: string; value: string };
}
