/** Pure view-model helpers: formatting, chip semantics, paging, and the
 * verdict-form gating rules. No network and no DOM in this module. */

import type { AlertDetailPayload, AlertPayload, AlertStatus, TriState } from "./types.js";

/** Rule chips in display order: rule id, directive, and which way a
 * "true" outcome leans. Presentation metadata only; verdicts and scores
 * always come from the server payload. */
export const RULE_CHIPS: { rule: string; directive: string; threatLeaning: boolean }[] = [
  { rule: "R1", directive: "obvious_not_typosquat", threatLeaning: false },
  { rule: "R2", directive: "has_distinct_purpose", threatLeaning: false },
  { rule: "R3", directive: "is_fork", threatLeaning: false },
  { rule: "R4", directive: "active_development", threatLeaning: false },
  { rule: "R5", directive: "no_readme", threatLeaning: true },
  { rule: "R6", directive: "overlapped_maintainers", threatLeaning: false },
  { rule: "R7", directive: "name_length_unrelated", threatLeaning: false },
  { rule: "R7", directive: "is_adversarial_name", threatLeaning: true },
  { rule: "R8", directive: "is_known_maintainer", threatLeaning: false },
  { rule: "R10", directive: "has_suspicious_intent", threatLeaning: true },
  { rule: "R11", directive: "is_test", threatLeaning: false },
  { rule: "R12", directive: "is_relocated_package", threatLeaning: false },
  { rule: "R13", directive: "org_allowlisted", threatLeaning: false },
  { rule: "R14", directive: "mirror_domain", threatLeaning: false },
  { rule: "R15", directive: "verified_prefix", threatLeaning: false },
];

export const SIMILARITY_CHANNELS: { key: string; label: string }[] = [
  { key: "normalized_damerau_levenshtein", label: "edit distance" },
  { key: "ngram_jaccard", label: "bigram overlap" },
  { key: "phonetic", label: "phonetic" },
  { key: "substring", label: "substring" },
  { key: "fuzzy_ratio", label: "fuzzy ratio" },
];

export const CLOSED_STATUSES: Exclude<AlertStatus, "open">[] = [
  "confirmed_active",
  "confirmed_stealthy",
  "dismissed_benign",
];

export function formatScore(score: number): string {
  return score.toFixed(2);
}

export function formatPercent(fraction: number): string {
  return `${Math.round(fraction * 100)}%`;
}

/** Chip color class: benign/threat/unknown per outcome and leaning. */
export function chipClass(value: TriState, threatLeaning: boolean): string {
  if (value === "unknown") return "chip-unknown";
  if (value === "true") return threatLeaning ? "chip-threat" : "chip-benign";
  return "chip-neutral";
}

export interface PageInfo {
  page: number;
  pages: number;
  hasPrev: boolean;
  hasNext: boolean;
}

export function pageInfo(total: number, limit: number, offset: number): PageInfo {
  const pages = Math.max(1, Math.ceil(total / limit));
  const page = Math.min(pages, Math.floor(offset / limit) + 1);
  return { page, pages, hasPrev: offset > 0, hasNext: offset + limit < total };
}

export interface VerdictFormState {
  status: Exclude<AlertStatus, "open"> | null;
  note: string;
  addToAllowlist: boolean;
  allowlistKind: string;
  allowlistValue: string;
}

export function emptyForm(): VerdictFormState {
  return {
    status: null,
    note: "",
    addToAllowlist: false,
    allowlistKind: "organization",
    allowlistValue: "",
  };
}

/** Submit stays disabled until a status is chosen. */
export function canSubmit(form: VerdictFormState): boolean {
  return form.status !== null;
}

/** Allow-list additions are only offered on dismissal. */
export function allowlistOffered(form: VerdictFormState): boolean {
  return form.status === "dismissed_benign";
}

/** Prefill the allow-list suggestion from the pair: the suspect's
 * namespace when it has one, otherwise the exact package. */
export function prefillAllowlist(alert: AlertPayload): { kind: string; value: string } {
  const suspect = alert.suspect;
  if (suspect.startsWith("@") && suspect.includes("/")) {
    return { kind: "organization", value: suspect.slice(1, suspect.indexOf("/")) };
  }
  const slash = suspect.indexOf("/");
  if (alert.registry === "golang") {
    const segments = suspect.split("/");
    if (segments.length >= 2) return { kind: "organization", value: segments[1] };
  } else if (slash > 0) {
    return { kind: "organization", value: suspect.slice(0, slash) };
  }
  if (suspect.includes(".") && alert.registry === "nuget") {
    return { kind: "organization", value: suspect.split(".")[0] };
  }
  if (alert.registry === "maven" && suspect.includes(":")) {
    return { kind: "organization", value: suspect.split(":")[0] };
  }
  return { kind: "customer_package", value: `${alert.registry}:${suspect}` };
}

export function buildVerdictRequest(form: VerdictFormState) {
  if (form.status === null) throw new Error("status not chosen");
  const request: {
    status: Exclude<AlertStatus, "open">;
    note?: string;
    add_to_allowlist?: { kind: string; value: string };
  } = { status: form.status };
  if (form.note.trim()) request.note = form.note.trim();
  if (allowlistOffered(form) && form.addToAllowlist && form.allowlistValue) {
    request.add_to_allowlist = { kind: form.allowlistKind, value: form.allowlistValue };
  }
  return request;
}

/** Optimistic queue update: drop the alert now, restore it on failure. */
export function removeAlert(alerts: AlertPayload[], id: string): AlertPayload[] {
  return alerts.filter((a) => a.id !== id);
}

export function restoreAlert(
  alerts: AlertPayload[],
  alert: AlertPayload,
  originals: AlertPayload[],
): AlertPayload[] {
  const position = originals.findIndex((a) => a.id === alert.id);
  if (position < 0) return [...alerts, alert];
  const result = [...alerts];
  result.splice(Math.min(position, result.length), 0, alert);
  return result;
}

export function categoryLabel(category: string): string {
  return category.replaceAll("_", " ");
}

export function verdictHistory(alert: AlertDetailPayload): string | null {
  if (alert.status === "open") return null;
  const note = alert.analyst_note ? ` — "${alert.analyst_note}"` : "";
  return `${categoryLabel(alert.status)}${note}`;
}
