/** DOM rendering for the queue and detail views. Every number shown is
 * the API payload value (risk scores via the two-decimal formatter). */

import type {
  AlertDetailPayload,
  AlertListPayload,
  PackageMetadataPayload,
  TriState,
} from "./types.js";
import {
  CLOSED_STATUSES,
  RULE_CHIPS,
  SIMILARITY_CHANNELS,
  VerdictFormState,
  allowlistOffered,
  canSubmit,
  categoryLabel,
  chipClass,
  formatPercent,
  formatScore,
  pageInfo,
  prefillAllowlist,
  verdictHistory,
} from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export interface QueueHandlers {
  onOpen(id: string): void;
  onPage(offset: number): void;
  onFilter(field: "status" | "registry" | "category", value: string): void;
  onRetry(): void;
}

export function renderErrorBanner(container: HTMLElement, message: string, onRetry: () => void): void {
  container.replaceChildren();
  const banner = el("div", "banner banner-error");
  banner.append(el("span", "", `Service unreachable: ${message}`));
  const retry = el("button", "retry", "Retry");
  retry.addEventListener("click", onRetry);
  banner.append(retry);
  container.append(banner);
}

export function renderQueue(
  container: HTMLElement,
  data: AlertListPayload,
  filters: { status: string; registry: string; category: string; limit: number; offset: number },
  handlers: QueueHandlers,
): void {
  container.replaceChildren();
  const bar = el("div", "filter-bar");
  bar.append(
    filterSelect("status", filters.status, ["", "open", ...CLOSED_STATUSES], handlers),
    filterSelect(
      "registry",
      filters.registry,
      ["", "npm", "pypi", "rubygems", "maven", "golang", "huggingface", "nuget"],
      handlers,
    ),
    filterSelect(
      "category",
      filters.category,
      [
        "",
        "one_step_levenshtein",
        "sequence_reordering",
        "scope_confusion",
        "semantic_substitution",
        "alternate_spelling",
        "impersonation_squatting",
        "compound_squatting",
        "domain_confusion",
        "other_lexical",
      ],
      handlers,
    ),
  );
  container.append(bar);

  const heading = el("div", "queue-summary");
  heading.textContent =
    data.total === 0
      ? `0 ${filters.status || "matching"} alerts`
      : `${data.total} ${filters.status || "matching"} alert${data.total === 1 ? "" : "s"}`;
  container.append(heading);

  if (data.alerts.length === 0) {
    container.append(el("div", "empty-state", "Nothing to triage. The queue is clear."));
    return;
  }

  const table = el("table", "alert-table");
  const head = el("tr");
  for (const title of ["Risk", "Suspect", "Imitates", "Registry", "Category", "Status"]) {
    head.append(el("th", "", title));
  }
  table.append(head);
  for (const alert of data.alerts) {
    const row = el("tr", "alert-row");
    row.dataset.alertId = alert.id;
    row.append(el("td", "risk", formatScore(alert.risk_score)));
    row.append(el("td", "suspect mono", alert.suspect));
    row.append(el("td", "target mono", alert.target));
    row.append(el("td", "", alert.registry));
    const category = el("td");
    category.append(el("span", "badge", categoryLabel(alert.category)));
    row.append(category);
    row.append(el("td", `status status-${alert.status}`, categoryLabel(alert.status)));
    row.addEventListener("click", () => handlers.onOpen(alert.id));
    table.append(row);
  }
  container.append(table);

  const info = pageInfo(data.total, filters.limit, filters.offset);
  const pager = el("div", "pager");
  const prev = el("button", "page-prev", "Previous");
  prev.disabled = !info.hasPrev;
  prev.addEventListener("click", () => handlers.onPage(filters.offset - filters.limit));
  const next = el("button", "page-next", "Next");
  next.disabled = !info.hasNext;
  next.addEventListener("click", () => handlers.onPage(filters.offset + filters.limit));
  pager.append(prev, el("span", "page-label", `page ${info.page} of ${info.pages}`), next);
  container.append(pager);
}

function filterSelect(
  field: "status" | "registry" | "category",
  current: string,
  options: string[],
  handlers: QueueHandlers,
): HTMLElement {
  const wrap = el("label", "filter");
  wrap.append(el("span", "filter-name", field));
  const select = el("select");
  select.dataset.filter = field;
  for (const option of options) {
    const node = el("option", "", option === "" ? "any" : categoryLabel(option));
    node.value = option;
    if (option === current) node.selected = true;
    select.append(node);
  }
  select.addEventListener("change", () => handlers.onFilter(field, select.value));
  wrap.append(select);
  return wrap;
}

export interface DetailHandlers {
  onBack(): void;
  onSubmit(form: VerdictFormState): void;
}

export function renderNotFound(container: HTMLElement, id: string, onBack: () => void): void {
  container.replaceChildren();
  const panel = el("div", "empty-state");
  panel.append(el("p", "", `No alert with id ${id}.`));
  const back = el("button", "back", "Back to queue");
  back.addEventListener("click", onBack);
  panel.append(back);
  container.append(panel);
}

export function renderDetail(
  container: HTMLElement,
  alert: AlertDetailPayload,
  handlers: DetailHandlers,
): void {
  container.replaceChildren();

  const back = el("button", "back", "Back to queue");
  back.addEventListener("click", handlers.onBack);
  container.append(back);

  const header = el("div", "detail-header");
  header.append(el("h2", "mono", alert.suspect));
  header.append(el("span", "", "imitates"));
  header.append(el("h2", "mono", alert.target));
  header.append(el("span", "badge category-badge", categoryLabel(alert.category)));
  header.append(el("span", "risk risk-large", formatScore(alert.risk_score)));
  header.append(el("span", `status status-${alert.status}`, categoryLabel(alert.status)));
  container.append(header);

  container.append(renderSimilarity(alert));
  container.append(renderChips(alert.report.outcomes, alert.report.sources));
  container.append(renderMetadataPanes(alert.suspect_metadata, alert.target_metadata));
  container.append(renderExplanation(alert));

  const history = verdictHistory(alert);
  if (history) {
    const panel = el("div", "verdict-history");
    panel.append(el("h3", "", "Verdict"));
    panel.append(el("p", "", history));
    container.append(panel);
  } else {
    container.append(renderVerdictForm(alert, handlers));
  }
}

function renderSimilarity(alert: AlertDetailPayload): HTMLElement {
  const pair = alert.report.pair;
  const panel = el("div", "panel similarity-panel");
  panel.append(el("h3", "", "Similarity breakdown"));
  const list = el("div", "bars");
  const channels: [string, number][] = SIMILARITY_CHANNELS.map(({ key, label }) => [
    label,
    pair.composite[key as keyof typeof pair.composite] as number,
  ]);
  channels.push(["embedding cosine", pair.cosine_full]);
  for (const [label, value] of channels) {
    const row = el("div", "bar-row");
    row.append(el("span", "bar-label", label));
    const track = el("div", "bar-track");
    const fill = el("div", "bar-fill");
    fill.style.width = formatPercent(Math.max(0, Math.min(1, value)));
    track.append(fill);
    row.append(track);
    row.append(el("span", "bar-value", value.toFixed(3)));
    list.append(row);
  }
  panel.append(list);
  const meta = el("p", "pair-meta");
  meta.textContent =
    `edit distance ${pair.lexical_distance} · channel ${pair.channel}` +
    (pair.cosine_namespace !== null
      ? ` · namespace cosine ${pair.cosine_namespace.toFixed(3)}`
      : "");
  panel.append(meta);
  return panel;
}

function renderChips(
  outcomes: Record<string, TriState>,
  sources: Record<string, string>,
): HTMLElement {
  const panel = el("div", "panel chips-panel");
  panel.append(el("h3", "", "Rule outcomes"));
  const grid = el("div", "chips");
  for (const { rule, directive, threatLeaning } of RULE_CHIPS) {
    const value = outcomes[directive] ?? "unknown";
    const chip = el("span", `chip ${chipClass(value, threatLeaning)}`);
    chip.dataset.directive = directive;
    chip.dataset.value = value;
    chip.append(el("strong", "", rule));
    chip.append(el("span", "chip-name", directive));
    chip.append(el("span", "chip-value", value));
    chip.append(el("span", "chip-source", sources[directive] ?? "judge"));
    grid.append(chip);
  }
  panel.append(grid);
  return panel;
}

function metadataPane(title: string, meta: PackageMetadataPayload): HTMLElement {
  const pane = el("div", "meta-pane");
  pane.append(el("h4", "mono", title));
  const rows: [string, string][] = [
    ["description", meta.description ?? "(none)"],
    ["license", meta.license ?? "(none)"],
    ["maintainers", meta.maintainers.length ? meta.maintainers.join(", ") : "(none)"],
    ["repository", meta.repository_url ?? "(none)"],
    ["readme", meta.readme ? meta.readme.slice(0, 800) : "(none)"],
  ];
  for (const [key, value] of rows) {
    const row = el("div", "meta-row");
    row.append(el("span", "meta-key", key));
    row.append(el("span", "meta-value", value));
    pane.append(row);
  }
  return pane;
}

function renderMetadataPanes(
  suspect: PackageMetadataPayload,
  target: PackageMetadataPayload,
): HTMLElement {
  const panel = el("div", "panel meta-panel");
  panel.append(el("h3", "", "Metadata side by side"));
  const panes = el("div", "meta-panes");
  panes.append(metadataPane(suspect.name, suspect));
  panes.append(metadataPane(target.name, target));
  panel.append(panes);
  return panel;
}

function renderExplanation(alert: AlertDetailPayload): HTMLElement {
  const panel = el("div", "panel explanation-panel");
  panel.append(el("h3", "", "Why this verdict"));
  const list = el("ul", "explanation");
  for (const [rule, reason] of alert.report.explanation) {
    const item = el("li");
    item.append(el("strong", "", rule));
    item.append(el("span", "", ` ${reason}`));
    list.append(item);
  }
  panel.append(list);
  return panel;
}

export function renderVerdictForm(
  alert: AlertDetailPayload,
  handlers: DetailHandlers,
  initial?: VerdictFormState,
): HTMLElement {
  const form: VerdictFormState = initial ?? {
    status: null,
    note: "",
    addToAllowlist: false,
    allowlistKind: "organization",
    allowlistValue: "",
  };

  const panel = el("div", "panel verdict-form");
  panel.append(el("h3", "", "Submit verdict"));

  const choices = el("div", "status-choices");
  for (const status of CLOSED_STATUSES) {
    const label = el("label", "status-choice");
    const radio = el("input");
    radio.type = "radio";
    radio.name = "verdict-status";
    radio.value = status;
    radio.addEventListener("change", () => {
      form.status = status;
      sync();
    });
    label.append(radio, el("span", "", categoryLabel(status)));
    choices.append(label);
  }
  panel.append(choices);

  const note = el("textarea", "note");
  note.placeholder = "Analyst note (optional)";
  note.addEventListener("input", () => {
    form.note = note.value;
  });
  panel.append(note);

  const allowlistBlock = el("div", "allowlist-block");
  const allowLabel = el("label", "allowlist-toggle");
  const allowCheck = el("input");
  allowCheck.type = "checkbox";
  allowCheck.addEventListener("change", () => {
    form.addToAllowlist = allowCheck.checked;
  });
  allowLabel.append(allowCheck, el("span", "", "Add to allow-list"));
  allowlistBlock.append(allowLabel);
  const allowValue = el("input", "allowlist-value");
  allowValue.type = "text";
  allowValue.addEventListener("input", () => {
    form.allowlistValue = allowValue.value;
  });
  allowlistBlock.append(allowValue);
  panel.append(allowlistBlock);

  const submit = el("button", "submit", "Submit");
  submit.disabled = true;
  submit.addEventListener("click", () => handlers.onSubmit({ ...form }));
  panel.append(submit);

  const conflict = el("p", "conflict-message");
  conflict.hidden = true;
  panel.append(conflict);

  function sync(): void {
    submit.disabled = !canSubmit(form);
    const offered = allowlistOffered(form);
    allowlistBlock.hidden = !offered;
    if (offered && !form.allowlistValue && !allowValue.value) {
      // Prefill from the pair on first reveal.
      const suggestion = prefillAllowlist(alert);
      form.allowlistKind = suggestion.kind;
      allowValue.value = suggestion.value;
      form.allowlistValue = suggestion.value;
    }
  }

  allowlistBlock.hidden = true;
  return panel;
}

export function showConflict(container: HTMLElement, message: string): void {
  const node = container.querySelector<HTMLElement>(".conflict-message");
  if (node) {
    node.textContent = message;
    node.hidden = false;
  }
}
