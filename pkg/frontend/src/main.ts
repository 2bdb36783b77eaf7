/** App shell: hash routing, data fetching, and optimistic verdicts.
 * Routes: #/alerts (queue) and #/alerts/<id> (detail). The server is the
 * single source of truth; a reload always shows exactly server state. */

import { ApiClient, ApiError, QueueFilters } from "./api.js";
import { renderDetail, renderErrorBanner, renderNotFound, renderQueue, showConflict } from "./render.js";
import { VerdictFormState, buildVerdictRequest, removeAlert } from "./state.js";
import type { AlertListPayload } from "./types.js";

const api = new ApiClient("");

const filters: QueueFilters & { status: string; registry: string; category: string } = {
  status: "open",
  registry: "",
  category: "",
  limit: 20,
  offset: 0,
};

// Last queue payload rendered; backs the optimistic update on submit.
let lastQueue: AlertListPayload | null = null;
let skipNextRoute = false;

function container(): HTMLElement {
  const node = document.getElementById("app");
  if (!node) throw new Error("missing #app container");
  return node;
}

function currentRoute(): { view: "queue" } | { view: "detail"; id: string } {
  const hash = window.location.hash;
  const match = /^#\/alerts\/([0-9a-f]+)$/.exec(hash);
  if (match) return { view: "detail", id: match[1] };
  return { view: "queue" };
}

async function showQueue(): Promise<void> {
  const root = container();
  let data: AlertListPayload;
  try {
    data = await api.listAlerts(filters);
  } catch (error) {
    renderErrorBanner(root, error instanceof Error ? error.message : String(error), () => {
      void showQueue();
    });
    return;
  }
  renderQueueData(data);
}

function renderQueueData(data: AlertListPayload): void {
  const root = container();
  lastQueue = data;
  renderQueue(root, data, filters, {
    onOpen(id) {
      window.location.hash = `#/alerts/${id}`;
    },
    onPage(offset) {
      filters.offset = Math.max(0, offset);
      void showQueue();
    },
    onFilter(field, value) {
      filters[field] = value;
      filters.offset = 0;
      void showQueue();
    },
    onRetry() {
      void showQueue();
    },
  });
}

async function showDetail(id: string): Promise<void> {
  const root = container();
  let alert;
  try {
    alert = await api.getAlert(id);
  } catch (error) {
    if (error instanceof ApiError && error.status === 404) {
      renderNotFound(root, id, () => {
        window.location.hash = "#/alerts";
      });
      return;
    }
    renderErrorBanner(root, error instanceof Error ? error.message : String(error), () => {
      void showDetail(id);
    });
    return;
  }
  renderDetail(root, alert, {
    onBack() {
      window.location.hash = "#/alerts";
    },
    onSubmit(form: VerdictFormState) {
      void submitVerdict(id, form);
    },
  });
}

async function submitVerdict(id: string, form: VerdictFormState): Promise<void> {
  const root = container();

  // Optimistic: show the queue immediately with the alert removed, then
  // confirm against the server (or roll back on failure).
  const previous = lastQueue;
  if (previous && filters.status === "open") {
    skipNextRoute = true;
    window.location.hash = "#/alerts";
    renderQueueData({
      alerts: removeAlert(previous.alerts, id),
      total: Math.max(0, previous.total - 1),
    });
  }

  try {
    await api.submitVerdict(id, buildVerdictRequest(form));
    await showQueue(); // replace the optimistic render with server truth
  } catch (error) {
    if (previous) {
      renderQueueData(previous); // roll the optimistic removal back
    }
    if (error instanceof ApiError) {
      await showDetail(id);
      showConflict(root, `${error.code}: ${error.message}`);
      return;
    }
    renderErrorBanner(root, error instanceof Error ? error.message : String(error), () => {
      void showDetail(id);
    });
  }
}

function route(): void {
  if (skipNextRoute) {
    skipNextRoute = false;
    return;
  }
  const here = currentRoute();
  if (here.view === "detail") {
    void showDetail(here.id);
  } else {
    void showQueue();
  }
}

window.addEventListener("hashchange", route);
window.addEventListener("DOMContentLoaded", route);
