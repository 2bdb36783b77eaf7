import type {
  AlertDetailPayload,
  AlertListPayload,
  AlertPayload,
  StatsPayload,
  VerdictRequest,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface QueueFilters {
  status?: string;
  registry?: string;
  category?: string;
  limit: number;
  offset: number;
}

export function queryString(filters: QueueFilters): string {
  const params = new URLSearchParams();
  if (filters.status) params.set("status", filters.status);
  if (filters.registry) params.set("registry", filters.registry);
  if (filters.category) params.set("category", filters.category);
  params.set("limit", String(filters.limit));
  params.set("offset", String(filters.offset));
  return params.toString();
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "unknown_error";
  let message = `request failed with HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the defaults
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}/api/v1${path}`);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}/api/v1${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.get("/health");
  }

  listAlerts(filters: QueueFilters): Promise<AlertListPayload> {
    return this.get(`/alerts?${queryString(filters)}`);
  }

  getAlert(id: string): Promise<AlertDetailPayload> {
    return this.get(`/alerts/${id}`);
  }

  submitVerdict(id: string, verdict: VerdictRequest): Promise<AlertPayload> {
    return this.post(`/alerts/${id}/verdict`, verdict);
  }

  stats(): Promise<StatsPayload> {
    return this.get("/stats");
  }
}
