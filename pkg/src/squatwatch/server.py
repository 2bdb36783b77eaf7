"""HTTP JSON API under /api/v1, plus static hosting for the triage UI.

Endpoints:

    GET  /api/v1/health
    GET  /api/v1/alerts?status=&registry=&category=&limit=&offset=
    GET  /api/v1/alerts/{id}
    POST /api/v1/alerts/{id}/verdict   {status, note?, add_to_allowlist?}
    GET  /api/v1/stats
    POST /api/v1/allowlist             {kind, value, action}

Responses are application/json; errors carry {code, message} with a
stable code string. Confirmed suspects leave the trusted set; dismissals
may append an allow-list entry in the same transition.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import re
import socketserver
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from .alerts import (
    CLOSED_STATUSES,
    DISMISSED_BENIGN,
    AlertConflict,
    AlertNotFound,
    alert_to_json,
)
from .errors import PortInUse
from .judge import PackageView
from .pipeline import Pipeline
from .store import ALLOWLIST_KINDS

logger = logging.getLogger(__name__)

_ALERT_RE = re.compile(r"^/api/v1/alerts/([0-9a-f]+)$")
_VERDICT_RE = re.compile(r"^/api/v1/alerts/([0-9a-f]+)/verdict$")


class ApiError(Exception):
    def __init__(self, http_status: int, code: str, message: str):
        super().__init__(message)
        self.http_status = http_status
        self.code = code
        self.message = message


class _Handler(BaseHTTPRequestHandler):
    pipeline: Pipeline
    static_dir: Optional[Path] = None

    def log_message(self, fmt: str, *args) -> None:
        logger.debug("http: " + fmt, *args)

    # -- plumbing ------------------------------------------------------

    def _send_json(self, payload: dict, status: int = 200) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error(self, error: ApiError) -> None:
        self._send_json(
            {"code": error.code, "message": error.message}, status=error.http_status
        )

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            data = json.loads(raw.decode("utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError):
            raise ApiError(400, "invalid_json", "request body is not valid JSON")
        if not isinstance(data, dict):
            raise ApiError(400, "invalid_json", "request body must be a JSON object")
        return data

    # -- routing -------------------------------------------------------

    def do_GET(self) -> None:  # noqa: N802 (http.server API)
        try:
            parsed = urlparse(self.path)
            if parsed.path == "/api/v1/health":
                self._send_json({"status": "ok"})
            elif parsed.path == "/api/v1/alerts":
                self._list_alerts(parse_qs(parsed.query))
            elif match := _ALERT_RE.match(parsed.path):
                self._get_alert(match.group(1))
            elif parsed.path == "/api/v1/stats":
                self._get_stats()
            elif parsed.path.startswith("/api/"):
                raise ApiError(404, "not_found", f"no such endpoint: {parsed.path}")
            else:
                self._serve_static(parsed.path)
        except ApiError as error:
            self._send_error(error)
        except Exception:  # pragma: no cover - last-resort guard
            logger.exception("unhandled error for %s", self.path)
            self._send_error(ApiError(500, "internal_error", "internal server error"))

    def do_POST(self) -> None:  # noqa: N802
        try:
            parsed = urlparse(self.path)
            if match := _VERDICT_RE.match(parsed.path):
                self._post_verdict(match.group(1))
            elif parsed.path == "/api/v1/allowlist":
                self._post_allowlist()
            else:
                raise ApiError(404, "not_found", f"no such endpoint: {parsed.path}")
        except ApiError as error:
            self._send_error(error)
        except Exception:  # pragma: no cover
            logger.exception("unhandled error for %s", self.path)
            self._send_error(ApiError(500, "internal_error", "internal server error"))

    # -- handlers --------------------------------------------------------

    def _list_alerts(self, query: dict[str, list[str]]) -> None:
        def first(key: str) -> Optional[str]:
            values = query.get(key)
            return values[0] if values else None

        try:
            limit = int(first("limit") or 50)
            offset = int(first("offset") or 0)
        except ValueError:
            raise ApiError(400, "invalid_pagination", "limit/offset must be integers")
        rows, total = self.pipeline.alerts.list(
            status=first("status"),
            registry=first("registry"),
            category=first("category"),
            limit=limit,
            offset=offset,
        )
        self._send_json({"alerts": [alert_to_json(a) for a in rows], "total": total})

    def _get_stats(self) -> None:
        stats = self.pipeline.alerts.stats()
        lists = self.pipeline.store.allow_lists()
        stats["allow_lists"] = {
            "organizations": len(lists.organizations),
            "mirror_domains": len(lists.mirror_domains),
            "customer_packages": len(lists.customer_packages),
        }
        self._send_json(stats)

    def _get_alert(self, alert_id: str) -> None:
        try:
            alert = self.pipeline.alerts.get(alert_id)
        except AlertNotFound:
            raise ApiError(404, "alert_not_found", f"no alert with id {alert_id}")
        payload = alert_to_json(alert)
        store = self.pipeline.store
        suspect_meta = store.get_metadata(alert.suspect)
        target_meta = store.get_metadata(alert.target)
        payload["suspect_metadata"] = _view_json(
            PackageView.from_metadata(suspect_meta, alert.suspect.raw)
        )
        payload["target_metadata"] = _view_json(
            PackageView.from_metadata(target_meta, alert.target.raw)
        )
        self._send_json(payload)

    def _post_verdict(self, alert_id: str) -> None:
        body = self._read_body()
        status = body.get("status")
        if status not in CLOSED_STATUSES:
            raise ApiError(
                400, "invalid_status", f"status must be one of {list(CLOSED_STATUSES)}"
            )
        addition = body.get("add_to_allowlist")
        if addition is not None:
            if status != DISMISSED_BENIGN:
                raise ApiError(
                    400,
                    "invalid_allowlist_addition",
                    "allow-list additions require a dismissal",
                )
            if (
                not isinstance(addition, dict)
                or addition.get("kind") not in ALLOWLIST_KINDS
                or not addition.get("value")
            ):
                raise ApiError(
                    400, "invalid_allowlist_addition", "addition needs kind and value"
                )
        try:
            alert = self.pipeline.alerts.set_verdict(
                alert_id,
                status,
                note=body.get("note"),
                allowlist_addition=addition,
            )
        except AlertNotFound:
            raise ApiError(404, "alert_not_found", f"no alert with id {alert_id}")
        except AlertConflict as exc:
            raise ApiError(409, "alert_closed", str(exc))
        if addition is not None:
            self.pipeline.store.update_allowlist(addition["kind"], addition["value"], "add")
        if status in ("confirmed_active", "confirmed_stealthy"):
            self.pipeline.store.deny_trusted(alert.suspect)
        self._send_json(alert_to_json(alert))

    def _post_allowlist(self) -> None:
        body = self._read_body()
        kind, value = body.get("kind"), body.get("value")
        action = body.get("action", "add")
        if kind not in ALLOWLIST_KINDS or not value or action not in ("add", "remove"):
            raise ApiError(400, "invalid_allowlist", "need kind, value, action")
        lists = self.pipeline.store.update_allowlist(kind, str(value), action)
        self._send_json(
            {
                "organizations": sorted(lists.organizations),
                "mirror_domains": sorted(lists.mirror_domains),
                "customer_packages": sorted(
                    f"{reg}:{name}" for reg, name in lists.customer_packages
                ),
            }
        )

    # -- static assets ----------------------------------------------------

    def _serve_static(self, path: str) -> None:
        if self.static_dir is None:
            raise ApiError(404, "not_found", "no static assets configured")
        relative = path.lstrip("/") or "index.html"
        target = (self.static_dir / relative).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())):
            raise ApiError(403, "forbidden", "path escapes static root")
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            raise ApiError(404, "not_found", f"no such asset: {path}")
        content = target.read_bytes()
        mime = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", mime)
        self.send_header("Content-Length", str(len(content)))
        self.end_headers()
        self.wfile.write(content)


def _view_json(view: PackageView) -> dict:
    return {
        "name": view.name,
        "description": view.description,
        "readme": view.readme,
        "license": view.license,
        "maintainers": list(view.maintainers),
        "repository_url": view.repository_url,
    }


class AlertServer:
    """Owns the ThreadingHTTPServer; start()/shutdown() for embedding."""

    def __init__(
        self,
        pipeline: Pipeline,
        host: str = "127.0.0.1",
        port: int = 8817,
        static_dir: Optional[str | Path] = None,
    ):
        handler = type("BoundHandler", (_Handler,), {})
        handler.pipeline = pipeline
        handler.static_dir = Path(static_dir) if static_dir else None
        socketserver.TCPServer.allow_reuse_address = True
        try:
            self._server = ThreadingHTTPServer((host, port), handler)
        except OSError as exc:
            raise PortInUse(f"cannot bind {host}:{port}: {exc}") from exc
        self.host = host
        self.port = self._server.server_address[1]
        self._thread: Optional[threading.Thread] = None

    def start(self) -> None:
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        logger.info("serving on http://%s:%d", self.host, self.port)

    def serve_forever(self) -> None:
        logger.info("serving on http://%s:%d", self.host, self.port)
        self._server.serve_forever()

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
