"""HTTP server for the listening-test annotation workflow.

Serves the segment list (with server-computed waveform peaks), the audio
bytes, and a label intake endpoint. Labels are appended to an
annotations.csv log as they arrive; relabels overwrite in memory and the
export endpoint rewrites the file in deduplicated last-write-wins form.

API:
    GET  /api/session      -> {rater_id, total, manifest}
    GET  /api/segments     -> [{segment_file, duration_ms, peaks, label}]
    GET  /api/audio/<name> -> WAV bytes
    POST /api/labels       -> 204 on {segment_file, rater_id, label}
    GET  /api/export.csv   -> annotations.csv (deduplicated)

Static files (the browser UI) are served from ``ui_dir`` when provided.
"""

from __future__ import annotations

import json
import random
import threading
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from coughseg.annotations import AnnotationRecord, HEADER
from coughseg.audio import load_audio, waveform_peaks
from coughseg.errors import AnnotationError, CoughsegError
from coughseg.segment import SegmentManifest

_PLACEHOLDER_PAGE = """<!doctype html>
<meta charset="utf-8">
<title>coughseg annotation API</title>
<h1>coughseg annotation server</h1>
<p>The API is live, but no browser UI build was found. Point the server at
one with <code>--ui-dir frontend/dist</code> (see the README for build
steps), or drive the JSON API directly:</p>
<ul>
<li><code>GET /api/segments</code></li>
<li><code>GET /api/audio/{segment_file}</code></li>
<li><code>POST /api/labels</code></li>
<li><code>GET /api/export.csv</code></li>
</ul>
"""

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "application/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


def _read_label_log(path: Path) -> dict[tuple[str, str], int]:
    """Load an append-only label log; later rows win over earlier ones."""
    labels: dict[tuple[str, str], int] = {}
    lines = path.read_text(encoding="utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        return labels
    if lines[0] != HEADER:
        raise AnnotationError(f"{path}: expected header {HEADER!r}, got {lines[0]!r}")
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 3 or parts[2] not in ("0", "1"):
            raise AnnotationError(f"{path}:{lineno}: malformed label row {line!r}")
        record = AnnotationRecord(parts[0], parts[1], int(parts[2]))
        labels[(record.segment_file, record.rater_id)] = record.label
    return labels


class AnnotationState:
    """Shared label store with an append-only CSV behind a lock."""

    def __init__(self, annotations_path: Path):
        self.path = annotations_path
        self.lock = threading.Lock()
        self.labels: dict[tuple[str, str], int] = {}
        if annotations_path.exists():
            self.labels = _read_label_log(annotations_path)

    def record(self, segment_file: str, rater_id: str, label: int) -> None:
        with self.lock:
            new_file = not self.path.exists()
            with open(self.path, "a", encoding="utf-8", newline="\n") as fh:
                if new_file:
                    fh.write(HEADER + "\n")
                fh.write(f"{segment_file},{rater_id},{label}\n")
            self.labels[(segment_file, rater_id)] = label

    def export_rows(self, item_order: list[str]) -> list[str]:
        """Deduplicated rows, manifest order then rater order.

        Rows for files outside item_order are kept, sorted after the known
        ones: one label log may be shared across several served manifests
        (e.g. one per segmentation method) and an export must never drop
        another session's labels.
        """
        pos = {name: i for i, name in enumerate(item_order)}
        with self.lock:
            pairs = sorted(
                self.labels.items(),
                key=lambda kv: (pos.get(kv[0][0], len(pos)), kv[0][0], kv[0][1]),
            )
            return [f"{f},{r},{label}" for (f, r), label in pairs]

    def rewrite(self, rows: list[str]) -> None:
        with self.lock:
            self.path.write_text(
                "\n".join([HEADER] + rows) + "\n", encoding="utf-8", newline="\n"
            )

    def get(self, segment_file: str, rater_id: str | None):
        if rater_id is None:
            return None
        return self.labels.get((segment_file, rater_id))


class AnnotationServer:
    """Wires a manifest, its exported WAVs, and a label log into HTTP."""

    def __init__(
        self,
        manifest_path: str | Path,
        segments_dir: str | Path,
        annotations_path: str | Path,
        ui_dir: str | Path | None = None,
        rater_id: str | None = None,
        shuffle_seed: int | None = None,
    ):
        self.manifest_path = Path(manifest_path)
        self.segments_dir = Path(segments_dir)
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        self.rater_id = rater_id
        self.manifest = SegmentManifest.load(self.manifest_path)
        self.state = AnnotationState(Path(annotations_path))

        self.item_order = self.manifest.all_files()
        if shuffle_seed is not None:
            random.Random(shuffle_seed).shuffle(self.item_order)

        # Pre-compute duration and waveform peaks; doubles as the startup
        # check that every referenced file exists and decodes.
        self.cards: dict[str, dict] = {}
        for name in self.item_order:
            wav_path = self.segments_dir / name
            if not wav_path.exists():
                raise CoughsegError(f"manifest references missing file {wav_path}")
            clip = load_audio(wav_path)
            self.cards[name] = {
                "segment_file": name,
                "duration_ms": clip.duration_ms,
                "peaks": waveform_peaks(clip.samples),
            }
        self._httpd: ThreadingHTTPServer | None = None

    # -- lifecycle ---------------------------------------------------

    def start(self, port: int, host: str = "127.0.0.1") -> ThreadingHTTPServer:
        server = self

        class Handler(_Handler):
            app = server

        self._httpd = ThreadingHTTPServer((host, port), Handler)
        return self._httpd

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    def serve_forever(self):
        self._httpd.serve_forever()

    def shutdown(self):
        if self._httpd:
            self._httpd.shutdown()
            self._httpd.server_close()

    # -- request logic (transport-free, easy to test) ------------------

    def segments_payload(self, rater_id: str | None) -> list[dict]:
        rater = rater_id or self.rater_id
        out = []
        for name in self.item_order:
            card = dict(self.cards[name])
            card["label"] = self.state.get(name, rater)
            out.append(card)
        return out

    def submit_label(self, payload: dict) -> tuple[int, str]:
        """Validate and store one label; returns (status, message)."""
        if not isinstance(payload, dict):
            return 400, "body must be a JSON object"
        segment_file = payload.get("segment_file")
        rater_id = payload.get("rater_id")
        label = payload.get("label")
        if not isinstance(segment_file, str) or segment_file not in self.cards:
            return 400, f"unknown segment_file {segment_file!r}"
        if not isinstance(rater_id, str) or not rater_id:
            return 400, "rater_id is required"
        if self.rater_id is not None and rater_id != self.rater_id:
            return 400, f"server is pinned to rater {self.rater_id!r}"
        if not (isinstance(label, int) and not isinstance(label, bool) and label in (0, 1)):
            return 400, f"label must be 0 or 1, got {label!r}"
        try:
            AnnotationRecord(segment_file, rater_id, label)
        except AnnotationError as exc:
            return 400, str(exc)
        self.state.record(segment_file, rater_id, label)
        return 204, ""

    def export_csv(self) -> str:
        rows = self.state.export_rows(self.item_order)
        self.state.rewrite(rows)
        return "\n".join([HEADER] + rows) + "\n"


class _Handler(BaseHTTPRequestHandler):
    app: AnnotationServer

    def log_message(self, fmt, *args):  # quiet; diagnostics go elsewhere
        pass

    def _send(self, status: int, body: bytes = b"", content_type: str = "application/json"):
        self.send_response(status)
        if body:
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
        else:
            self.send_header("Content-Length", "0")
        self.end_headers()
        if body:
            self.wfile.write(body)

    def _send_json(self, status: int, obj) -> None:
        self._send(status, json.dumps(obj).encode("utf-8"))

    def do_GET(self):
        path, _, query = self.path.partition("?")
        if path == "/api/session":
            self._send_json(
                200,
                {
                    "rater_id": self.app.rater_id,
                    "total": len(self.app.item_order),
                    "manifest": str(self.app.manifest_path),
                },
            )
        elif path == "/api/segments":
            rater = None
            for part in query.split("&"):
                if part.startswith("rater_id="):
                    rater = part.split("=", 1)[1]
            self._send_json(200, self.app.segments_payload(rater))
        elif path.startswith("/api/audio/"):
            name = path[len("/api/audio/") :]
            if name not in self.app.cards:
                self._send_json(404, {"error": f"unknown segment {name!r}"})
                return
            data = (self.app.segments_dir / name).read_bytes()
            self._send(200, data, "audio/wav")
        elif path == "/api/export.csv":
            self._send(200, self.app.export_csv().encode("utf-8"), "text/csv; charset=utf-8")
        elif path.startswith("/api/"):
            self._send_json(404, {"error": f"no such endpoint {path}"})
        else:
            self._send_static(path)

    def do_POST(self):
        path = self.path.partition("?")[0]
        if path != "/api/labels":
            self._send_json(404, {"error": f"no such endpoint {path}"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length) or b"null")
        except (ValueError, json.JSONDecodeError):
            self._send_json(400, {"error": "body must be valid JSON"})
            return
        status, message = self.app.submit_label(payload)
        if status == 204:
            self._send(HTTPStatus.NO_CONTENT)
        else:
            self._send_json(status, {"error": message})

    def _send_static(self, path: str):
        if self.app.ui_dir is None:
            if path in ("/", "/index.html"):
                self._send(200, _PLACEHOLDER_PAGE.encode("utf-8"), "text/html; charset=utf-8")
            else:
                self._send_json(404, {"error": "no UI build configured"})
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.app.ui_dir / rel).resolve()
        if not target.is_relative_to(self.app.ui_dir) or not target.is_file():
            self._send_json(404, {"error": f"no such file {path}"})
            return
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), ctype)
