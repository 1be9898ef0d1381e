"""Human-rating service: sample cases into sessions, serve them to raters
over a small JSON HTTP API, persist ratings in an append-only event log, and
aggregate normalized quality scores.

Persistence is one JSON file per session definition plus one JSON-Lines event
log; replaying the log always reproduces the report.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .cases import CaseRecord, NARRATIVE_FIELDS
from .errors import AnnotationError, SessionNotFoundError
from .evaluation import HumanEvalReport, human_eval_aggregate
from .statutes import Seed

DIMENSIONS = ("alignment", "coherence", "relevance")
DEFAULT_SAMPLE_SIZE = 50


@dataclass
class Session:
    session_id: str
    framework: str
    case_ids: list[str]
    sample_size: int
    rng_seed: int

    def to_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "framework": self.framework,
            "case_ids": list(self.case_ids),
            "sample_size": self.sample_size,
            "rng_seed": self.rng_seed,
        }


@dataclass(frozen=True)
class RatingEvent:
    session_id: str
    case_id: str
    rater: str
    alignment: int
    coherence: int
    relevance: int
    timestamp: str
    seq: int = 0

    def scores(self) -> dict[str, int]:
        return {"alignment": self.alignment,
                "coherence": self.coherence,
                "relevance": self.relevance}


def validate_event(event: RatingEvent) -> None:
    for dimension, score in event.scores().items():
        if not isinstance(score, int) or isinstance(score, bool) or not 1 <= score <= 5:
            raise AnnotationError(
                f"{dimension} must be an integer in 1..5, got {score!r}")
    if not event.rater.strip():
        raise AnnotationError("rater must be non-empty")


class AnnotationStore:
    """Session definitions and rating logs on disk; one writer lock
    serializes appends, reads are lock-free snapshots."""

    def __init__(self, base_dir: Path, records: list[CaseRecord],
                 seeds: list[Seed] | None = None):
        self.base_dir = Path(base_dir)
        self.base_dir.mkdir(parents=True, exist_ok=True)
        self.records = {record.case_id: record for record in records}
        self.seeds = {seed.seed_id: seed for seed in (seeds or [])}
        self._append_lock = threading.Lock()

    # -- session lifecycle --

    def create_session(self, framework: str,
                       sample_size: int = DEFAULT_SAMPLE_SIZE,
                       rng_seed: int = 0) -> Session:
        if sample_size <= 0:
            raise AnnotationError("sample_size must be positive")
        pool = sorted(cid for cid, record in self.records.items()
                      if record.framework == framework)
        if not pool:
            raise AnnotationError(f"no cases for framework {framework!r}")
        k = min(sample_size, len(pool))
        rng = random.Random(rng_seed)
        case_ids = rng.sample(pool, k)
        digest = hashlib.sha256(
            json.dumps([framework, rng_seed, case_ids]).encode()).hexdigest()[:10]
        session = Session(
            session_id=f"sess-{digest}",
            framework=framework,
            case_ids=case_ids,
            sample_size=sample_size,
            rng_seed=rng_seed,
        )
        with open(self._session_path(session.session_id), "w", encoding="utf-8") as fh:
            json.dump(session.to_json(), fh, indent=2)
        return session

    def load_session(self, session_id: str) -> Session:
        path = self._session_path(session_id)
        if not path.exists():
            raise SessionNotFoundError(f"unknown session {session_id!r}")
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        return Session(
            session_id=obj["session_id"],
            framework=obj["framework"],
            case_ids=list(obj["case_ids"]),
            sample_size=obj["sample_size"],
            rng_seed=obj["rng_seed"],
        )

    def _session_path(self, session_id: str) -> Path:
        if not re.fullmatch(r"[A-Za-z0-9_-]+", session_id):
            raise SessionNotFoundError(f"bad session id {session_id!r}")
        return self.base_dir / f"{session_id}.json"

    def _events_path(self, session_id: str) -> Path:
        return self.base_dir / f"{session_id}.events.jsonl"

    # -- events --

    def submit_rating(self, event: RatingEvent) -> RatingEvent:
        validate_event(event)
        session = self.load_session(event.session_id)
        if event.case_id not in session.case_ids:
            raise AnnotationError(
                f"case {event.case_id!r} is not part of session {event.session_id}")
        with self._append_lock:
            seq = len(self.events(event.session_id))
            stamped = RatingEvent(
                session_id=event.session_id,
                case_id=event.case_id,
                rater=event.rater,
                alignment=event.alignment,
                coherence=event.coherence,
                relevance=event.relevance,
                timestamp=event.timestamp or _now(),
                seq=seq,
            )
            with open(self._events_path(event.session_id), "a", encoding="utf-8") as fh:
                fh.write(json.dumps(stamped.__dict__, ensure_ascii=False) + "\n")
        return stamped

    def events(self, session_id: str) -> list[RatingEvent]:
        path = self._events_path(session_id)
        if not path.exists():
            return []
        out = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    obj = json.loads(line)
                    out.append(RatingEvent(**{
                        k: obj[k] for k in RatingEvent.__dataclass_fields__}))
        return out

    # -- queries --

    def latest_events(self, session_id: str) -> dict[tuple[str, str], RatingEvent]:
        """Last write wins per (rater, case): latest timestamp, ties broken by
        log sequence number, so replay order cannot change the outcome."""
        latest: dict[tuple[str, str], RatingEvent] = {}
        for event in self.events(session_id):
            key = (event.rater, event.case_id)
            seen = latest.get(key)
            if seen is None or (event.timestamp, event.seq) >= (seen.timestamp, seen.seq):
                latest[key] = event
        return latest

    def next_case(self, session_id: str, rater: str) -> dict:
        """The lowest-index case this rater has not rated yet, with its seed
        text; a done marker when the session is finished for them."""
        session = self.load_session(session_id)
        rated = {case_id for (r, case_id) in self.latest_events(session_id) if r == rater}
        progress = {"rated": 0, "total": len(session.case_ids)}
        payload = None
        for index, case_id in enumerate(session.case_ids):
            if case_id in rated:
                continue
            if payload is None:
                record = self.records.get(case_id)
                if record is None:
                    raise AnnotationError(f"case {case_id} missing from dataset")
                seed = self.seeds.get(record.seed_id)
                payload = {
                    "done": False,
                    "index": index,
                    "case_id": case_id,
                    "label": record.label,
                    "seed_text": seed.rendered_text if seed else "",
                    "fields": record.narrative(),
                }
        progress["rated"] = sum(1 for cid in session.case_ids if cid in rated)
        if payload is None:
            return {"done": True, "progress": progress}
        payload["progress"] = progress
        return payload

    def session_report(self, session_id: str) -> HumanEvalReport:
        """Aggregate the latest event per (rater, case) into normalized scores."""
        self.load_session(session_id)
        rows = []
        for (rater, case_id), event in sorted(self.latest_events(session_id).items()):
            for dimension, score in event.scores().items():
                rows.append({
                    "rater": rater,
                    "case_id": case_id,
                    "dimension": dimension,
                    "score": score,
                })
        if not rows:
            return HumanEvalReport(per_rater={}, dimension_average={})
        return human_eval_aggregate(rows)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


# --- HTTP layer ------------------------------------------------------------


class _Handler(BaseHTTPRequestHandler):
    store: AnnotationStore
    static_dir: Path | None

    # routes
    _SESSION = re.compile(r"^/api/sessions/([A-Za-z0-9_-]+)/(next|ratings|report)$")

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, obj, status: int = 200) -> None:
        body = json.dumps(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        if not length:
            return {}
        return json.loads(self.rfile.read(length))

    def do_GET(self):
        parsed = urlparse(self.path)
        match = self._SESSION.match(parsed.path)
        try:
            if match and match.group(2) == "next":
                rater = parse_qs(parsed.query).get("rater", [""])[0]
                if not rater:
                    raise AnnotationError("rater query parameter required")
                self._send_json(self.store.next_case(match.group(1), rater))
            elif match and match.group(2) == "report":
                report = self.store.session_report(match.group(1))
                self._send_json(report.to_json())
            elif parsed.path.startswith("/api/"):
                self._send_json({"error": "not found"}, 404)
            else:
                self._serve_static(parsed.path)
        except SessionNotFoundError as exc:
            self._send_json({"error": str(exc)}, 404)
        except AnnotationError as exc:
            self._send_json({"error": str(exc)}, 400)

    def do_POST(self):
        parsed = urlparse(self.path)
        try:
            if parsed.path == "/api/sessions":
                body = self._read_json()
                session = self.store.create_session(
                    framework=body.get("framework", ""),
                    sample_size=int(body.get("sample_size", DEFAULT_SAMPLE_SIZE)),
                    rng_seed=int(body.get("rng_seed", 0)),
                )
                self._send_json(session.to_json(), 201)
                return
            match = self._SESSION.match(parsed.path)
            if match and match.group(2) == "ratings":
                body = self._read_json()
                event = RatingEvent(
                    session_id=match.group(1),
                    case_id=str(body.get("case_id", "")),
                    rater=str(body.get("rater", "")),
                    alignment=body.get("alignment"),
                    coherence=body.get("coherence"),
                    relevance=body.get("relevance"),
                    timestamp=str(body.get("timestamp", "")),
                )
                stamped = self.store.submit_rating(event)
                self._send_json({"ok": True, "seq": stamped.seq}, 201)
                return
            self._send_json({"error": "not found"}, 404)
        except SessionNotFoundError as exc:
            self._send_json({"error": str(exc)}, 404)
        except (AnnotationError, ValueError, TypeError) as exc:
            self._send_json({"error": str(exc)}, 400)

    _CONTENT_TYPES = {
        ".html": "text/html; charset=utf-8",
        ".js": "application/javascript",
        ".css": "text/css",
        ".map": "application/json",
        ".svg": "image/svg+xml",
    }

    def _serve_static(self, path: str) -> None:
        if self.static_dir is None:
            self._send_json({"error": "no static assets configured"}, 404)
            return
        relative = path.lstrip("/") or "index.html"
        target = (self.static_dir / relative).resolve()
        base = self.static_dir.resolve()
        if base not in target.parents and target != base:
            self._send_json({"error": "not found"}, 404)
            return
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            self._send_json({"error": "not found"}, 404)
            return
        body = target.read_bytes()
        self.send_response(200)
        self.send_header(
            "Content-Type",
            self._CONTENT_TYPES.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class AnnotationServer:
    """ThreadingHTTPServer wrapper bound to an AnnotationStore."""

    def __init__(self, store: AnnotationStore, host: str = "127.0.0.1",
                 port: int = 0, static_dir: Path | None = None):
        handler = type("BoundHandler", (_Handler,), {
            "store": store,
            "static_dir": Path(static_dir) if static_dir else None,
        })
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> None:
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self.httpd.serve_forever()

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)
