"""File-tree persistence for app models, screenshots, sessions, and
finalized reports.

Layout::

    store/apps/<app_id>/<version>/universe.json
    store/apps/<app_id>/<version>/graph.json
    store/apps/<app_id>/<version>/package/...   (ingested package copy)
    store/shots/<sha256>.png
    store/reports/<id>.json
    store/sessions/<session_id>.json
    store/meta/counter                          (report ids)
    store/meta/session_counter

Model artifacts are append-only: a universe or graph, once written for a
version, is never replaced (re-analysis means a new version string).
Writes go through a store-level file lock with temp-then-rename, so
concurrent readers never observe partial documents.
"""

from __future__ import annotations

import shutil
import zipfile
from pathlib import Path

from filelock import FileLock

from .canonical import canonical_json_bytes, load_json_bytes
from .errors import ConflictError, NotFoundError, ValidationError
from .model import ActionKind, BugReport, EventFlowGraph, ReportSession, TargetRef, validate_graph_actions
from .queries import ModelBundle
from .screenshots import ScreenshotStore
from .serialize import (
    decode_graph,
    decode_report,
    decode_session,
    decode_universe,
    encode_graph,
    encode_report,
    encode_session,
    encode_universe,
)
from .static_analysis import ComponentUniverse


def _write_atomic(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


class StoreHandle:
    """Handle on one store root; safe for many readers, one writer."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "meta").mkdir(parents=True, exist_ok=True)
        self.shots = ScreenshotStore(self.root / "shots")
        self._lock = FileLock(str(self.root / "meta" / "write.lock"))
        self._bundles: dict[tuple[str, str], ModelBundle] = {}

    # -- paths ------------------------------------------------------------------

    def _version_dir(self, app_id: str, version: str) -> Path:
        return self.root / "apps" / app_id / version

    def _universe_path(self, app_id: str, version: str) -> Path:
        return self._version_dir(app_id, version) / "universe.json"

    def _graph_path(self, app_id: str, version: str) -> Path:
        return self._version_dir(app_id, version) / "graph.json"

    def package_dir(self, app_id: str, version: str) -> Path:
        return self._version_dir(app_id, version) / "package"

    # -- model writes -------------------------------------------------------------

    def put_universe(self, app_id: str, version: str, universe: ComponentUniverse) -> None:
        with self._lock:
            path = self._universe_path(app_id, version)
            if path.exists():
                raise ConflictError(f"model {app_id}/{version} already ingested")
            _write_atomic(path, canonical_json_bytes(encode_universe(universe)))

    def put_graph(self, app_id: str, version: str, graph: EventFlowGraph) -> None:
        universe = self.get_universe(app_id, version)
        validate_graph_actions(graph, universe.descriptor_map())
        self._check_graph_shots(graph)
        with self._lock:
            path = self._graph_path(app_id, version)
            if path.exists():
                raise ConflictError(f"graph for {app_id}/{version} already ripped")
            _write_atomic(path, canonical_json_bytes(encode_graph(graph)))
        self._bundles.pop((app_id, version), None)

    def put_model(self, app_id: str, version: str, universe: ComponentUniverse, graph: EventFlowGraph) -> None:
        """Store universe and graph together (single-shot ingestion)."""
        if self._version_dir(app_id, version).exists():
            raise ConflictError(f"model {app_id}/{version} already present")
        validate_graph_actions(graph, universe.descriptor_map())
        self._check_graph_shots(graph)
        with self._lock:
            _write_atomic(self._universe_path(app_id, version), canonical_json_bytes(encode_universe(universe)))
            _write_atomic(self._graph_path(app_id, version), canonical_json_bytes(encode_graph(graph)))

    def _check_graph_shots(self, graph: EventFlowGraph) -> None:
        for s in graph.states:
            refs = [s.full_screenshot] + [i.component_screenshot for i in s.instances]
            for digest in refs:
                if digest not in self.shots:
                    raise ValidationError(f"graph references screenshot {digest} absent from the store")

    def put_package_copy(self, app_id: str, version: str, package_path: str | Path) -> None:
        """Keep the ingested package next to the model so `rip` can reach
        behavior.json later."""
        src = Path(package_path)
        dest = self.package_dir(app_id, version)
        with self._lock:
            if dest.exists():
                raise ConflictError(f"package for {app_id}/{version} already stored")
            if src.is_dir():
                shutil.copytree(src, dest)
            elif zipfile.is_zipfile(src):
                with zipfile.ZipFile(src) as zf:
                    zf.extractall(dest)
            else:
                raise ValidationError(f"{src} is neither a directory nor a zip archive")

    # -- model reads ---------------------------------------------------------------

    def list_apps(self) -> list[tuple[str, str]]:
        apps_dir = self.root / "apps"
        found = []
        if apps_dir.is_dir():
            for app_dir in apps_dir.iterdir():
                for version_dir in app_dir.iterdir() if app_dir.is_dir() else ():
                    if (version_dir / "universe.json").exists():
                        found.append((app_dir.name, version_dir.name))
        return sorted(found)

    def get_universe(self, app_id: str, version: str) -> ComponentUniverse:
        path = self._universe_path(app_id, version)
        if not path.exists():
            raise NotFoundError(f"no model for {app_id}/{version}")
        return decode_universe(load_json_bytes(path.read_bytes()))

    def get_graph(self, app_id: str, version: str) -> EventFlowGraph:
        path = self._graph_path(app_id, version)
        if not path.exists():
            raise NotFoundError(f"no event-flow graph for {app_id}/{version}")
        return decode_graph(load_json_bytes(path.read_bytes()))

    def get_model(self, app_id: str, version: str) -> tuple[ComponentUniverse, EventFlowGraph]:
        return self.get_universe(app_id, version), self.get_graph(app_id, version)

    def bundle(self, app_id: str, version: str) -> ModelBundle:
        key = (app_id, version)
        if key not in self._bundles:
            universe, graph = self.get_model(app_id, version)
            self._bundles[key] = ModelBundle(universe=universe, graph=graph)
        return self._bundles[key]

    # -- query operations (delegate to the bundle) -----------------------------------

    def components_for_state(self, app_id: str, version: str, state_id: str, action: ActionKind):
        return self.bundle(app_id, version).components_for_state(state_id, action)

    def all_components(self, app_id: str, version: str, action: ActionKind):
        return self.bundle(app_id, version).all_components(action)

    def transitions_from(self, app_id: str, version: str, state_id: str, action: ActionKind, target: TargetRef):
        return self.bundle(app_id, version).transitions_from(state_id, action, target)

    # -- counters -----------------------------------------------------------------

    def _next_counter(self, name: str) -> int:
        path = self.root / "meta" / name
        with self._lock:
            current = int(path.read_text()) if path.exists() else 0
            value = current + 1
            _write_atomic(path, str(value).encode("ascii"))
        return value

    def next_report_id(self) -> int:
        """Strictly increasing across process restarts."""
        return self._next_counter("counter")

    def next_session_id(self) -> str:
        return f"S{self._next_counter('session_counter')}"

    # -- reports --------------------------------------------------------------------

    def _report_path(self, report_id: int) -> Path:
        return self.root / "reports" / f"{report_id}.json"

    def put_report(self, report: BugReport) -> None:
        for digest in set(report.full_screenshots) | {
            v.component_screenshot for v in report.derived if v.component_screenshot
        }:
            if digest not in self.shots:
                raise ValidationError(f"report references screenshot {digest} absent from the store")
        with self._lock:
            path = self._report_path(report.report_id)
            if path.exists():
                raise ConflictError(f"report {report.report_id} already stored")
            _write_atomic(path, canonical_json_bytes(encode_report(report)))

    def get_report(self, report_id: int) -> BugReport:
        return decode_report(load_json_bytes(self.get_report_bytes(report_id)))

    def get_report_bytes(self, report_id: int) -> bytes:
        """Canonical stored bytes; what the API and the export command serve."""
        path = self._report_path(report_id)
        if not path.exists():
            raise NotFoundError(f"no report {report_id}")
        return path.read_bytes()

    def list_report_ids(self) -> list[int]:
        reports_dir = self.root / "reports"
        if not reports_dir.is_dir():
            return []
        return sorted(int(p.stem) for p in reports_dir.glob("*.json"))

    # -- sessions ---------------------------------------------------------------------

    def _session_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.json"

    def put_session(self, session: ReportSession) -> None:
        with self._lock:
            _write_atomic(self._session_path(session.session_id), canonical_json_bytes(encode_session(session)))

    def get_session(self, session_id: str) -> ReportSession:
        path = self._session_path(session_id)
        if not path.exists():
            raise NotFoundError(f"no session {session_id}")
        return decode_session(load_json_bytes(path.read_bytes()))
