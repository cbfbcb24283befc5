from __future__ import annotations

import json
import socket

import pytest

from bugtrail.cli import main
from bugtrail.store import StoreHandle

from fixture_apps import comp, ripper_fixtures, write_calc_package, write_package


@pytest.fixture
def five_pkg(tmp_path):
    screens, edges, initial = ripper_fixtures()["five"]
    return write_package(tmp_path, "five", "1", screens, edges, initial)


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestIngest:
    def test_valid_package(self, tmp_path, capsys, five_pkg):
        code, out, _ = run(capsys, "ingest", str(five_pkg), "--store", str(tmp_path / "store"))
        assert code == 0
        assert "five 1" in out and "7 descriptors" in out

    def test_json_summary(self, tmp_path, capsys, five_pkg):
        code, out, _ = run(capsys, "ingest", str(five_pkg), "--store", str(tmp_path / "store"), "--json")
        assert code == 0
        assert json.loads(out) == {"app_id": "five", "version": "1", "descriptors": 7}

    def test_malformed_layout_exits_2_with_location(self, tmp_path, capsys):
        pkg = write_package(tmp_path, "bad", "1", {"Main": [comp(id="b")]}, [], "Main")
        (pkg / "layouts" / "main.xml").write_text("<screen><button></screen>")
        code, _, err = run(capsys, "ingest", str(pkg), "--store", str(tmp_path / "store"))
        assert code == 2
        assert "main.xml" in err and ":" in err

    def test_duplicate_version_exits_3(self, tmp_path, capsys, five_pkg):
        store = str(tmp_path / "store")
        assert run(capsys, "ingest", str(five_pkg), "--store", store)[0] == 0
        code, _, err = run(capsys, "ingest", str(five_pkg), "--store", store)
        assert code == 3
        assert "conflict" in err

    def test_store_from_environment(self, tmp_path, capsys, five_pkg, monkeypatch):
        monkeypatch.setenv("FUSION_STORE", str(tmp_path / "env-store"))
        code, _, _ = run(capsys, "ingest", str(five_pkg))
        assert code == 0
        assert (tmp_path / "env-store" / "apps" / "five" / "1" / "universe.json").exists()


class TestRip:
    def test_prints_counts(self, tmp_path, capsys, five_pkg):
        store = str(tmp_path / "store")
        run(capsys, "ingest", str(five_pkg), "--store", store)
        code, out, _ = run(capsys, "rip", "five", "1", "--store", store)
        assert code == 0
        assert "states=5 transitions=7 truncated=false" in out

    def test_max_states_marks_truncated(self, tmp_path, capsys, five_pkg):
        store = str(tmp_path / "store")
        run(capsys, "ingest", str(five_pkg), "--store", store)
        code, out, _ = run(capsys, "rip", "five", "1", "--store", store, "--max-states", "2")
        assert code == 0
        assert "truncated=true" in out

    def test_unknown_app_exits_4(self, tmp_path, capsys):
        code, _, _ = run(capsys, "rip", "ghost", "1", "--store", str(tmp_path / "store"))
        assert code == 4

    def test_missing_behavior_model_errors(self, tmp_path, capsys):
        pkg = write_package(tmp_path, "nobeh", "1", {"Main": [comp(id="b")]}, [], "Main", with_behavior=False)
        store = str(tmp_path / "store")
        run(capsys, "ingest", str(pkg), "--store", store)
        code, _, err = run(capsys, "rip", "nobeh", "1", "--store", store)
        assert code == 2
        assert "behavior" in err

    def test_duplicate_rip_exits_3(self, tmp_path, capsys, five_pkg):
        store = str(tmp_path / "store")
        run(capsys, "ingest", str(five_pkg), "--store", store)
        run(capsys, "rip", "five", "1", "--store", store)
        code, _, _ = run(capsys, "rip", "five", "1", "--store", store)
        assert code == 3


class TestExport:
    def _store_with_report(self, tmp_path, capsys) -> str:
        from fastapi.testclient import TestClient

        from bugtrail.service import create_app

        store_dir = tmp_path / "store"
        pkg = write_calc_package(tmp_path)
        run(capsys, "ingest", str(pkg), "--store", str(store_dir))
        run(capsys, "rip", "calc", "1.0", "--store", str(store_dir))
        client = TestClient(create_app(StoreHandle(store_dir)))
        sid = client.post("/sessions", json={"app_id": "calc", "version": "1.0", "title": "t"}).json()["session_id"]
        sugg = client.get(f"/sessions/{sid}/suggestions", params={"action": "CLICK"}).json()
        entry = next(e for e in sugg["entries"] if e["display_text"] == "OK")
        client.post(f"/sessions/{sid}/steps", json={
            "action": "CLICK",
            "target": {
                "descriptor_id": entry["descriptor_id"],
                "object_index": entry["object_index"],
                "state_id": entry["state_id"],
            },
        })
        client.post(f"/sessions/{sid}/finalize")
        self._api_body = client.get("/reports/1").content
        return str(store_dir)

    def test_json_export_matches_api_body(self, tmp_path, capsys):
        store = self._store_with_report(tmp_path, capsys)
        out_file = tmp_path / "report.json"
        code = main(["export", "1", "--store", store, "--format", "json", "-o", str(out_file)])
        assert code == 0
        assert out_file.read_bytes() == self._api_body

    def test_html_export_has_sections(self, tmp_path, capsys):
        store = self._store_with_report(tmp_path, capsys)
        out_file = tmp_path / "report.html"
        code = main(["export", "1", "--store", store, "--format", "html", "-o", str(out_file)])
        assert code == 0
        text = out_file.read_text()
        for landmark in ('<section id="preliminary">', '<section id="steps">', '<section id="screenshots">'):
            assert landmark in text

    def test_unknown_report_exits_4(self, tmp_path, capsys):
        code, _, _ = run(capsys, "export", "9", "--store", str(tmp_path / "store"))
        assert code == 4


class TestServe:
    def test_occupied_port_exits_5(self, tmp_path, capsys):
        blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        blocker.bind(("127.0.0.1", 0))
        blocker.listen(1)
        port = blocker.getsockname()[1]
        try:
            code, _, err = run(
                capsys, "serve", "--store", str(tmp_path / "store"), "--addr", f"127.0.0.1:{port}"
            )
        finally:
            blocker.close()
        assert code == 5
        assert "cannot listen" in err

    def test_bad_addr_exits_2(self, tmp_path, capsys):
        code, _, _ = run(capsys, "serve", "--store", str(tmp_path / "store"), "--addr", "nonsense")
        assert code == 2
