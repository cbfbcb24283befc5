#!/usr/bin/env python3
"""Build the fixture store the frontend tests run against: the calc app
plus the duplicate-button app, ingested and ripped.

Usage: prepare_store.py <dest-dir>   (store lands in <dest-dir>/store)
"""

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(REPO / "tests"))

from fixture_apps import ripper_fixtures, write_calc_package, write_package  # noqa: E402

from bugtrail.cli import main  # noqa: E402


def build(dest: Path) -> None:
    dest.mkdir(parents=True, exist_ok=True)
    store = dest / "store"
    calc = write_calc_package(dest)
    assert main(["ingest", str(calc), "--store", str(store)]) == 0
    assert main(["rip", "calc", "1.0", "--store", str(store)]) == 0
    screens, edges, initial = ripper_fixtures()["dups"]
    dups = write_package(dest, "dups", "1", screens, edges, initial)
    assert main(["ingest", str(dups), "--store", str(store)]) == 0
    assert main(["rip", "dups", "1", "--store", str(store)]) == 0


if __name__ == "__main__":
    build(Path(sys.argv[1]))
    print("store ready")
