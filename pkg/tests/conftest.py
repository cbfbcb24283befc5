from __future__ import annotations

import pytest

from bugtrail.ripper import RipLimits, rip
from bugtrail.simulator import cross_check_behavior, parse_behavior_model, simulate
from bugtrail.static_analysis import analyze_package, load_app_package
from bugtrail.store import StoreHandle

from fixture_apps import write_calc_package


def ingest_package(store: StoreHandle, pkg_path) -> tuple[str, str]:
    """What the `ingest` command does, minus the printing."""
    pkg = load_app_package(pkg_path)
    universe = analyze_package(pkg)
    if pkg.behavior is not None:
        cross_check_behavior(parse_behavior_model(pkg.behavior), universe)
    store.put_universe(universe.app_id, universe.app_version, universe)
    store.put_package_copy(universe.app_id, universe.app_version, pkg_path)
    return universe.app_id, universe.app_version


def rip_app(store: StoreHandle, app_id: str, version: str, limits: RipLimits | None = None):
    pkg = load_app_package(store.package_dir(app_id, version))
    universe = store.get_universe(app_id, version)
    graph = rip(simulate(pkg), universe, limits or RipLimits(), shots=store.shots)
    store.put_graph(app_id, version, graph)
    return graph


@pytest.fixture(scope="session")
def calc_store(tmp_path_factory) -> StoreHandle:
    """A store with the calc fixture ingested and ripped (read-only in tests)."""
    base = tmp_path_factory.mktemp("calc-store")
    store = StoreHandle(base / "store")
    pkg_path = write_calc_package(base)
    app_id, version = ingest_package(store, pkg_path)
    rip_app(store, app_id, version)
    return store


@pytest.fixture
def fresh_store(tmp_path) -> StoreHandle:
    return StoreHandle(tmp_path / "fresh" / "store")
