from __future__ import annotations

import pytest

from bugtrail.errors import PackageError
from bugtrail.model import ActionKind
from bugtrail.simulator import (
    SCREEN_DIMS,
    cross_check_behavior,
    parse_behavior_model,
    simulate,
)
from bugtrail.static_analysis import analyze_package, load_app_package

from fixture_apps import comp, write_calc_package, write_package


def behavior_doc(**overrides) -> dict:
    doc = {
        "initial": "A",
        "screens": {
            "A": [{"id": "b", "type": "button", "text": "go", "bounds": [10, 10, 100, 50]}],
            "B": [{"id": "x", "type": "image", "bounds": [10, 10, 50, 50], "clickable": False}],
        },
        "edges": [{"from": "A", "component": "b", "to": "B"}],
    }
    doc.update(overrides)
    return doc


class TestParseBehaviorModel:
    def test_valid_model(self):
        model = parse_behavior_model(behavior_doc())
        assert model.initial == "A"
        assert model.edges[("A", "b")] == "B"

    def test_unknown_initial(self):
        with pytest.raises(PackageError):
            parse_behavior_model(behavior_doc(initial="Z"))

    def test_edge_to_unknown_screen(self):
        doc = behavior_doc(edges=[{"from": "A", "component": "b", "to": "Z"}])
        with pytest.raises(PackageError):
            parse_behavior_model(doc)

    def test_edge_component_missing(self):
        doc = behavior_doc(edges=[{"from": "A", "component": "nope", "to": "B"}])
        with pytest.raises(PackageError):
            parse_behavior_model(doc)

    def test_edge_on_unclickable_component(self):
        doc = behavior_doc(edges=[{"from": "B", "component": "x", "to": "A"}])
        with pytest.raises(PackageError):
            parse_behavior_model(doc)

    def test_bounds_must_fit_screen(self):
        doc = behavior_doc()
        doc["screens"]["A"][0]["bounds"] = [850, 10, 100, 50]
        with pytest.raises(PackageError):
            parse_behavior_model(doc)

    def test_component_needs_identity(self):
        doc = behavior_doc()
        doc["screens"]["A"].append({"type": "generic", "bounds": [10, 200, 10, 10]})
        with pytest.raises(PackageError):
            parse_behavior_model(doc)


def driver_for(tmp_path, app_id="sim"):
    pkg_path = write_package(
        tmp_path, app_id, "1",
        {"A": [comp(id="b", text="go"), comp(id="noop", text="quiet")], "B": [comp(id="back", text="back")]},
        [("A", "b", "B"), ("B", "back", "A")],
        "A",
    )
    return simulate(load_app_package(pkg_path))


class TestScriptedDriver:
    def test_click_edge_moves_screens(self, tmp_path):
        driver = driver_for(tmp_path)
        obs = driver.launch_cold()
        assert obs.activity_name == "A"
        assert obs.screen_dims == SCREEN_DIMS
        b = next(r for r in obs.components if r.resource_id == "b")
        driver.perform(ActionKind.CLICK, b)
        assert driver.observe().activity_name == "B"

    def test_click_without_edge_self_loops(self, tmp_path):
        driver = driver_for(tmp_path)
        obs = driver.launch_cold()
        noop = next(r for r in obs.components if r.resource_id == "noop")
        driver.perform(ActionKind.CLICK, noop)
        assert driver.observe().activity_name == "A"

    def test_non_click_actions_self_loop(self, tmp_path):
        driver = driver_for(tmp_path)
        obs = driver.launch_cold()
        b = next(r for r in obs.components if r.resource_id == "b")
        driver.perform(ActionKind.LONG_CLICK, b)
        assert driver.observe().activity_name == "A"

    def test_go_back_retraces_clicks(self, tmp_path):
        driver = driver_for(tmp_path)
        obs = driver.launch_cold()
        assert driver.can_go_back() is False
        b = next(r for r in obs.components if r.resource_id == "b")
        driver.perform(ActionKind.CLICK, b)
        assert driver.can_go_back() is True
        driver.go_back()
        assert driver.observe().activity_name == "A"

    def test_cold_launch_resets(self, tmp_path):
        driver = driver_for(tmp_path)
        obs = driver.launch_cold()
        b = next(r for r in obs.components if r.resource_id == "b")
        driver.perform(ActionKind.CLICK, b)
        obs = driver.launch_cold()
        assert obs.activity_name == "A"
        assert driver.can_go_back() is False

    def test_screenshots_deterministic_across_drivers(self, tmp_path):
        d1 = driver_for(tmp_path, "sima")
        d2 = driver_for(tmp_path, "simb")
        d1.launch_cold()
        d2.launch_cold()
        assert d1.capture_screenshot() == d2.capture_screenshot()

    def test_missing_behavior_rejected(self, tmp_path):
        pkg_path = write_package(tmp_path, "nobeh", "1", {"A": [comp(id="b")]}, [], "A", with_behavior=False)
        with pytest.raises(PackageError):
            simulate(load_app_package(pkg_path))


class TestCrossCheck:
    def test_consistent_package_passes(self, tmp_path):
        pkg = load_app_package(write_calc_package(tmp_path))
        universe = analyze_package(pkg)
        cross_check_behavior(parse_behavior_model(pkg.behavior), universe)

    def test_clickable_mismatch_rejected(self, tmp_path):
        screens = {"A": [comp(id="pic", type="image", clickable=False, swipeable=True)]}
        pkg_path = write_package(tmp_path, "bad", "1", screens, [], "A")
        pkg = load_app_package(pkg_path)
        # behavior claims clickable although the layout says otherwise
        doc = pkg.behavior
        doc["screens"]["A"][0]["clickable"] = True
        with pytest.raises(PackageError):
            cross_check_behavior(parse_behavior_model(doc), analyze_package(pkg))
