from __future__ import annotations

import pytest

from bugtrail.errors import NotFoundError, StateError, ValidationError
from bugtrail.model import (
    Action,
    ActionKind,
    ComponentType,
    ManualComponent,
    Orientation,
    RelativeLocation,
    ReportSession,
    ReproStep,
    StateHypothesis,
    StepTarget,
)
from bugtrail.queries import ModelBundle
from bugtrail.suggest import (
    MANUAL_OPTION_TEXT,
    Provenance,
    advance_hypothesis,
    confirmation_screens,
    initial_hypothesis,
    recompute_hypothesis,
    record_step,
    suggest_components,
)
from bugtrail.static_analysis import load_app_package

from conftest import ingest_package, rip_app
from fixture_apps import ripper_fixtures, write_package
from oracles import enumerate_click_paths
from bugtrail.store import StoreHandle


@pytest.fixture(scope="module")
def calc(calc_store) -> ModelBundle:
    return calc_store.bundle("calc", "1.0")


def state_named(bundle: ModelBundle, activity: str):
    (sid,) = [s for s in bundle.state_ids() if bundle.state(s).activity_name == activity]
    return bundle.state(sid)


def instance_with_text(state, text: str):
    (inst,) = [i for i in state.instances if i.runtime_text == text]
    return inst


def click_step(state, text: str, index: int = 1, confirmed: str | None = None) -> ReproStep:
    inst = instance_with_text(state, text)
    return ReproStep(
        step_index=index,
        action=Action(ActionKind.CLICK),
        target=StepTarget(inst.descriptor_id, inst.object_index, state.state_id),
        confirmed_full_screenshot=confirmed,
    )


class TestInitialHypothesis:
    def test_cold_start_is_the_root(self, calc):
        h = initial_hypothesis(calc)
        assert h.states == frozenset({calc.root_state_id()})
        assert calc.state(calc.root_state_id()).activity_name == "Main"

    def test_many_states_still_just_the_root(self, calc):
        assert len(initial_hypothesis(calc).states) == 1

    def test_missing_model_errors(self, calc_store):
        with pytest.raises(NotFoundError):
            calc_store.bundle("ghost", "9")


class TestAdvanceHypothesis:
    def test_ripped_click_follows_edge(self, calc):
        main = state_named(calc, "Main")
        settings = state_named(calc, "Settings")
        h = advance_hypothesis(initial_hypothesis(calc), click_step(main, "Settings"), calc)
        assert h.states == frozenset({settings.state_id})

    def test_self_loop_keeps_state(self, calc):
        main = state_named(calc, "Main")
        h = advance_hypothesis(initial_hypothesis(calc), click_step(main, "OK"), calc)
        assert h.states == frozenset({main.state_id})

    def test_type_step_breaks_to_unknown(self, calc):
        main = state_named(calc, "Main")
        (field,) = calc.components_for_state(main.state_id, ActionKind.TYPE)
        step = ReproStep(
            step_index=1,
            action=Action(ActionKind.TYPE, text="hi"),
            target=StepTarget(field.descriptor_id, field.object_index, main.state_id),
            entered_text="hi",
        )
        assert advance_hypothesis(initial_hypothesis(calc), step, calc).is_known is False

    def test_manual_step_breaks_to_unknown(self, calc):
        manual = ManualComponent(ComponentType.BUTTON, "mystery", RelativeLocation.CENTER)
        step = ReproStep(step_index=1, action=Action(ActionKind.CLICK), target=manual)
        assert advance_hypothesis(initial_hypothesis(calc), step, calc).is_known is False

    def test_confirmation_reanchors_unknown(self, calc):
        settings = state_named(calc, "Settings")
        manual = ManualComponent(ComponentType.BUTTON, "x", RelativeLocation.CENTER)
        step = ReproStep(
            step_index=1,
            action=Action(ActionKind.CLICK),
            target=manual,
            confirmed_full_screenshot=settings.full_screenshot,
        )
        h = advance_hypothesis(StateHypothesis.unknown(), step, calc)
        assert h.states == frozenset({settings.state_id})

    def test_confirmation_intersects_known(self, calc):
        main = state_named(calc, "Main")
        settings = state_named(calc, "Settings")
        step = click_step(main, "Settings", confirmed=settings.full_screenshot)
        h = advance_hypothesis(initial_hypothesis(calc), step, calc)
        assert h.states == frozenset({settings.state_id})

    def test_contradicting_confirmation_empties_to_unknown(self, calc):
        main = state_named(calc, "Main")
        about = state_named(calc, "About")
        step = click_step(main, "Settings", confirmed=about.full_screenshot)
        assert advance_hypothesis(initial_hypothesis(calc), step, calc).is_known is False

    def test_intersection_never_grows(self, calc):
        main = state_named(calc, "Main")
        settings = state_named(calc, "Settings")
        plain = advance_hypothesis(initial_hypothesis(calc), click_step(main, "Settings"), calc)
        confirmed = advance_hypothesis(
            initial_hypothesis(calc), click_step(main, "Settings", confirmed=settings.full_screenshot), calc
        )
        assert confirmed.states <= plain.states


class TestSuggestComponents:
    def test_state_scoped_entries_plus_manual(self, calc):
        sset = suggest_components(initial_hypothesis(calc), ActionKind.CLICK, calc)
        assert sset.provenance is Provenance.STATE_SCOPED
        assert sset.entries[-1].is_manual_option is True
        assert sum(1 for e in sset.entries if e.is_manual_option) == 1
        texts = [e.display_text for e in sset.entries if not e.is_manual_option]
        assert {"OK", "Cancel", "Settings"} <= set(texts)
        assert sset.entries[-1].display_text == MANUAL_OPTION_TEXT

    def test_entries_are_enriched(self, calc):
        sset = suggest_components(initial_hypothesis(calc), ActionKind.CLICK, calc)
        for entry in sset.entries[:-1]:
            assert entry.display_type is not None
            assert entry.display_location is not None
            assert entry.thumbnail is not None
            assert entry.state_id == calc.root_state_id()

    def test_unknown_falls_back_to_all_screens(self, calc):
        sset = suggest_components(StateHypothesis.unknown(), ActionKind.CLICK, calc)
        assert sset.provenance is Provenance.ALL_SCREENS_FALLBACK
        want = [
            (sid, inst.descriptor_id, inst.object_index)
            for sid, inst in calc.all_components(ActionKind.CLICK)
        ]
        got = [
            (e.state_id, e.descriptor_id, e.object_index)
            for e in sset.entries
            if not e.is_manual_option
        ]
        assert got == want

    def test_fallback_never_empty(self, calc):
        sset = suggest_components(StateHypothesis.unknown(), ActionKind.LONG_CLICK, calc)
        assert sset.entries[-1].is_manual_option


@pytest.fixture(scope="module")
def dup_bundle(tmp_path_factory) -> ModelBundle:
    tmp = tmp_path_factory.mktemp("dups")
    screens, edges, initial = ripper_fixtures()["dups"]
    pkg_path = write_package(tmp, "dups", "1", screens, edges, initial)
    store = StoreHandle(tmp / "store")
    ingest_package(store, pkg_path)
    rip_app(store, "dups", "1")
    return store.bundle("dups", "1")


class TestDisambiguation:
    def test_duplicates_numbered_in_order(self, dup_bundle):
        h = initial_hypothesis(dup_bundle)
        sset = suggest_components(h, ActionKind.CLICK, dup_bundle)
        labels = [e.disambiguator for e in sset.entries if e.display_text == "Delete"]
        assert labels == ["Option #1", "Option #2", "Option #3"]

    def test_non_duplicates_unlabelled(self, dup_bundle):
        sset = suggest_components(initial_hypothesis(dup_bundle), ActionKind.CLICK, dup_bundle)
        add = [e for e in sset.entries if e.display_text == "Add"]
        assert add and all(e.disambiguator is None for e in add)

    def test_labels_stable_across_calls(self, dup_bundle):
        one = suggest_components(initial_hypothesis(dup_bundle), ActionKind.CLICK, dup_bundle)
        two = suggest_components(initial_hypothesis(dup_bundle), ActionKind.CLICK, dup_bundle)
        assert one == two

    def test_duplicate_click_keeps_hypothesis_known(self, dup_bundle):
        lst = state_named(dup_bundle, "List")
        for index in (1, 2, 3):
            (inst,) = [
                i for i in lst.instances if i.runtime_text == "Delete" and i.object_index == index
            ]
            step = ReproStep(
                step_index=1,
                action=Action(ActionKind.CLICK),
                target=StepTarget(inst.descriptor_id, inst.object_index, lst.state_id),
            )
            h = advance_hypothesis(initial_hypothesis(dup_bundle), step, dup_bundle)
            assert h.is_known and dup_bundle.state(next(iter(h.states))).activity_name == "Confirm"


class TestConfirmationScreens:
    def test_single_state_instance(self, calc):
        main = state_named(calc, "Main")
        sset = suggest_components(initial_hypothesis(calc), ActionKind.CLICK, calc)
        entry = next(e for e in sset.entries if e.display_text == "OK")
        assert confirmation_screens(initial_hypothesis(calc), entry, calc) == [main.full_screenshot]

    def test_manual_option_has_nothing_to_confirm(self, calc):
        sset = suggest_components(initial_hypothesis(calc), ActionKind.CLICK, calc)
        assert confirmation_screens(initial_hypothesis(calc), sset.entries[-1], calc) == []

    def test_shared_descriptor_on_two_states(self, tmp_path):
        screens = {
            "A": [comp_shared(), extra("hint_a")],
            "B": [comp_shared(), extra("hint_b")],
        }
        pkg_path = write_package(
            tmp_path, "shared", "1", screens,
            [("A", "ok", "B"), ("B", "ok", "A")],
            "A", layout_map={"A": "shared.xml", "B": "shared.xml"},
        )
        store = StoreHandle(tmp_path / "store")
        ingest_package(store, pkg_path)
        rip_app(store, "shared", "1")
        bundle = store.bundle("shared", "1")
        sset = suggest_components(StateHypothesis.unknown(), ActionKind.CLICK, bundle)
        entry = next(e for e in sset.entries if e.display_text == "Same")
        shots = confirmation_screens(StateHypothesis.unknown(), entry, bundle)
        assert len(shots) == 2


def comp_shared():
    from fixture_apps import comp

    return comp(id="ok", text="Same", bounds=[100, 100, 300, 100])


def extra(text: str):
    from fixture_apps import comp

    return comp(type="generic", text=text, clickable=False, in_layout=False, bounds=[100, 300, 200, 80])


class TestSoundnessOverPaths:
    @pytest.mark.parametrize("name", ["five", "dups", "deep"])
    def test_every_model_path_stays_known_and_suggested(self, tmp_path_factory, name):
        tmp = tmp_path_factory.mktemp(f"sound-{name}")
        screens, edges, initial = ripper_fixtures()[name]
        pkg_path = write_package(tmp, name, "1", screens, edges, initial)
        store = StoreHandle(tmp / "store")
        ingest_package(store, pkg_path)
        rip_app(store, name, "1")
        bundle = store.bundle(name, "1")
        behavior = load_app_package(pkg_path).behavior
        assert_paths_sound(bundle, behavior, max_len=6)


def assert_paths_sound(bundle: ModelBundle, behavior: dict, max_len: int) -> None:
    """Replay every click path of the behavior model as recorded steps; at
    each hop the hypothesis must stay KNOWN and the suggestion set must
    contain the clicked component."""
    states_by_activity = {bundle.state(s).activity_name: bundle.state(s) for s in bundle.state_ids()}
    descriptor_key = _descriptor_key_fn(bundle)
    for path in enumerate_click_paths(behavior, max_len):
        h = initial_hypothesis(bundle)
        for step_no, (screen, key, next_screen) in enumerate(path, start=1):
            assert h.is_known, f"hypothesis lost before clicking {key!r} on {screen!r}"
            sset = suggest_components(h, ActionKind.CLICK, bundle)
            matching = [
                e for e in sset.entries
                if not e.is_manual_option
                and bundle.state(e.state_id).activity_name == screen
                and descriptor_key(e.descriptor_id, e.display_text) == key
            ]
            assert matching, f"{key!r} missing from suggestions on {screen!r}"
            assert sset.provenance is Provenance.STATE_SCOPED
            chosen = matching[0]
            step = ReproStep(
                step_index=step_no,
                action=Action(ActionKind.CLICK),
                target=StepTarget(chosen.descriptor_id, chosen.object_index, chosen.state_id),
            )
            h = advance_hypothesis(h, step, bundle)
            assert h.is_known, f"hypothesis lost after clicking {key!r} on {screen!r}"
            reached = {bundle.state(s).activity_name for s in h.states}
            assert next_screen in reached


def _descriptor_key_fn(bundle: ModelBundle):
    def key_of(descriptor_id: str, display_text: str) -> str:
        desc = bundle.descriptor(descriptor_id)
        return desc.resource_id or display_text

    return key_of


class TestRecomputeEqualsIncremental:
    def test_along_a_mixed_path(self, calc):
        main = state_named(calc, "Main")
        settings = state_named(calc, "Settings")
        steps = [
            click_step(main, "Settings", index=1),
            click_step(settings, "About", index=2),
            ReproStep(
                step_index=3,
                action=Action(ActionKind.CLICK),
                target=ManualComponent(ComponentType.IMAGE, "logo?", RelativeLocation.TOP_LEFT),
            ),
        ]
        h = initial_hypothesis(calc)
        for step in steps:
            h = advance_hypothesis(h, step, calc)
        assert recompute_hypothesis(calc, steps) == h


class TestRecordStep:
    def _session(self, calc) -> ReportSession:
        return ReportSession(
            session_id="S1",
            app_id="calc",
            app_version="1.0",
            reporter_name="r",
            device_name="d",
            orientation=Orientation.PORTRAIT,
            title="t",
            description="",
            hypothesis=initial_hypothesis(calc),
        )

    def test_steps_index_contiguously(self, calc):
        session = self._session(calc)
        main = state_named(calc, "Main")
        ok = instance_with_text(main, "OK")
        target = StepTarget(ok.descriptor_id, ok.object_index, main.state_id)
        first = record_step(session, calc, action=Action(ActionKind.CLICK), target=target)
        second = record_step(session, calc, action=Action(ActionKind.CLICK), target=target)
        assert (first.step_index, second.step_index) == (1, 2)

    def test_type_step_stores_text(self, calc):
        session = self._session(calc)
        main = state_named(calc, "Main")
        (field,) = calc.components_for_state(main.state_id, ActionKind.TYPE)
        step = record_step(
            session, calc,
            action=Action(ActionKind.TYPE, text="hello"),
            target=StepTarget(field.descriptor_id, field.object_index, main.state_id),
            entered_text="hello",
        )
        assert step.entered_text == "hello"
        assert session.hypothesis.is_known is False

    def test_text_on_click_rejected(self, calc):
        session = self._session(calc)
        main = state_named(calc, "Main")
        ok = instance_with_text(main, "OK")
        with pytest.raises(ValidationError):
            record_step(
                session, calc,
                action=Action(ActionKind.CLICK),
                target=StepTarget(ok.descriptor_id, ok.object_index, main.state_id),
                entered_text="nope",
            )

    def test_step_after_finalize_rejected(self, calc):
        session = self._session(calc)
        session.finalized_report_id = 3
        manual = ManualComponent(ComponentType.BUTTON, "x", RelativeLocation.CENTER)
        with pytest.raises(StateError):
            record_step(session, calc, action=Action(ActionKind.CLICK), target=manual)

    def test_bogus_target_rejected(self, calc):
        session = self._session(calc)
        with pytest.raises(ValidationError):
            record_step(
                session, calc,
                action=Action(ActionKind.CLICK),
                target=StepTarget("no-such", 1, calc.root_state_id()),
            )

    def test_persist_callback_runs(self, calc):
        session = self._session(calc)
        seen = []
        manual = ManualComponent(ComponentType.BUTTON, "x", RelativeLocation.CENTER)
        record_step(session, calc, action=Action(ActionKind.CLICK), target=manual, persist=seen.append)
        assert seen == [session]
