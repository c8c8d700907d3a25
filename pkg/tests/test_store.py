import pytest

from fmrec import demo, recommend
from fmrec.cli import _import_sessions
from fmrec.store import (
    COMPLETED,
    INCONSISTENT,
    OPEN,
    InvalidOperationError,
    Store,
    UnknownIdError,
    ValidationError,
)


@pytest.fixture
def store():
    return Store()


@pytest.fixture
def survey_store(store):
    store.store_model(demo.survey_source())
    return store


def test_store_and_fetch_model(survey_store):
    record = survey_store.model("m1")
    assert record.model.feature_ids[0] == "survey"
    assert record.source == demo.survey_source()
    with pytest.raises(UnknownIdError):
        survey_store.model("m999")


def test_store_rejects_bad_source(store):
    from fmrec.dsl import ParseError

    with pytest.raises(ParseError):
        store.store_model("model m { feature x feature x }")
    assert store.model_ids() == []


def test_session_lifecycle(survey_store):
    session = survey_store.create_session("m1", "alice")
    status, forced = survey_store.record_assignment(session.session_id, "license", 1)
    assert status == OPEN
    assert forced == {"survey": 1, "QA": 1}
    survey_store.record_assignment(session.session_id, "advancedlicense", 0)
    survey_store.record_assignment(session.session_id, "basiclicense", 1)
    record = survey_store.session(session.session_id)
    assert record.ranks() == {"license": 1, "advancedlicense": 2, "basiclicense": 3}
    assert survey_store.complete_session(session.session_id) == COMPLETED
    with pytest.raises(InvalidOperationError):
        survey_store.record_assignment(session.session_id, "statistics", 1)


def test_inconsistent_preferences_flagged(survey_store):
    session = survey_store.create_session("m1", "bob")
    for feature, value in (("license", 1), ("advancedlicense", 0), ("basiclicense", 1)):
        status, _ = survey_store.record_assignment(session.session_id, feature, value)
        assert status == OPEN
    status, forced = survey_store.record_assignment(session.session_id, "ABtesting", 1)
    assert status == INCONSISTENT
    assert forced == {}
    with pytest.raises(InvalidOperationError):
        survey_store.complete_session(session.session_id)


def test_reassignment_updates_effective_value(survey_store):
    session = survey_store.create_session("m1", "carol")
    survey_store.record_assignment(session.session_id, "basiclicense", 1)
    status, _ = survey_store.record_assignment(session.session_id, "ABtesting", 1)
    assert status == INCONSISTENT
    status, _ = survey_store.record_assignment(session.session_id, "ABtesting", 0)
    assert status == OPEN
    assert survey_store.session(session.session_id).values()["ABtesting"] == 0


def test_assignment_validation(survey_store):
    session = survey_store.create_session("m1", "dave")
    with pytest.raises(ValidationError):
        survey_store.record_assignment(session.session_id, "ghost", 1)
    with pytest.raises(ValidationError):
        survey_store.record_assignment(session.session_id, "license", 7)
    with pytest.raises(UnknownIdError):
        survey_store.record_assignment("s999", "license", 1)
    with pytest.raises(UnknownIdError):
        survey_store.create_session("m404", "dave")


def test_import_sessions_and_logs(survey_store):
    count = _import_sessions(survey_store, "m1", demo.read_text("sessions.csv"))
    assert count == 4
    logs = survey_store.session_logs("m1", exclude="current")
    assert {log.session_id for log in logs} == {"u1", "u2", "u3"}
    assert all(log.completed for log in logs)
    u3 = next(log for log in logs if log.session_id == "u3")
    assert u3.ranks["QA"] == 4


def test_import_validation(survey_store):
    with pytest.raises(ValidationError, match="rank regression"):
        survey_store.import_session("m1", "x1", "x", [("license", 1, 2), ("QA", 1, 2)])
    with pytest.raises(ValidationError, match="unknown feature"):
        survey_store.import_session("m1", "x2", "x", [("ghost", 1, 1)])
    survey_store.import_session("m1", "x3", "x", [("license", 1, 1)])
    with pytest.raises(ValidationError, match="already exists"):
        survey_store.import_session("m1", "x3", "x", [("license", 1, 1)])


def test_recommendation_data_round_trip(store):
    table = recommend.utility_table_from_csv(demo.read_text("utilities.csv"))
    profile = recommend.profile_from_csv(demo.read_text("profile_simplicity.csv"), "ua")
    store.set_utilities(table)
    store.set_profile(profile)
    store.set_matrix_csv(demo.read_text("interactions.csv"))
    assert store.utilities() == table
    assert store.profile("ua") == profile
    assert store.matrix_csv() == demo.read_text("interactions.csv")
    with pytest.raises(UnknownIdError):
        store.profile("nobody")


def test_journal_replay_restores_state(tmp_path):
    path = tmp_path / "journal.jsonl"
    store = Store(path)
    store.store_model(demo.survey_source())
    _import_sessions(store, "m1", demo.read_text("sessions.csv"))
    session = store.create_session("m1", "erin")
    store.record_assignment(session.session_id, "license", 1)
    store.record_assignment(session.session_id, "basiclicense", 1)
    store.record_assignment(session.session_id, "ABtesting", 1)  # goes inconsistent
    store.set_utilities(recommend.utility_table_from_csv(demo.read_text("utilities.csv")))
    digest = store.state_digest()
    store.close()

    replayed = Store(path)
    assert replayed.state_digest() == digest
    assert replayed.session(session.session_id).status == INCONSISTENT
    # replay keeps counters moving: the next session id is fresh
    another = replayed.create_session("m1", "frank")
    assert another.session_id not in {session.session_id, "u1", "u2", "u3", "current"}
    replayed.close()


def test_fresh_ids_skip_imported_names(survey_store):
    survey_store.import_session("m1", "s1", "x", [("license", 1, 1)])
    session = survey_store.create_session("m1", "y")
    assert session.session_id != "s1"
