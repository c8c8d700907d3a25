import math

import pytest
from hypothesis import given, strategies as st

from fmrec import recommend
from fmrec.recommend import (
    DimensionMismatchError,
    EditLog,
    InterestProfile,
    NoCandidateError,
    SessionLog,
    UtilityTable,
    ValueRecommendation,
    consistency_filtered,
    group_utility,
    max_rank_distance,
    overall_utility,
    rank_configurations,
    rank_similarity,
    recommend_next_constraint,
    recommend_next_feature,
    recommend_value,
    user_similarity,
)


def other(session_logs, sid):
    return next(log for log in session_logs if log.session_id == sid)


# -- utility -------------------------------------------------------------------


def test_overall_utility_reference_values(reference_configs, utility_table, profile_simplicity, profile_productivity):
    assert overall_utility(reference_configs["A3"], utility_table, profile_simplicity) == pytest.approx(2.76)
    assert overall_utility(reference_configs["A3"], utility_table, profile_productivity) == pytest.approx(4.44)
    assert overall_utility(reference_configs["A1"], utility_table, profile_simplicity) == pytest.approx(2.32)
    assert overall_utility(reference_configs["A1"], utility_table, profile_productivity) == pytest.approx(3.58)


def test_utility_ignores_untabulated_features(utility_table, profile_simplicity):
    # survey, license, QA are selected everywhere but carry no utilities
    assert overall_utility({"survey": 1, "license": 1, "QA": 1}, utility_table, profile_simplicity) == 0.0


def test_utility_scope_restriction(reference_configs, utility_table, profile_simplicity):
    scoped = overall_utility(
        reference_configs["A3"], utility_table, profile_simplicity, scope={"basicQA"}
    )
    assert scoped == pytest.approx(1.0)


def test_utility_dimension_mismatch(utility_table):
    lopsided = InterestProfile("x", {"simplicity": 0.5})
    with pytest.raises(DimensionMismatchError):
        overall_utility({}, utility_table, lopsided)


def test_utility_linearity(reference_configs, utility_table, profile_simplicity):
    config = reference_configs["A3"]
    total = overall_utility(config, utility_table, profile_simplicity)
    parts = sum(
        overall_utility({feature: 1}, utility_table, profile_simplicity)
        for feature, value in config.items()
        if value == 1
    )
    assert total == pytest.approx(parts)


def test_rank_configurations_prefers_full_selection(reference_configs, utility_table, profile_simplicity, profile_productivity):
    configs = [reference_configs["A1"], reference_configs["A2"], reference_configs["A3"]]
    for profile in (profile_simplicity, profile_productivity):
        ranked = rank_configurations(configs, utility_table, profile)
        assert ranked[0][0] == reference_configs["A3"]


def test_rank_configurations_stable_on_ties(utility_table, profile_simplicity):
    first = {"basicQA": 1}
    second = {"basicQA": 1, "survey": 1}  # same utility, later in input
    ranked = rank_configurations([first, second], utility_table, profile_simplicity)
    assert ranked == [(first, 1.0), (second, 1.0)]
    with pytest.raises(ValueError):
        rank_configurations([], utility_table, profile_simplicity)


def test_ranking_invariant_under_profile_scaling(reference_configs, utility_table, profile_simplicity):
    configs = list(reference_configs.values())
    scaled = InterestProfile("s", {d: w * 0.25 for d, w in profile_simplicity.weights.items()})
    order = [tuple(c.items()) for c, _ in rank_configurations(configs, utility_table, profile_simplicity)]
    scaled_order = [tuple(c.items()) for c, _ in rank_configurations(configs, utility_table, scaled)]
    assert order == scaled_order


def test_group_utility(reference_configs, utility_table, profile_simplicity, profile_productivity):
    value = group_utility(reference_configs["A3"], utility_table, [profile_simplicity, profile_productivity])
    assert value == pytest.approx((2.76 + 4.44) / 2)
    same = group_utility(reference_configs["A3"], utility_table, [profile_simplicity] * 3)
    assert abs(same - 2.76) < 1e-12
    assert group_utility({}, utility_table, [profile_simplicity]) == 0.0
    with pytest.raises(ValueError):
        group_utility({}, utility_table, [])


def test_utility_table_validation():
    with pytest.raises(ValueError):
        UtilityTable((), {})
    with pytest.raises(ValueError):
        UtilityTable(("d",), {"f": {"d": 1.5}})
    with pytest.raises(ValueError):
        UtilityTable(("d", "e"), {"f": {"d": 0.5}})


# -- value recommendation ---------------------------------------------------------


def test_user_similarity_values(session_logs, current_log):
    assert user_similarity(current_log, other(session_logs, "u1")) == 1.0
    assert user_similarity(current_log, other(session_logs, "u2")) == pytest.approx(1 / 3)
    assert user_similarity(current_log, other(session_logs, "u3")) == 1.0


def test_user_similarity_disjoint_sessions():
    a = SessionLog("a", "a", {"x": 1})
    b = SessionLog("b", "b", {"y": 0})
    assert user_similarity(a, b) == 0.0


def test_recommend_value_two_neighbors(session_logs, current_log):
    rec = recommend_value(session_logs, current_log, "ABtesting", k=2)
    assert rec == ValueRecommendation("ABtesting", 0, ("u1", "u3"), 1.0)


def test_recommend_value_three_neighbors(session_logs, current_log):
    rec = recommend_value(session_logs, current_log, "ABtesting", k=3)
    assert rec.value == 0
    assert rec.neighbors == ("u1", "u3", "u2")
    assert rec.vote_fraction == pytest.approx(2 / 3)


def test_recommend_value_single_log():
    log = SessionLog("only", "only", {"x": 1, "t": 1}, completed=True)
    current = SessionLog("cur", "cur", {"x": 1})
    rec = recommend_value([log], current, "t", k=1)
    assert (rec.value, rec.vote_fraction, rec.neighbors) == (1, 1.0, ("only",))


def test_recommend_value_global_vote_with_k_equal_logs(session_logs, current_log):
    completed = [log for log in session_logs if log.completed]
    rec = recommend_value(session_logs, current_log, "ABtesting", k=len(completed))
    votes = [log.values["ABtesting"] for log in completed]
    majority = 1 if sum(votes) > len(votes) / 2 else 0
    assert rec.value == majority


def test_recommend_value_tie_prefers_exclusion():
    logs = [
        SessionLog("a", "a", {"x": 1, "t": 1}, completed=True),
        SessionLog("b", "b", {"x": 1, "t": 0}, completed=True),
    ]
    current = SessionLog("cur", "cur", {"x": 1})
    assert recommend_value(logs, current, "t", k=2).value == 0


def test_recommend_value_preconditions(session_logs, current_log):
    with pytest.raises(ValueError):
        recommend_value(session_logs, current_log, "ABtesting", k=0)
    with pytest.raises(ValueError):
        recommend_value(session_logs, current_log, "license", k=2)  # already specified
    with pytest.raises(NoCandidateError):
        recommend_value([], current_log, "ABtesting", k=2)


def test_ongoing_sessions_never_vote(current_log):
    ongoing = SessionLog("open", "open", {"license": 1, "ABtesting": 1}, completed=False)
    with pytest.raises(NoCandidateError):
        recommend_value([ongoing], current_log, "ABtesting", k=1)


# -- rank similarity and next items --------------------------------------------------


def test_rank_similarity_reference_cases(session_logs, current_log):
    u3 = other(session_logs, "u3")
    assert max_rank_distance(current_log.ranks, u3.ranks) == 4
    assert rank_similarity(current_log.ranks, u3.ranks) == 1.0
    u2 = other(session_logs, "u2")
    assert max_rank_distance(current_log.ranks, u2.ranks) == 5
    assert rank_similarity(current_log.ranks, u2.ranks) == pytest.approx(0.4)
    u1 = other(session_logs, "u1")
    assert rank_similarity(current_log.ranks, u1.ranks) == pytest.approx(0.5)


def test_rank_similarity_degenerate():
    assert rank_similarity({"x": 3}, {"x": 3}) == 1.0
    assert rank_similarity({}, {}) == 1.0


def test_recommend_next_feature(session_logs, current_log):
    assert recommend_next_feature(session_logs, current_log) == "QA"


def test_recommend_next_feature_falls_through_exhausted_neighbor():
    best = SessionLog("best", "best", {"a": 1, "b": 1}, {"a": 1, "b": 2})
    second = SessionLog("second", "second", {"a": 1, "b": 0, "c": 1}, {"a": 1, "b": 3, "c": 4})
    current = SessionLog("cur", "cur", {"a": 1, "b": 1}, {"a": 1, "b": 2})
    assert rank_similarity(current.ranks, best.ranks) == 1.0
    assert recommend_next_feature([best, second], current) == "c"


def test_recommend_next_feature_preconditions(session_logs):
    empty = SessionLog("cur", "cur", {})
    with pytest.raises(ValueError):
        recommend_next_feature(session_logs, empty)
    lonely = SessionLog("cur", "cur", {"license": 1}, {"license": 1})
    with pytest.raises(NoCandidateError):
        recommend_next_feature([], lonely)


def test_recommend_next_constraint(edit_logs, current_edits):
    assert recommend_next_constraint(edit_logs, current_edits) == "c4"


def test_recommend_next_constraint_completion_case():
    full = EditLog("done", {"c1": 1, "c2": 2, "c3": 3, "c4": 4})
    current = EditLog("cur", {"c1": 1, "c2": 2, "c3": 3})
    assert recommend_next_constraint([full], current) == "c4"


# -- consistency filter ------------------------------------------------------------


def test_filter_flips_inconsistent_recommendation(survey_task):
    rec = ValueRecommendation("ABtesting", 1, ("u2",), 1.0)
    filtered = consistency_filtered(survey_task, {"basiclicense": 1}, rec)
    assert filtered.value == 0
    assert filtered.vote_fraction == 0.0
    assert filtered.neighbors == ("u2",)


def test_filter_keeps_consistent_recommendation(survey_task):
    rec = ValueRecommendation("ABtesting", 0, ("u1", "u3"), 1.0)
    assert consistency_filtered(survey_task, {"basiclicense": 1}, rec) is rec


def test_filter_suppresses_on_broken_partial(survey_task):
    rec = ValueRecommendation("statistics", 1, ("u1",), 1.0)
    assert consistency_filtered(survey_task, {"survey": 0}, rec) is None


# -- properties ----------------------------------------------------------------------

ranks_maps = st.dictionaries(
    st.sampled_from(["a", "b", "c", "d", "e"]),
    st.integers(min_value=1, max_value=30),
    max_size=5,
).filter(lambda m: len(set(m.values())) == len(m))


@given(ranks_maps, ranks_maps)
def test_rank_similarity_symmetric_and_bounded(a, b):
    left = rank_similarity(a, b)
    assert left == rank_similarity(b, a)
    assert 0.0 <= left <= 1.0


@given(ranks_maps)
def test_rank_similarity_identity(a):
    assert rank_similarity(a, a) == 1.0


values_maps = st.dictionaries(
    st.sampled_from(["a", "b", "c", "d", "e"]), st.integers(min_value=0, max_value=1), max_size=5
)


@given(values_maps, values_maps)
def test_user_similarity_symmetric_and_bounded(a, b):
    log_a = SessionLog("a", "a", a)
    log_b = SessionLog("b", "b", b)
    left = user_similarity(log_a, log_b)
    assert left == user_similarity(log_b, log_a)
    assert 0.0 <= left <= 1.0
    if a:
        assert user_similarity(log_a, log_a) == 1.0


# -- session log validation and CSV -----------------------------------------------------


def test_session_log_validation():
    with pytest.raises(ValueError):
        SessionLog("s", "u", {"x": 2})
    with pytest.raises(ValueError):
        SessionLog("s", "u", {"x": 1}, {"x": 0})
    with pytest.raises(ValueError):
        SessionLog("s", "u", {"x": 1, "y": 1}, {"x": 1, "y": 1})
    with pytest.raises(ValueError):
        SessionLog("s", "u", {"x": 1}, {"ghost": 1})


def test_session_csv_loader(session_logs):
    by_id = {log.session_id: log for log in session_logs}
    assert by_id["u1"].completed and not by_id["current"].completed
    assert by_id["u2"].values["ABtesting"] == 1
    assert by_id["u3"].ranks["QA"] == 4
    assert by_id["current"].ranks == {"license": 1, "advancedlicense": 2, "basiclicense": 3}


def test_session_csv_missing_columns():
    with pytest.raises(ValueError, match="missing columns"):
        recommend.session_logs_from_csv("session_id,feature\n")


def test_edit_csv_requires_ranks():
    text = "session_id,user_id,feature,value,rank\ns1,u,c1,,\n"
    with pytest.raises(ValueError, match="rank"):
        recommend.edit_logs_from_csv(text)


def test_profile_csv_roundtrip(profile_simplicity):
    assert profile_simplicity.weights == {"simplicity": 0.8, "productivity": 0.2}
    assert math.isclose(sum(profile_simplicity.weights.values()), 1.0)
