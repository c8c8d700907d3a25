import random

import pytest

from fmrec import demo
from fmrec.dsl import ParseError, parse_model, serialize_model
from fmrec.model import (
    CrossTreeConstraint,
    Feature,
    FeatureModel,
    FeatureTree,
    Group,
    ModelError,
    RelChild,
    validate_model,
)
from oracles import random_model


def test_survey_model_structure(survey_model):
    assert survey_model.feature_ids == (
        "survey",
        "license",
        "advancedlicense",
        "basiclicense",
        "ABtesting",
        "statistics",
        "QA",
        "basicQA",
        "multimediaQA",
    )
    assert survey_model.parents["license"] == "survey"
    assert survey_model.parents["basicQA"] == "QA"
    assert survey_model.parents["survey"] is None
    kinds = {(c.kind, c.a, c.b) for c in survey_model.cross_tree}
    assert kinds == {
        ("excludes", "ABtesting", "basiclicense"),
        ("requires", "ABtesting", "statistics"),
        ("excludes", "basiclicense", "multimediaQA"),
    }
    assert validate_model(survey_model) == []


def test_minimal_model():
    model = parse_model("model m { }")
    assert model.root.feature == Feature("m", "m")
    assert model.root.children == ()
    assert model.cross_tree == ()
    assert serialize_model(model) == "model m { }\n"


def test_comments_and_whitespace():
    model = parse_model("# heading\nmodel m {\n  feature x # trailing\n}\n")
    assert model.feature_ids == ("m", "x")
    # relationship defaults to optional
    assert model.root.children[0].kind == "optional"


def test_unknown_feature_in_constraints():
    source = "model m { feature ABtesting }\nconstraints { requires ABtesting nosuchfeature }"
    with pytest.raises(ParseError) as err:
        parse_model(source)
    assert "nosuchfeature" in str(err.value)
    assert err.value.line == 2


def test_duplicate_feature_name():
    with pytest.raises(ParseError, match="duplicate feature name"):
        parse_model("model m { feature x feature x }")


def test_group_too_small():
    with pytest.raises(ParseError, match="at least 2"):
        parse_model("model m { alternative { feature x } }")


def test_relationship_keyword_rejected_on_group_members():
    with pytest.raises(ParseError, match="group members"):
        parse_model("model m { or { mandatory feature x feature y } }")


def test_keyword_cannot_name_feature():
    with pytest.raises(ParseError, match="keyword"):
        parse_model("model constraints { }")


def test_syntax_error_reports_position():
    with pytest.raises(ParseError) as err:
        parse_model("model m {\n  feature = broken\n}")
    assert err.value.line == 2
    assert err.value.col == 11


def test_survey_round_trip(survey_model):
    assert parse_model(serialize_model(survey_model)) == survey_model
    assert parse_model(demo.survey_source()) == survey_model


def test_random_round_trip():
    rng = random.Random(20260809)
    for _ in range(100):
        model = random_model(rng)
        assert parse_model(serialize_model(model)) == model


def test_validate_degenerate_group():
    lonely = Group("alternative", (FeatureTree(Feature.named("x")),))
    model = FeatureModel(FeatureTree(Feature.named("m"), (lonely,)))
    codes = [f.code for f in validate_model(model)]
    assert "degenerate-group" in codes


def test_validate_duplicate_and_bad_name():
    dup = RelChild("optional", FeatureTree(Feature.named("m")))
    bad = RelChild("optional", FeatureTree(Feature.named("9lives")))
    model = FeatureModel(FeatureTree(Feature.named("m"), (dup, bad)))
    codes = {f.code for f in validate_model(model)}
    assert codes == {"duplicate-id", "bad-name"}


def test_validate_cross_tree_references():
    model = FeatureModel(
        FeatureTree(Feature.named("m")),
        (CrossTreeConstraint("requires", "m", "ghost"), CrossTreeConstraint("excludes", "m", "m")),
    )
    codes = [f.code for f in validate_model(model)]
    assert codes.count("unknown-feature") == 1
    assert "self-reference" in codes


def test_serialize_rejects_invalid():
    lonely = Group("or", (FeatureTree(Feature.named("x")),))
    model = FeatureModel(FeatureTree(Feature.named("m"), (lonely,)))
    with pytest.raises(ModelError):
        serialize_model(model)


def test_nested_group_member_subtree_round_trips():
    source = """
model m {
  alternative {
    feature x {
      mandatory feature y
      or {
        feature p
        feature q
      }
    }
    feature z
  }
}
"""
    model = parse_model(source)
    assert model.feature_ids == ("m", "x", "y", "p", "q", "z")
    assert parse_model(serialize_model(model)) == model
