import numpy as np
import pytest

from fmrec import demo, recommend, translate
from fmrec.factorize import FactorPair
from fmrec.task import Requirement

MF_FEATURES = (
    "advancedlicense",
    "basiclicense",
    "ABtesting",
    "statistics",
    "multimediaQA",
    "basicQA",
    "share",
)


@pytest.fixture(scope="session")
def survey_model():
    return demo.survey_model()


@pytest.fixture(scope="session")
def survey_task(survey_model):
    return translate(survey_model)


@pytest.fixture(scope="session")
def ab_task(survey_task):
    return survey_task.with_requirements([Requirement("ABtesting", 1)])


def _config(**overrides):
    base = {
        "survey": 1,
        "license": 1,
        "advancedlicense": 1,
        "basiclicense": 0,
        "ABtesting": 1,
        "statistics": 1,
        "QA": 1,
        "basicQA": 1,
        "multimediaQA": 1,
    }
    base.update(overrides)
    return base


@pytest.fixture(scope="session")
def reference_configs():
    """The three survey configurations compatible with requiring ABtesting."""
    return {
        "A1": _config(multimediaQA=0),
        "A2": _config(basicQA=0),
        "A3": _config(),
    }


@pytest.fixture(scope="session")
def utility_table():
    return recommend.utility_table_from_csv(demo.read_text("utilities.csv"))


@pytest.fixture(scope="session")
def profile_simplicity():
    return recommend.profile_from_csv(demo.read_text("profile_simplicity.csv"), "ua")


@pytest.fixture(scope="session")
def profile_productivity():
    return recommend.profile_from_csv(demo.read_text("profile_productivity.csv"), "ub")


@pytest.fixture(scope="session")
def session_logs():
    """Completed sessions u1..u3 plus the ongoing 'current' session."""
    return recommend.session_logs_from_csv(demo.read_text("sessions.csv"), ongoing={"current"})


@pytest.fixture(scope="session")
def current_log(session_logs):
    return next(log for log in session_logs if log.session_id == "current")


@pytest.fixture(scope="session")
def edit_logs():
    return recommend.edit_logs_from_csv(demo.read_text("edits.csv"))


@pytest.fixture(scope="session")
def current_edits(edit_logs):
    return next(log for log in edit_logs if log.session_id == "current")


@pytest.fixture(scope="session")
def demo_factor_pair():
    """Hand-filled interest-dimension factors for the survey features."""
    user_factors = np.array([[0.8, 0.2], [0.2, 0.8]])
    feature_factors = np.array(
        [
            [1.0, 0.1, 1.0, 1.0, 1.0, 1.0, 0.7],
            [0.1, 1.0, 0.3, 0.5, 0.3, 1.0, 1.0],
        ]
    )
    return FactorPair(("ua", "ub"), MF_FEATURES, user_factors, feature_factors)


@pytest.fixture(scope="session")
def interaction_matrix():
    """The bundled session-log matrix with two unobserved share cells."""
    from fmrec.factorize import matrix_from_csv

    return matrix_from_csv(demo.read_text("interactions.csv"))
