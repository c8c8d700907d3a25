"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error (unparseable or
semantically invalid inputs), 3 infeasible (no solution / recommendation
suppressed). ``--json`` switches every command from human-readable tables
to machine-readable JSON on stdout.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import diagnose, factorize, recommend, solver
from .dsl import ParseError, parse_model
from .model import ModelError
from .store import Store, ValidationError
from .task import ConfigurationTask, Requirement, translate

__all__ = ["cli", "main"]


class Infeasible(Exception):
    """No solution exists for the request (exit code 3)."""


class DataError(Exception):
    """Input files or values are invalid (exit code 2)."""


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def _load_task(model_path: str, require: tuple[str, ...]) -> ConfigurationTask:
    model = parse_model(_read(model_path))
    task = translate(model)
    return task.with_requirements(_parse_require(require, set(task.variables)))


def _parse_require(require: tuple[str, ...], known: set[str]) -> list[Requirement]:
    out: list[Requirement] = []
    for option in require:
        for chunk in option.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            name, sep, raw = chunk.partition("=")
            if not sep or raw.strip() not in ("0", "1"):
                raise DataError(f"bad requirement {chunk!r}, expected feature=0|1")
            name = name.strip()
            if name not in known:
                raise DataError(f"unknown feature {name!r}")
            out.append(Requirement(name, int(raw)))
    return out


def _emit(payload: dict, as_json: bool, human) -> None:
    if as_json:
        click.echo(json.dumps(payload, indent=2))
    else:
        human()


def _config_line(config: dict[str, int]) -> str:
    return " ".join(f"{feature}={value}" for feature, value in config.items())


@click.group()
def cli():
    """Feature-model configuration and recommendation toolkit."""


@cli.command("translate")
@click.argument("model_file")
@click.option("--json", "as_json", is_flag=True, help="JSON output.")
def translate_cmd(model_file: str, as_json: bool):
    """Show the constraint task derived from MODEL_FILE."""
    task = _load_task(model_file, ())
    from .formula import describe

    payload = {
        "variables": list(task.variables),
        "domains": {name: [0, 1] for name in task.variables},
        "modelConstraints": [describe(c) for c in task.model_constraints],
        "requirements": [str(r) for r in task.requirements],
    }

    def human():
        click.echo("variables: " + " ".join(task.variables))
        for line in payload["modelConstraints"]:
            click.echo(f"  {line}")

    _emit(payload, as_json, human)


@cli.command("solve")
@click.argument("model_file")
@click.option("--require", "-r", multiple=True, help="feature=0|1 requirements (repeatable).")
@click.option("--prefer", multiple=True, help="feature=score preferences in [0,1] (repeatable).")
@click.option("--json", "as_json", is_flag=True)
def solve_cmd(model_file: str, require: tuple[str, ...], prefer: tuple[str, ...], as_json: bool):
    """Find one configuration satisfying MODEL_FILE plus requirements."""
    task = _load_task(model_file, require)
    if prefer:
        scores: dict[str, float] = {}
        for option in prefer:
            for chunk in option.split(","):
                name, sep, raw = chunk.strip().partition("=")
                if not sep:
                    raise DataError(f"bad preference {chunk!r}, expected feature=score")
                try:
                    scores[name.strip()] = float(raw)
                except ValueError:
                    raise DataError(f"bad score in {chunk!r}") from None
        config = solver.consistent_completion(task, {}, scores)
    else:
        config = solver.solve(task)
    if config is None:
        raise Infeasible("no configuration satisfies the requirements")
    _emit({"configuration": config}, as_json, lambda: click.echo(_config_line(config)))


@cli.command("enumerate")
@click.argument("model_file")
@click.option("--require", "-r", multiple=True)
@click.option("--limit", type=int, default=None, help="Stop after this many configurations.")
@click.option("--json", "as_json", is_flag=True)
def enumerate_cmd(model_file: str, require: tuple[str, ...], limit: int | None, as_json: bool):
    """List configurations in deterministic order."""
    task = _load_task(model_file, require)
    configs = solver.enumerate_configurations(task, limit=limit)

    def human():
        for config in configs:
            click.echo(_config_line(config))
        click.echo(f"{len(configs)} configuration(s)")

    _emit({"configurations": configs}, as_json, human)


@cli.command("rank")
@click.argument("model_file")
@click.option("--require", "-r", multiple=True)
@click.option("--utilities", "utilities_file", required=True, help="CSV: feature,dimension,utility.")
@click.option("--profile", "profile_file", required=True, help="CSV: dimension,weight.")
@click.option("--limit", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
def rank_cmd(model_file, require, utilities_file, profile_file, limit, as_json):
    """Enumerate and rank configurations by user-specific utility."""
    task = _load_task(model_file, require)
    table = recommend.utility_table_from_csv(_read(utilities_file))
    profile = recommend.profile_from_csv(_read(profile_file), Path(profile_file).stem)
    configs = solver.enumerate_configurations(task, limit=limit)
    if not configs:
        raise Infeasible("no configuration satisfies the requirements")
    ranked = recommend.rank_configurations(configs, table, profile)
    payload = {"ranking": [{"configuration": c, "utility": u} for c, u in ranked]}

    def human():
        for config, utility in ranked:
            click.echo(f"{utility:8.4f}  {_config_line(config)}")

    _emit(payload, as_json, human)


@cli.command("recommend-value")
@click.argument("sessions_file")
@click.option("--current", "current_id", required=True, help="Session id of the ongoing session.")
@click.option("--feature", required=True, help="Unspecified feature to recommend a value for.")
@click.option("--k", type=int, default=2, show_default=True, help="Neighbor count.")
@click.option("--model", "model_file", default=None, help="Apply the consistency filter against this model.")
@click.option("--json", "as_json", is_flag=True)
def recommend_value_cmd(sessions_file, current_id, feature, k, model_file, as_json):
    """Recommend including or excluding FEATURE from similar sessions."""
    logs = recommend.session_logs_from_csv(_read(sessions_file), ongoing={current_id})
    current = next((log for log in logs if log.session_id == current_id), None)
    if current is None:
        raise DataError(f"session {current_id!r} not present in {sessions_file}")
    rec = recommend.recommend_value(logs, current, feature, k)
    if model_file is not None:
        task = _load_task(model_file, ())
        filtered = recommend.consistency_filtered(task, dict(current.values), rec)
        if filtered is None:
            raise Infeasible("recommendation suppressed: session preferences admit no completion")
        rec = filtered
    payload = {
        "feature": rec.feature,
        "value": rec.value,
        "voteFraction": rec.vote_fraction,
        "neighbors": list(rec.neighbors),
    }
    _emit(
        payload,
        as_json,
        lambda: click.echo(
            f"{rec.feature} = {rec.value}  ({rec.vote_fraction:.2f} of neighbors: {', '.join(rec.neighbors)})"
        ),
    )


@cli.command("recommend-next")
@click.argument("sessions_file")
@click.option("--current", "current_id", required=True)
@click.option("--edits", "as_edits", is_flag=True, help="Treat rows as constraint-edit logs (ranks only).")
@click.option("--json", "as_json", is_flag=True)
def recommend_next_cmd(sessions_file, current_id, as_edits, as_json):
    """Recommend the next item to specify, from specification-order similarity."""
    text = _read(sessions_file)
    if as_edits:
        logs = recommend.edit_logs_from_csv(text)
        current = next((log for log in logs if log.session_id == current_id), None)
        if current is None:
            raise DataError(f"session {current_id!r} not present in {sessions_file}")
        item = recommend.recommend_next_constraint(logs, current)
    else:
        logs = recommend.session_logs_from_csv(text, ongoing={current_id})
        current = next((log for log in logs if log.session_id == current_id), None)
        if current is None:
            raise DataError(f"session {current_id!r} not present in {sessions_file}")
        item = recommend.recommend_next_feature(logs, current)
    _emit({"feature": item}, as_json, lambda: click.echo(item))


@cli.command("diagnose")
@click.argument("model_file")
@click.option("--require", "-r", multiple=True)
@click.option("--json", "as_json", is_flag=True)
def diagnose_cmd(model_file, require, as_json):
    """Minimal conflicts and diagnoses for the given requirements."""
    task = _load_task(model_file, require)
    report = diagnose.analyze(task.model_constraints, task.requirements)
    payload = {
        "consistent": not report.conflicts,
        "conflicts": [
            [str(r) for r in diagnose.ordered_requirements(c, task.requirements)]
            for c in report.conflicts
        ],
        "diagnoses": [
            [str(r) for r in diagnose.ordered_requirements(d, task.requirements)]
            for d in report.diagnoses
        ],
    }

    def human():
        if not report.conflicts:
            click.echo("consistent")
            return
        for i, conflict in enumerate(payload["conflicts"], 1):
            click.echo(f"conflict {i}: {{{', '.join(conflict)}}}")
        for i, d in enumerate(payload["diagnoses"], 1):
            click.echo(f"diagnosis {i}: {{{', '.join(d)}}}")

    _emit(payload, as_json, human)


@cli.command("repairs")
@click.argument("model_file")
@click.option("--require", "-r", multiple=True)
@click.option("--utilities", "utilities_file", default=None)
@click.option("--profile", "profile_file", default=None)
@click.option("--json", "as_json", is_flag=True)
def repairs_cmd(model_file, require, utilities_file, profile_file, as_json):
    """Change alternatives restoring consistency, optionally utility-ranked."""
    task = _load_task(model_file, require)
    report = diagnose.analyze(task.model_constraints, task.requirements)
    found = diagnose.repairs(task, report.diagnoses)
    if utilities_file and profile_file:
        table = recommend.utility_table_from_csv(_read(utilities_file))
        profile = recommend.profile_from_csv(_read(profile_file), Path(profile_file).stem)
        found = diagnose.rank_repairs(found, table, profile)
    elif utilities_file or profile_file:
        raise DataError("--utilities and --profile must be given together")
    payload = {
        "repairs": [
            {"changes": dict(r.changes), "assignment": dict(r.assignment), "utility": r.utility}
            for r in found
        ]
    }

    def human():
        if not found:
            click.echo("nothing to repair")
        for repair in found:
            changes = " ".join(f"{f}->{v}" for f, v in repair.changes.items())
            suffix = "" if repair.utility is None else f"  (utility {repair.utility:.4f})"
            click.echo(f"{changes}{suffix}")

    _emit(payload, as_json, human)


@cli.command("mf-train")
@click.argument("matrix_file")
@click.option("--k", type=int, default=2, show_default=True)
@click.option("--rate", type=float, default=0.05, show_default=True)
@click.option("--lambda", "reg", type=float, default=0.0, show_default=True, help="L2 weight.")
@click.option("--epochs", type=int, default=2000, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", "out_file", default=None, help="Write learned factors to this .npz file.")
@click.option("--json", "as_json", is_flag=True)
def mf_train_cmd(matrix_file, k, rate, reg, epochs, seed, out_file, as_json):
    """Learn factor matrices from an interaction-matrix CSV."""
    matrix = factorize.matrix_from_csv(_read(matrix_file))
    try:
        config = factorize.TrainConfig(k=k, rate=rate, reg=reg, epochs=epochs, seed=seed)
        pair = factorize.train(matrix, config)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    error = factorize.rmse(matrix, factorize.predict(pair))
    if out_file:
        factorize.save_factors(pair, out_file)
    payload = {"rmse": error, "observed": int(matrix.observed().sum()), "factors": out_file}
    _emit(payload, as_json, lambda: click.echo(f"observed-cell rmse {error:.6f}"))


@cli.command("mf-predict")
@click.argument("factors_file")
@click.option("--user", default=None, help="Predict for one user (default: all).")
@click.option("--json", "as_json", is_flag=True)
def mf_predict_cmd(factors_file, user, as_json):
    """Predict relevance scores from saved factors."""
    try:
        pair = factorize.load_factors(factors_file)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot load factors from {factors_file}: {exc}") from exc
    predicted = factorize.predict(pair)
    users = [user] if user is not None else list(predicted.users)
    scores: dict[str, dict[str, float]] = {}
    for name in users:
        try:
            ranking = factorize.relevance_ranking(predicted, name, predicted.features)
        except KeyError as exc:
            raise DataError(str(exc.args[0])) from exc
        scores[name] = {feature: value for feature, value in ranking}

    def human():
        for name, row in scores.items():
            line = " ".join(f"{feature}={value:.2f}" for feature, value in row.items())
            click.echo(f"{name}: {line}")

    _emit({"scores": scores if user is None else scores[user]}, as_json, human)


@cli.command("import-sessions")
@click.argument("sessions_file")
@click.option("--store", "store_path", required=True, help="Journal file backing the store.")
@click.option("--model-id", required=True, help="Model the sessions belong to.")
def import_sessions_cmd(sessions_file, store_path, model_id):
    """Load completed sessions from CSV into a store journal."""
    store = Store(store_path)
    try:
        count = _import_sessions(store, model_id, _read(sessions_file))
    finally:
        store.close()
    click.echo(f"imported {count} session(s)")


def _import_sessions(store: Store, model_id: str, text: str) -> int:
    logs = recommend.session_logs_from_csv(text)
    for log in logs:
        ranked = sorted(log.ranks.items(), key=lambda item: item[1])
        unranked = [f for f in log.values if f not in log.ranks]
        next_rank = (ranked[-1][1] + 1) if ranked else 1
        events = [(feature, log.values[feature], rank) for feature, rank in ranked]
        for offset, feature in enumerate(unranked):
            events.append((feature, log.values[feature], next_rank + offset))
        store.import_session(model_id, log.session_id, log.user_id, events)
    return len(logs)


@cli.command("demo-data")
@click.argument("dest")
def demo_data_cmd(dest: str):
    """Copy the bundled demo dataset (model, sessions, utilities) to DEST."""
    from . import demo

    for path in demo.extract_all(dest):
        click.echo(str(path))


@cli.command("serve")
@click.option("--store", "store_path", default=None, help="Journal file (default: in-memory).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--preload-model", "model_file", default=None, help="Store this .fm file at startup.")
@click.option("--sessions", "sessions_file", default=None, help="Import this session CSV at startup.")
@click.option("--utilities", "utilities_file", default=None)
@click.option("--profile", "profile_files", multiple=True, help="NAME=FILE interest profiles (repeatable).")
@click.option("--matrix", "matrix_file", default=None, help="Interaction-matrix CSV to preload.")
def serve_cmd(store_path, host, port, model_file, sessions_file, utilities_file, profile_files, matrix_file):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    store = Store(store_path)
    model_id = None
    if model_file is not None:
        model_id = store.store_model(_read(model_file)).model_id
    elif store.model_ids():
        model_id = store.model_ids()[0]
    if sessions_file is not None:
        if model_id is None:
            raise DataError("--sessions needs --preload-model or a store with a model")
        _import_sessions(store, model_id, _read(sessions_file))
    if utilities_file is not None:
        store.set_utilities(recommend.utility_table_from_csv(_read(utilities_file)))
    for spec in profile_files:
        name, sep, path = spec.partition("=")
        if not sep:
            raise DataError(f"bad --profile {spec!r}, expected NAME=FILE")
        store.set_profile(recommend.profile_from_csv(_read(path), name.strip()))
    if matrix_file is not None:
        store.set_matrix_csv(_read(matrix_file))
    uvicorn.run(create_app(store), host=host, port=port, log_level="warning")


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except Infeasible as exc:
        click.echo(f"infeasible: {exc}", err=True)
        return 3
    except (DataError, ParseError, ModelError, ValidationError, ValueError, LookupError) as exc:
        message = exc.args[0] if exc.args else exc
        click.echo(f"error: {message}", err=True)
        return 2
    except solver.EnumerationLimitError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
