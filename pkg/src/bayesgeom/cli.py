"""Command-line front end: a thin client over the run machinery.

Configs are single JSON documents with one ``command`` per invocation; the
CLI validates them against the service schemas and either executes
in-process or forwards to a running service with ``--server``.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

import json
import sys

import click
from pydantic import TypeAdapter, ValidationError

from .errors import DomainError
from .service.runner import NUMERIC_ERRORS, RunResult, execute, rows_to_csv
from .service.schemas import RunConfig

_CONFIG_ADAPTER = TypeAdapter(RunConfig)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _apply_seed_override(raw: dict, seed: int | None) -> dict:
    if seed is None:
        return raw
    raw = dict(raw)
    mcmc = dict(raw.get("mcmc") or {})
    mcmc["seed"] = seed
    raw["mcmc"] = mcmc
    return raw


def _render(result: RunResult, fmt: str) -> str:
    if result.table is not None:
        if fmt == "json":
            return json.dumps(
                {"command": result.command, "rows": result.table}, indent=2
            ) + "\n"
        return rows_to_csv(result.table, result.table_columns)
    if fmt == "csv":
        raise DomainError(
            f"command {result.command!r} produces a JSON report, not a table; "
            "use format 'json'"
        )
    return json.dumps(result.report, indent=2) + "\n"


def _write(text: str, path: str | None) -> None:
    if path is None:
        click.echo(text, nl=False)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        _fail(EXIT_VALIDATION, f"cannot write output path {path!r}: {exc}")


def _run_remote(server: str, raw_config: dict, threads: int) -> RunResult:
    import httpx

    response = httpx.post(
        f"{server.rstrip('/')}/run",
        json={"config": raw_config},
        params={"threads": threads},
        timeout=None,
    )
    if response.status_code == 422:
        _fail(EXIT_VALIDATION, f"server rejected config: {response.text}")
    if response.status_code != 200:
        _fail(EXIT_NUMERICAL, f"server error {response.status_code}: {response.text}")
    body = response.json()
    table = body.get("table")
    rows = None
    columns = None
    if table is not None:
        columns = table["columns"]
        lines = [ln for ln in table["csv"].split("\n") if ln]
        rows = []
        for ln in lines[1:]:
            values = ln.split(",")
            rows.append(dict(zip(columns, values)))
    return RunResult(
        command=body["command"], report=body.get("report"), table=rows,
        table_columns=columns,
    )


@click.command(name="bayesgeom")
@click.option(
    "--config",
    "config_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON run configuration.",
)
@click.option("--output", "output_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=None, help="Override mcmc.seed.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option(
    "--server",
    default=None,
    help="Base URL of a running service; compute there instead of in-process.",
)
def main(config_path, output_path, seed, threads, server):
    """Run one configured computation and write its JSON report or CSV
    table."""
    try:
        with open(config_path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        _fail(EXIT_VALIDATION, f"cannot read config {config_path!r}: {exc}")
    raw = _apply_seed_override(raw, seed)
    try:
        config = _CONFIG_ADAPTER.validate_python(raw)
    except ValidationError as exc:
        _fail(EXIT_VALIDATION, f"invalid config: {exc}")

    output = getattr(config, "output", None)
    fmt = output.format if output else ("csv" if _is_table_command(config) else "json")
    path = output_path or (output.path if output else None)

    try:
        if server:
            result = _run_remote(server, raw, threads)
            if result.table is not None:
                # server already serialized the numbers; pass its CSV through
                text = _table_passthrough(result)
                if fmt == "json":
                    text = json.dumps(
                        {"command": result.command, "rows": result.table}, indent=2
                    ) + "\n"
            else:
                text = _render(result, fmt)
        else:
            result = execute(config, threads=threads)
            text = _render(result, fmt)
    except DomainError as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except NUMERIC_ERRORS as exc:
        _fail(EXIT_NUMERICAL, f"numerical failure: {exc}")
    _write(text, path)
    sys.exit(EXIT_OK)


def _is_table_command(config) -> bool:
    return config.command in ("trace", "sweep", "regression")


def _table_passthrough(result: RunResult) -> str:
    lines = [",".join(result.table_columns)]
    for row in result.table:
        lines.append(",".join(str(row.get(c, "")) for c in result.table_columns))
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    main()
