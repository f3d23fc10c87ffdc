"""HTTP service wrapping the library: POST a run configuration, get the
report or table back."""

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import DomainError
from .runner import NUMERIC_ERRORS, RunResult, execute, rows_to_csv
from .schemas import RunRequest, RunResponse, TableArtifact

__all__ = ["create_app", "app"]


def _to_response(result: RunResult) -> RunResponse:
    table = None
    if result.table is not None:
        table = TableArtifact(
            name=result.command,
            columns=result.table_columns,
            csv=rows_to_csv(result.table, result.table_columns),
        )
    return RunResponse(command=result.command, report=result.report, table=table)


def create_app() -> FastAPI:
    app = FastAPI(
        title="bayesgeom",
        version=__version__,
        description=(
            "Norms, angles and compatibility between priors, likelihoods "
            "and posteriors."
        ),
    )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/commands")
    def commands() -> dict:
        return {
            "commands": [
                "beta-binomial",
                "nig",
                "expfam",
                "estimate",
                "trace",
                "sweep",
                "regression",
            ]
        }

    @app.post("/run", response_model=RunResponse)
    def run(request: RunRequest, threads: int = 1) -> RunResponse:
        try:
            result = execute(request.config, threads=threads)
        except DomainError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except NUMERIC_ERRORS as exc:
            raise HTTPException(
                status_code=400,
                detail={"numerical_failure": type(exc).__name__, "message": str(exc)},
            ) from exc
        return _to_response(result)

    return app


app = create_app()
