"""HTTP verification service.

Stateless wrapper around the command dispatcher: a request carries the
workspace declarations inline together with a command and its arguments,
the response carries the report.  The CLI uses the same models and the same
dispatcher, either in process or against a running instance of this app.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import commands
from .workspace import WorkspaceError, load_dict


class RunRequest(BaseModel):
    command: str = Field(..., examples=["hh"])
    args: dict = Field(default_factory=dict, examples=[{"cat": "lambda", "max_degree": 2}])
    workspace: dict = Field(default_factory=dict, description="workspace sections, inline")


class RunResponse(BaseModel):
    exit_code: int
    header: dict
    records: list[dict]
    text: list[str]


app = FastAPI(
    title="hochcat",
    description="Exact verification of map-graded category constructions",
)


@app.get("/health")
def health():
    return {"status": "ok"}


@app.get("/commands")
def list_commands():
    return {"commands": sorted(commands.COMMANDS)}


@app.post("/run", response_model=RunResponse)
def run_command(req: RunRequest) -> RunResponse:
    try:
        ws = load_dict(req.workspace)
    except WorkspaceError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    report = commands.run(req.command, req.args, ws)
    return RunResponse(
        exit_code=report.exit_code,
        header=report.header,
        records=report.records,
        text=report.text,
    )


def serve(host: str = "127.0.0.1", port: int = 8000):  # pragma: no cover
    import uvicorn

    uvicorn.run(app, host=host, port=port)
