"""FastAPI wrapper around the handler layer. Run with:

    uvicorn geomlaw.service.app:app
"""

from __future__ import annotations

import io
import json

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import __version__
from ..errors import GeomlawError
from . import handlers, schemas as sch

app = FastAPI(title="geomlaw", version=__version__)


@app.exception_handler(GeomlawError)
async def domain_error_handler(_: Request, exc: GeomlawError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"error": exc.to_dict()})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/classify-seq", response_model=sch.SequenceReportModel)
def classify_seq(req: sch.ClassifySeqRequest):
    return handlers.handle_classify_seq(req)


@app.post("/classify", response_model=sch.ClassifyResponse)
def classify(req: sch.ClassifyRequest):
    return handlers.handle_classify(req)


@app.post("/survival", response_model=sch.SurvivalResponse)
def survival(req: sch.SurvivalRequest):
    return handlers.handle_survival(req)


@app.post("/pmf", response_model=sch.PmfResponse)
def pmf(req: sch.PmfRequest):
    return handlers.handle_pmf(req)


@app.post("/sample")
def sample(req: sch.SampleRequest) -> PlainTextResponse:
    """CSV body (header tau1..taud), provenance in the X-Geomlaw-Meta header."""
    batch = handlers.handle_sample(req)
    buf = io.BytesIO()
    header = ",".join(f"tau{k + 1}" for k in range(batch.d))
    np.savetxt(buf, batch.data, fmt="%d", delimiter=",", header=header, comments="")
    return PlainTextResponse(
        content=buf.getvalue().decode(),
        media_type="text/csv",
        headers={"X-Geomlaw-Meta": json.dumps(batch.provenance, sort_keys=True)},
    )


@app.post("/dependence", response_model=sch.DependenceResponse)
def dependence(req: sch.DependenceRequest):
    return handlers.handle_dependence(req)


@app.post("/moments", response_model=sch.MomentsResponse)
def moments(req: sch.MomentsRequest):
    return handlers.handle_moments(req)


@app.post("/extend", response_model=sch.ExtendResponse)
def extend(req: sch.ExtendRequest):
    return handlers.handle_extend(req)


@app.post("/convert", response_model=sch.ConvertResponse)
def convert(req: sch.ConvertRequest):
    return handlers.handle_convert(req)


@app.post("/verify", response_model=sch.VerifyResponse)
def verify(req: sch.VerifyRequest):
    return handlers.handle_verify(req)
