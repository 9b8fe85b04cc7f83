"""HTTP front end: FastAPI routes over the service handlers."""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from ..errors import (ConfigError, ConstraintError, NoSignChange, SolverError)
from . import handlers
from . import models as m

__version__ = "0.1.0"


def create_app() -> FastAPI:
    app = FastAPI(title="implosim", version=__version__,
                  description="Self-similar collapsing-cavity and "
                              "converging-shock solver")

    @app.exception_handler(ConfigError)
    async def _config_error(request, exc):
        return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.exception_handler(ConstraintError)
    async def _constraint_error(request, exc):
        return JSONResponse(status_code=409,
                            content={"error": str(exc),
                                     "reason": "unsolvable_by_scaling"})

    @app.exception_handler(NoSignChange)
    async def _no_sign_change(request, exc):
        scan = [{"value": r.free_value, "stop_reason": r.stop_reason,
                 "numerator_sign": r.numerator_sign, "stop_xi": r.stop_xi,
                 "numerator_end": r.numerator_end}
                for r in exc.scan if hasattr(r, "stop_reason")]
        return JSONResponse(status_code=409,
                            content={"error": str(exc),
                                     "reason": "no_sign_change",
                                     "scan": scan})

    @app.exception_handler(SolverError)
    async def _solver_error(request, exc):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/api/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/api/classify", response_model=m.ClassifyResponse)
    def classify(req: m.ClassifyRequest):
        return handlers.run_classify(req)

    @app.post("/api/solve", response_model=m.SolveResponse)
    def solve(req: m.SolveRequest):
        return handlers.run_solve(req)

    @app.post("/api/scan", response_model=m.ScanResponse)
    def scan(req: m.ScanRequest):
        return handlers.run_scan(req)

    @app.post("/api/reconstruct", response_model=m.ReconstructResponse)
    def reconstruct(req: m.ReconstructRequest):
        return handlers.run_reconstruct(req)

    @app.post("/api/verify", response_model=m.VerifyResponse)
    def verify(req: m.VerifyRequest):
        return handlers.run_verify(req)

    return app


app = create_app()
