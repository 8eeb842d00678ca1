"""FastAPI wiring for the review service.

Every failure path funnels into one error envelope shape:
{"error": {"code", "message", "details"}}.
"""

from __future__ import annotations

from fastapi import Depends, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..cot import (
    CoTAnnotation,
    Strictness,
    Verdict,
    validate_annotation,
)
from ..rewards import RewardScore, batch_accuracy, score_pair, score_report_payload, serialize_score_report
from .models import (
    CorrectionRequest,
    HardCasePage,
    HardCaseSummary,
    HealthResponse,
    ScoreRequest,
    StatsResponse,
    ValidateRequest,
    ValidateResponse,
)
from .store import ApiError, ApiErrorCode, HardCaseStore, case_detail, case_summary


def create_app(
    store: HardCaseStore,
    token: str | None = None,
    max_score_batch: int = 10_000,
    assets_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="fascot review service", version=__version__)

    if assets_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/assets", StaticFiles(directory=assets_dir), name="assets")

    def require_token(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("Authorization", "")
        if header != f"Bearer {token}":
            raise ApiError(ApiErrorCode.UNAUTHORIZED, "missing or bad bearer token")

    guarded = [Depends(require_token)]

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(_request: Request, exc: RequestValidationError):
        err = ApiError(ApiErrorCode.BAD_REQUEST, "malformed request", details=exc.errors())
        return JSONResponse(status_code=err.status, content=err.body())

    @app.get("/healthz", response_model=HealthResponse)
    def healthz():
        return HealthResponse(version=__version__, revision=store.revision)

    @app.get("/hardcases", response_model=HardCasePage, dependencies=guarded)
    def list_hardcases(
        status: str | None = None,
        subtype: str | None = None,
        cursor: str | None = None,
        limit: int = 50,
    ):
        cases, next_cursor = store.list_cases(status=status, subtype=subtype, cursor=cursor, limit=limit)
        return HardCasePage(
            items=[HardCaseSummary(**case_summary(c)) for c in cases],
            next_cursor=next_cursor,
        )

    @app.get("/hardcases/{sample_id}", dependencies=guarded)
    def get_hardcase(sample_id: str) -> dict:
        case = store.get(sample_id)
        return {"case": case_detail(case), "revision": store.revision}

    @app.put("/hardcases/{sample_id}", dependencies=guarded)
    def put_correction(sample_id: str, body: CorrectionRequest) -> dict:
        if (body.text is None) == (body.sections is None):
            raise ApiError(ApiErrorCode.BAD_REQUEST, "provide exactly one of text or sections")
        if body.text is not None:
            edited: str | CoTAnnotation = body.text
        else:
            try:
                edited = CoTAnnotation.from_dict(body.sections)
            except (ValueError, TypeError) as e:
                raise ApiError(ApiErrorCode.VALIDATION_FAILED, str(e)) from None
        case = store.put_correction(sample_id, edited, body.expected_revision)
        return {"case": case_detail(case), "revision": store.revision}

    @app.post("/score", dependencies=guarded)
    def post_score(body: ScoreRequest) -> Response:
        if not body.items:
            raise ApiError(ApiErrorCode.BAD_REQUEST, "empty score batch")
        if len(body.items) > max_score_batch:
            raise ApiError(
                ApiErrorCode.BAD_REQUEST,
                f"batch of {len(body.items)} exceeds limit {max_score_batch}",
            )
        ids = [item.id for item in body.items]
        scores: list[RewardScore] = []
        pairs = []
        for item in body.items:
            truth = Verdict(item.truth)
            scores.append(score_pair(item.raw_output, truth))
            pairs.append((item.raw_output, truth))
        payload = score_report_payload(ids, scores, batch_accuracy(pairs))
        return Response(content=serialize_score_report(payload), media_type="application/json")

    @app.get("/stats", response_model=StatsResponse, dependencies=guarded)
    def get_stats():
        return StatsResponse(**store.stats())

    @app.post("/validate", response_model=ValidateResponse, dependencies=guarded)
    def post_validate(body: ValidateRequest):
        strictness = Strictness.STRICT if body.strictness == "strict" else Strictness.LENIENT
        report = validate_annotation(body.text, strictness)
        return ValidateResponse(**report.as_dict())

    return app
