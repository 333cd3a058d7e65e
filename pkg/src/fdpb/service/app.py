"""FastAPI application exposing the simulator over HTTP.

Desk-scale runs finish in seconds, so /runs executes synchronously and
returns the full report series as JSON. Config problems map to 400,
anything else to 500.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..attacks import fdla_transform, pcfdla_transform, random_poison, zero_poison
from ..data import PartitionSpec, dirichlet_partition
from ..errors import ConfigError, ParseError, ProtocolError
from ..sim import run_experiment
from .schemas import (
    AttackPreviewRequest,
    AttackPreviewResponse,
    HealthResponse,
    PartitionPreviewRequest,
    PartitionPreviewResponse,
    PcaPoint,
    RoundSummary,
    RunRequest,
    RunResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="fdpb service",
        description="Federated-distillation poisoning simulator",
        version=__version__,
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/runs", response_model=RunResponse)
    def run(request: RunRequest) -> RunResponse:
        try:
            result = run_experiment(request.to_config())
        except (ConfigError, ParseError, FileNotFoundError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except ProtocolError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        rounds = [
            RoundSummary(
                round=report.round,
                tol_avg_acc=report.tol_avg_acc,
                vctm_avg_acc=report.vctm_avg_acc,
                per_client_acc=[float(a) for a in report.per_client_acc],
                misdirection_count=count,
            )
            for report, count in zip(result.reports, result.misdirection_counts)
        ]
        pca = [
            PcaPoint(client_id=cid, role=result.roles[cid], x=float(x), y=float(y))
            for cid, (x, y) in enumerate(result.pca_points)
        ]
        final = result.reports[-1]
        return RunResponse(
            rounds=rounds,
            roles=result.roles,
            final_tol_avg_acc=final.tol_avg_acc,
            final_vctm_avg_acc=final.vctm_avg_acc,
            misdirection_pair=result.misdirection_pair,
            pca=pca,
        )

    @app.post("/attacks/preview", response_model=AttackPreviewResponse)
    def attack_preview(request: AttackPreviewRequest) -> AttackPreviewResponse:
        logits = np.asarray(request.logits, dtype=np.float64)
        try:
            if request.kind == "none":
                out = logits
            elif request.kind == "random":
                out = random_poison(logits, np.random.default_rng(request.seed))
            elif request.kind == "zero":
                out = zero_poison(logits)
            elif request.kind == "fdla":
                out = fdla_transform(logits)
            else:
                out = pcfdla_transform(logits, request.peak, request.literal_index)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return AttackPreviewResponse(logits=[float(v) for v in out])

    @app.post("/partitions/preview", response_model=PartitionPreviewResponse)
    def partition_preview(request: PartitionPreviewRequest) -> PartitionPreviewResponse:
        labels = np.asarray(request.labels, dtype=np.int64)
        spec = PartitionSpec(
            n_clients=request.n_clients, alpha=request.alpha, seed=request.seed
        )
        try:
            shards = dirichlet_partition(labels, spec)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        n_classes = int(labels.max()) + 1
        class_counts = [
            np.bincount(labels[s], minlength=n_classes).tolist() for s in shards
        ]
        return PartitionPreviewResponse(
            shards=[s.tolist() for s in shards], class_counts=class_counts
        )

    return app
