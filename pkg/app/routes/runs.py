# =====================================================
# RUTAS - Corridas de simulacion
# =====================================================

from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException, status
from loguru import logger
from sqlalchemy.orm import Session

from app.analytics import compute_report
from app.database import get_db
from app.exceptions import WorkbenchError
from app.models import RunRecord
from app.pipelines import record_reports, router_label, with_router
from app.scenario import parse_config
from app.schemas import RunRequest, RunResponse
from app.simulation import run_simulation

router = APIRouter()


# ==================== LANZAR CORRIDA ====================
@router.post("/", response_model=RunResponse, status_code=status.HTTP_201_CREATED)
def create_run(request: RunRequest, db: Session = Depends(get_db)):
    """Correr un escenario (texto Section.key = value) y registrar su reporte"""
    try:
        config = parse_config(request.config)
        if request.router is not None:
            config = with_router(config, request.router)
        seed = config.seed if request.seed is None else request.seed
        logger.info(f"Corrida solicitada por HTTP: {config.name} seed={seed}")
        events = run_simulation(config, seed=seed)
        report = compute_report(events, scenario_id=config.name, seed=seed, router=router_label(config))
    except WorkbenchError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e))
    return record_reports(db, [report])[0]


# ==================== LISTAR CORRIDAS ====================
@router.get("/", response_model=List[RunResponse])
def get_all_runs(skip: int = 0, limit: int = 100, router_name: Optional[str] = None,
                 db: Session = Depends(get_db)):
    """Reportes registrados con paginacion y filtro por router"""
    query = db.query(RunRecord)
    if router_name:
        query = query.filter(RunRecord.router == router_name)
    return query.order_by(RunRecord.id).offset(skip).limit(limit).all()


# ==================== OBTENER CORRIDA POR ID ====================
@router.get("/{run_id}", response_model=RunResponse)
def get_run(run_id: int, db: Session = Depends(get_db)):
    record = db.query(RunRecord).filter(RunRecord.id == run_id).first()
    if not record:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Corrida con ID {run_id} no encontrada"
        )
    return record


# ==================== ELIMINAR CORRIDA ====================
@router.delete("/{run_id}", status_code=status.HTTP_204_NO_CONTENT)
def delete_run(run_id: int, db: Session = Depends(get_db)):
    record = db.query(RunRecord).filter(RunRecord.id == run_id).first()
    if not record:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Corrida con ID {run_id} no encontrada"
        )
    db.delete(record)
    db.commit()
