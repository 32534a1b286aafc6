# =====================================================
# PIPELINES - run, sweep, train y compare
# =====================================================
# Las corridas independientes pueden ir a un pool de procesos; los
# archivos de cada corrida van a rutas propias y los reportes se
# combinan en el proceso principal.

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from loguru import logger
from sqlalchemy.orm import Session

from app.analytics import (
    compare_reports,
    compute_report,
    summarize,
    write_deliveries,
    write_outputs,
)
from app.config import settings
from app.dataset import Dataset, build_dataset, split_dataset
from app.eventlog import EventLog, read_event_log, write_event_log
from app.exceptions import ConfigError, DatasetError
from app.gbdt import evaluate_model, save_model, train_gbdt
from app.models import RunRecord
from app.scenario import Entries, expand_sweep
from app.schemas import ROUTER_NAMES, GbdtParams, MessageStatsReport, ScenarioConfig, TrainReport
from app.simulation import run_simulation


@dataclass
class RunJob:
    config: ScenarioConfig
    seed: int
    event_log: Optional[Path] = None


def router_label(config: ScenarioConfig) -> str:
    """Nombre de router del escenario ('a+b' si los grupos difieren)"""
    names = []
    for group in config.groups:
        if group.router.name not in names:
            names.append(group.router.name)
    return "+".join(names)


def with_router(config: ScenarioConfig, router: str, model_path: Optional[str] = None) -> ScenarioConfig:
    """Mismo escenario con todos los grupos usando el router dado"""
    if router not in ROUTER_NAMES:
        raise ConfigError(f"Router desconocido: {router}")
    groups = []
    for group in config.groups:
        update = {"name": router}
        if model_path is not None:
            update["model_path"] = model_path
        groups.append(group.model_copy(update={"router": group.router.model_copy(update=update)}))
    return config.model_copy(update={"groups": groups})


def execute(job: RunJob) -> MessageStatsReport:
    """Una corrida: simular, escribir su log y calcular el reporte"""
    events = run_simulation(job.config, seed=job.seed)
    if job.event_log is not None:
        write_event_log(events, job.event_log)
    return compute_report(events, scenario_id=job.config.name, seed=job.seed,
                          router=router_label(job.config))


def execute_all(jobs: Sequence[RunJob], workers: Optional[int] = None) -> List[MessageStatsReport]:
    """Reportes en el orden de los trabajos, en serie o en un pool de procesos"""
    workers = settings.workers if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        reports = []
        for index, job in enumerate(jobs, start=1):
            reports.append(execute(job))
            logger.info(f"Corrida {index}/{len(jobs)} lista ({job.config.name}, seed={job.seed})")
        return reports
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(execute, jobs))


def record_reports(db: Session, reports: Sequence[MessageStatsReport],
                   event_logs: Optional[Sequence[Optional[Union[str, Path]]]] = None) -> List[RunRecord]:
    """Guardar reportes en el registro de corridas"""
    event_logs = list(event_logs) if event_logs is not None else [None] * len(reports)
    records = [
        RunRecord(**report.model_dump(), event_log=str(path) if path else None)
        for report, path in zip(reports, event_logs)
    ]
    try:
        db.add_all(records)
        db.commit()
    except Exception as e:
        db.rollback()
        logger.error(f"Error al registrar corridas: {e}")
        raise
    for record in records:
        db.refresh(record)
    return records


def _record(reports: Sequence[MessageStatsReport], event_logs=None) -> None:
    from app.database import SessionLocal, init_db

    init_db()
    db = SessionLocal()
    try:
        record_reports(db, reports, event_logs)
    finally:
        db.close()


# ==================== COMANDOS ====================


@dataclass
class RunOutcome:
    report: MessageStatsReport
    events: EventLog
    files: List[Path]


def cmd_run(config: ScenarioConfig, seed: Optional[int] = None, out_dir: Union[str, Path, None] = None,
            plots: bool = False, record: bool = False) -> RunOutcome:
    """Una corrida: events.csv, deliveries.csv y reports.csv de una fila"""
    seed = config.seed if seed is None else seed
    out = Path(out_dir or settings.output_dir)
    events = run_simulation(config, seed=seed)
    report = compute_report(events, scenario_id=config.name, seed=seed, router=router_label(config))
    log_path = write_event_log(events, out / "events.csv")
    files = [log_path, write_deliveries(events, out / "deliveries.csv")]
    files.extend(write_outputs([report], None, out, plots=plots))
    if record or settings.record_runs:
        _record([report], [log_path])
    logger.info(
        f"Entrega {report.delivery_prob:.3f}, overhead {report.overhead_ratio}, "
        f"latencia {report.latency_avg}"
    )
    return RunOutcome(report, events, files)


def cmd_sweep(entries: Entries, base_dir: Optional[Path], axes: Dict[str, List[str]], seeds: int = 10,
              out_dir: Union[str, Path, None] = None, plots: bool = False,
              record: bool = False) -> List[MessageStatsReport]:
    """Una corrida por celda x semilla (semillas 0..n-1 compartidas entre celdas)"""
    out = Path(out_dir or settings.output_dir)
    grid = expand_sweep(entries, base_dir, axes, seeds)
    jobs = [
        RunJob(config, seed, out / "runs" / f"cell{index:03d}_seed{seed:02d}.csv")
        for index, (_, config) in enumerate(grid)
        for seed in range(seeds)
    ]
    reports = execute_all(jobs)
    write_outputs(reports, None, out, plots=plots)
    if record or settings.record_runs:
        _record(reports, [job.event_log for job in jobs])
    logger.info(f"Barrido terminado: {len(reports)} corridas\n{summarize(reports)}")
    return reports


def cmd_compare(config: ScenarioConfig, routers: Sequence[str], seeds: int = 10,
                out_dir: Union[str, Path, None] = None, plots: bool = False,
                model_path: Optional[str] = None,
                record: bool = False) -> Tuple[List[MessageStatsReport], List[dict]]:
    """Todos los routers sobre los mismos pares (escenario, semilla) y pruebas pareadas"""
    routers = list(dict.fromkeys(routers))
    if len(routers) < 2:
        raise ConfigError("compare necesita al menos 2 routers distintos")
    if seeds < 2:
        raise ConfigError("compare necesita al menos 2 semillas")
    out = Path(out_dir or settings.output_dir)
    jobs = [
        RunJob(with_router(config, router, model_path), seed, out / "runs" / f"{router}_seed{seed:02d}.csv")
        for router in routers
        for seed in range(seeds)
    ]
    reports = execute_all(jobs)
    comparisons = compare_reports(reports, routers)
    write_outputs(reports, comparisons, out, plots=plots)
    if record or settings.record_runs:
        _record(reports, [job.event_log for job in jobs])

    logger.info(f"Resumen por router:\n{summarize(reports)}")
    for row in comparisons:
        if row["significant"] == "true":
            logger.info(
                f"{row['metric']}: {row['router_a']} vs {row['router_b']} difiere "
                f"({row['method']}, p={row['p_value']:.4g})"
            )
    return reports, comparisons


def load_dataset(log_paths: Sequence[Union[str, Path]]) -> Dataset:
    """Dataset concatenado de varios logs en modo collect"""
    parts = []
    for path in log_paths:
        part = build_dataset(read_event_log(path))
        logger.info(f"{path}: {len(part)} ejemplos ({part.positives} positivos)")
        parts.append(part)
    return Dataset.concat(parts)


def cmd_train(log_paths: Sequence[Union[str, Path]], params: GbdtParams, split_seed: int,
              out_model: Union[str, Path], plots: bool = False) -> TrainReport:
    """Dataset -> 80/20 -> GBDT -> evaluacion -> modelo JSON y reporte"""
    dataset = load_dataset(log_paths)
    if len(dataset) == 0:
        raise DatasetError("Dataset vacio: los logs no tienen relevos")
    train, test = split_dataset(dataset, 0.8, split_seed)
    model, report = train_gbdt(train.X, train.y, params)
    report = report.model_copy(update=evaluate_model(model, test.X, test.y))

    model_path = save_model(model, out_model)
    report_path = model_path.with_suffix(".report.json")
    report_path.write_text(json.dumps(report.model_dump(), indent=2) + "\n", encoding="utf-8")
    if plots:
        from app import plots as charts

        charts.plot_feature_importance(report.gains, model_path.with_suffix(".importance.svg"))
        if report.roc:
            charts.plot_roc(report.roc, report.test_auc, model_path.with_suffix(".roc.svg"))

    for name, gain in sorted(report.gains.items(), key=lambda item: -item[1]):
        logger.info(f"Ganancia {name}: {gain:.4f}")
    logger.info(
        f"Modelo {model_path}: train={report.n_train} test={report.n_test} "
        f"AUC={report.test_auc} accuracy={report.test_accuracy:.3f}"
    )
    return report
