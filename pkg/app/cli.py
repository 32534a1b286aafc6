# =====================================================
# CLI - Linea de comandos del workbench
# =====================================================

import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from loguru import logger

from app.config import configure_logging, settings
from app.exceptions import ConfigError, WorkbenchError
from app.mobility import grid_map, serialize_wkt_map
from app.scenario import load_config, load_entries
from app.schemas import GbdtParams


def _csv_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def parse_axes(specs: Sequence[str]) -> Dict[str, List[str]]:
    """['ttl=300,3600'] -> {'ttl': ['300', '3600']}"""
    axes: Dict[str, List[str]] = {}
    for spec in specs or []:
        name, sep, values = spec.partition("=")
        if not sep or not name.strip():
            raise ConfigError(f"Eje invalido {spec!r}: se esperaba nombre=v1,v2,...")
        axes[name.strip()] = _csv_list(values)
    return axes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dtn-workbench", description="Workbench de ruteo DTN")
    parser.add_argument("--log-level", default=None, help="nivel de log (por defecto LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="una corrida de simulacion")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", type=Path, default=None)
    run.add_argument("--plots", action="store_true")
    run.add_argument("--record", action="store_true", help="guardar el reporte en el registro")

    sweep = commands.add_parser("sweep", help="barrido de parametros x semillas")
    sweep.add_argument("--config", required=True, type=Path)
    sweep.add_argument("--axis", action="append", default=[], help="nombre=v1,v2,... (repetible)")
    sweep.add_argument("--seeds", type=int, default=10)
    sweep.add_argument("--out", type=Path, default=None)
    sweep.add_argument("--plots", action="store_true")
    sweep.add_argument("--record", action="store_true")

    train = commands.add_parser("train", help="entrenar el modelo GBDT desde logs collect")
    train.add_argument("--logs", required=True, type=_csv_list)
    train.add_argument("--rounds", type=int, default=100)
    train.add_argument("--depth", type=int, default=3)
    train.add_argument("--eta", type=float, default=0.1)
    train.add_argument("--lambda", dest="l2_lambda", type=float, default=1.0)
    train.add_argument("--gamma", type=float, default=0.0)
    train.add_argument("--min-leaf", type=int, default=5)
    train.add_argument("--split-seed", type=int, default=0)
    train.add_argument("--out", required=True, type=Path)
    train.add_argument("--plots", action="store_true")

    compare = commands.add_parser("compare", help="routers sobre semillas pareadas")
    compare.add_argument("--config", required=True, type=Path)
    compare.add_argument("--routers", required=True, type=_csv_list)
    compare.add_argument("--seeds", type=int, default=10)
    compare.add_argument("--model", default=None, help="modelo para los grupos mlmaxprop")
    compare.add_argument("--out", type=Path, default=None)
    compare.add_argument("--plots", action="store_true")
    compare.add_argument("--record", action="store_true")

    gridmap = commands.add_parser("gridmap", help="escribir un mapa WKT en grilla")
    gridmap.add_argument("--columns", type=int, default=11)
    gridmap.add_argument("--rows", type=int, default=11)
    gridmap.add_argument("--spacing", type=float, default=100.0)
    gridmap.add_argument("--out", required=True, type=Path)

    commands.add_parser("serve", help="levantar la API HTTP")
    return parser


def dispatch(args: argparse.Namespace) -> None:
    from app import pipelines

    if args.command == "run":
        pipelines.cmd_run(load_config(args.config), seed=args.seed, out_dir=args.out,
                          plots=args.plots, record=args.record)
    elif args.command == "sweep":
        entries, base_dir = load_entries(args.config)
        pipelines.cmd_sweep(entries, base_dir, parse_axes(args.axis), seeds=args.seeds,
                            out_dir=args.out, plots=args.plots, record=args.record)
    elif args.command == "train":
        params = GbdtParams(
            rounds=args.rounds, max_depth=args.depth, learning_rate=args.eta,
            l2_lambda=args.l2_lambda, min_split_gain=args.gamma, min_leaf_examples=args.min_leaf,
        )
        pipelines.cmd_train(args.logs, params, args.split_seed, args.out, plots=args.plots)
    elif args.command == "compare":
        pipelines.cmd_compare(load_config(args.config), args.routers, seeds=args.seeds,
                              out_dir=args.out, plots=args.plots, model_path=args.model,
                              record=args.record)
    elif args.command == "gridmap":
        graph = grid_map(args.columns, args.rows, args.spacing)
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(serialize_wkt_map(graph), encoding="utf-8")
        logger.info(f"Mapa {args.out}: {len(graph)} waypoints, {len(graph.edges)} aristas")
    elif args.command == "serve":
        import uvicorn

        uvicorn.run("main:app", host=settings.app_host, port=settings.app_port,
                    reload=settings.app_env == "development")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        dispatch(args)
    except WorkbenchError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 2
    except ValueError as e:
        # Validacion de parametros (GbdtParams, etc.)
        logger.error(f"Parametros invalidos: {e}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
