# Writes trajectory CSVs and crossing / verdict JSON for finished runs

import logging
from pathlib import Path
from typing import Dict

from pydantic import BaseModel

from .dynamics_engine import RunResult, Trajectory

logger = logging.getLogger(__name__)


def write_trajectory(traj: Trajectory, path: Path) -> Path:
    # %.17g round-trips doubles; NaN (unselected measures) becomes an empty field
    traj.frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    return path


def write_model(model: BaseModel, path: Path) -> Path:
    path.write_text(model.model_dump_json(indent=2) + '\n', encoding='utf-8')
    return path


def write_run(result: RunResult, out_dir: Path) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        'trajectory': write_trajectory(result.trajectory, out_dir / 'trajectory.csv'),
        'crossings': write_model(result.crossings, out_dir / 'crossings.json'),
        'verdict': write_model(result.verdict, out_dir / 'verdict.json'),
    }
    logger.info(f'Wrote {len(paths)} files to {out_dir}')
    return paths
