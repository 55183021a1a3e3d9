"""
Writers for run artifacts. The manifest is always written last.
"""
from typing import *
import os
import sys
import json
import platform
from datetime import datetime, timezone
import numpy as np
import pandas as pd

from ..utils import to_jsonable

REGRET_COLUMNS = ['algorithm', 'seed', 'episode', 'instant_regret', 'cum_regret']
FLOAT_FORMAT = '%.12g'


def regret_frame(traces) -> pd.DataFrame:
    """
    Long-format regret table, one row per (algorithm, seed, episode) with
    1-based episodes.
    """
    frames = []
    for trace in traces:
        frames.append(pd.DataFrame({
            'algorithm': trace.algorithm,
            'seed': int(trace.seed),
            'episode': np.arange(1, trace.N + 1),
            'instant_regret': trace.instant,
            'cum_regret': trace.cumulative,
        }))
    if not frames:
        return pd.DataFrame(columns=REGRET_COLUMNS)
    return pd.concat(frames, ignore_index=True)[REGRET_COLUMNS]


def write_regret_csv(traces, path: str) -> str:
    regret_frame(traces).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
    return path


def read_regret_csv(path: str) -> pd.DataFrame:
    return pd.read_csv(path)


def write_json(data: Any, path: str) -> str:
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(to_jsonable(data), f, indent=2, sort_keys=True)
        f.write('\n')
    return path


def versions() -> Dict[str, str]:
    import scipy
    import matplotlib
    from .. import __version__
    return {
        'matrixrl': __version__,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'pandas': pd.__version__,
        'matplotlib': matplotlib.__version__,
    }


def write_manifest(
    out_dir: str,
    command: str,
    config: Dict[str, Any],
    artifacts: List[str],
    started: datetime,
    seed_status: Optional[List[Dict[str, Any]]] = None,
) -> str:
    """
    Write ``manifest.json`` listing every emitted file (itself included).
    """
    finished = datetime.now(timezone.utc)
    path = os.path.join(out_dir, 'manifest.json')
    manifest = {
        'command': command,
        'argv': sys.argv[1:],
        'config': config,
        'artifacts': sorted(os.path.basename(p) for p in artifacts + [path]),
        'versions': versions(),
        'started': started.isoformat(),
        'finished': finished.isoformat(),
        'wall_clock_seconds': (finished - started).total_seconds(),
        'seeds': seed_status or [],
    }
    return write_json(manifest, path)
