# Loads runtime settings from the environment (a local .env file is honoured)

import os
from pathlib import Path

from dotenv import load_dotenv

from quantum.errors import InvalidArgumentError

load_dotenv()

REPO_ROOT = Path(__file__).resolve().parent.parent
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def log_level() -> str:
    return os.getenv("QCORR_LOG_LEVEL", "INFO").upper()


def output_root() -> Path:
    return Path(os.getenv("QCORR_OUT", "out"))


def config_dir() -> Path:
    return Path(os.getenv("QCORR_CONFIG_DIR", str(REPO_ROOT / "configs")))


# Worker threads for grid evaluation; QCORR_THREADS=0 means one per CPU
def thread_count() -> int:
    raw = os.getenv("QCORR_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"QCORR_THREADS must be an integer, got '{raw}'")
    if value < 0:
        raise InvalidArgumentError(f"QCORR_THREADS must be >= 0, got {value}")
    return value or (os.cpu_count() or 1)
