"""Joint MIMO precoder and multi-RIS phase optimization."""

import logging
from pathlib import Path

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# Worker-count overrides (RIS_OPT_WORKERS) may live in a .env next to the package
env_path = Path(__file__).parent.parent / ".env"
if env_path.exists():
    logger.info(f"Loading environment variables from {env_path}")
    load_dotenv(dotenv_path=env_path, override=False)

from .graph import TrialGraph  # noqa: E402

__all__ = ["TrialGraph"]
