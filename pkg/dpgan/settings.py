#!/usr/bin/env python3
"""
Environment-driven defaults for the dp-GAN toolkit
"""

import os
import logging
from pathlib import Path
from dotenv import load_dotenv

# Create logger for this module
logger = logging.getLogger(__name__)

# Load environment variables from .env file in project root
PROJECT_ROOT = Path(__file__).parent.parent
load_dotenv(PROJECT_ROOT / '.env')

LOG_LEVEL = os.environ.get('DPGAN_LOG_LEVEL', 'INFO').upper()
OUTPUT_DIR = Path(os.environ.get('DPGAN_OUTPUT_DIR', 'runs'))
LAMBDA_MAX = int(os.environ.get('DPGAN_LAMBDA_MAX', 64))
DEFAULT_DELTA = float(os.environ.get('DPGAN_DELTA', 1e-5))
WORKERS = max(1, int(os.environ.get('DPGAN_WORKERS', 1)))

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level=None):
    """Configure root logging once for an entry point"""
    logging.basicConfig(level=level or LOG_LEVEL, format=LOG_FORMAT)
    logger.debug(
        f"Settings: output_dir={OUTPUT_DIR}, lambda_max={LAMBDA_MAX}, "
        f"delta={DEFAULT_DELTA}, workers={WORKERS}"
    )
