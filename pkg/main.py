#!/usr/bin/env python3
"""
Entry point for the dp-GAN toolkit command line
"""
import sys
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file in project root
PROJECT_ROOT = Path(__file__).parent
load_dotenv(PROJECT_ROOT / '.env')

if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from dpgan.cli import main

if __name__ == '__main__':
    sys.exit(main())
