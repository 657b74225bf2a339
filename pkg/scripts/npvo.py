"""
NPVO command line

Runs the simulate / verify / bounds / predict subcommands from the repository root:

    python scripts/npvo.py simulate --config scenarios/oscillating_drift.yaml
"""

import sys
import os
sys.path.append(os.path.abspath('.'))

from dotenv import load_dotenv

load_dotenv()

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
