"""Entry point for ``python -m tailvol``."""

import sys

from .cli import main

sys.exit(main())
