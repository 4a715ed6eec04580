"""Allow `python -m epiforecast` as an alternative to the console script."""

import sys

from epiforecast.cli import main

sys.exit(main())
