"""Allow `python -m vgrade_extractors` as an alias for vgrade-extract."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
