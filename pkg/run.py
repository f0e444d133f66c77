import logging
import sys

from hillspec.cli.main import LOG_FORMAT, main

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT
)

if __name__ == "__main__":
    # Same entry point as the `hillspec` console script
    sys.exit(main())
