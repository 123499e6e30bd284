"""Main entry point for the wronbeta command line."""

import sys
from typing import Optional, Sequence

from .cli.runner import EXIT_USAGE
from .cli.runner import main as cli_main
from .utils.config import get_config
from .utils.logger import setup_logger


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main entry point."""
    # Setup configuration
    config = get_config()

    try:
        config.validate()
    except ValueError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        sys.exit(EXIT_USAGE)

    logger = setup_logger()
    logger.debug("wronbeta %s", config.app_version)

    try:
        status = cli_main(sys.argv[1:] if argv is None else argv)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        status = 130
    sys.exit(status)


if __name__ == "__main__":
    main()
