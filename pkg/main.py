import logging
import sys
from pathlib import Path
from typing import List, Optional

from commands import CommandManager
from services.error_handler import EXIT_OK, ErrorHandler
from services.logging_service import LoggingService

logger = logging.getLogger(__name__)


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one sub-command and return its exit code"""
    parser = CommandManager().setup()
    error_handler = ErrorHandler()
    logging_service = None
    out_dir = None

    try:
        args = parser.parse_args(argv)
        out_dir = Path(args.out)
        logging_service = LoggingService(args.log_level)
        logging_service.attach_run_dir(out_dir)
        logger.info(f"[Main] {args.command} started")
        code = args.handler(args)
        logger.info(f"[Main] {args.command} finished")
        return code
    except SystemExit as e:
        # --help and --version
        return EXIT_OK if e.code in (None, 0) else int(e.code)
    except Exception as e:
        return error_handler.handle(e, out_dir)
    finally:
        if logging_service is not None:
            logging_service.shutdown()


if __name__ == "__main__":
    sys.exit(cli_main())
