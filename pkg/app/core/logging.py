import logging
import sys
from logging.handlers import RotatingFileHandler

from app.core.config import settings

LOGGER_NAME = "casimir_sim"


def setup_simulation_logger(level: str | None = None) -> logging.Logger:
    """
    Sets up the application logger shared by the engines, the CLI and the API.

    Engine modules log through ``logging.getLogger(__name__)`` under the
    ``app`` namespace; both that namespace and ``casimir_sim`` get the same
    handlers.
    """
    logger = logging.getLogger(LOGGER_NAME)
    app_logger = logging.getLogger("app")
    resolved = (level or settings.LOG_LEVEL).upper()
    for target in (logger, app_logger):
        target.setLevel(resolved)

    # Avoid adding handlers if they already exist
    if not logger.handlers:
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )

        console = logging.StreamHandler(sys.stderr)
        console.setFormatter(formatter)
        handlers: list[logging.Handler] = [console]

        if settings.LOG_FILE:
            # Create a rotating file handler
            file_handler = RotatingFileHandler(
                settings.LOG_FILE,
                maxBytes=settings.LOG_MAX_BYTES,
                backupCount=settings.LOG_BACKUP_COUNT
            )
            file_handler.setFormatter(formatter)
            handlers.append(file_handler)

        for handler in handlers:
            logger.addHandler(handler)
            app_logger.addHandler(handler)

    return logger
