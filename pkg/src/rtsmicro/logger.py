"""A standardized logger for the application."""

import logging
import logging.handlers

import colorlog

# Root logger : used only by other libraries
logging.basicConfig(level=logging.WARNING, format="%(levelname)s - %(message)s")

# Main Logger
_main_logger = logging.getLogger("rtsmicro")
_main_logger.propagate = False

_console_handler: logging.Handler | None = None


# -----------------------------------------------------------
# Configure logging:
#   * Root logger: used by other packages
#   * Main logger: used by this package; every module creates
#     a child logger out of it.
# Log content:
#   * The console gets WARNING and higher (INFO with --verbose),
#     things we want the user to see right away.
#   * The log file gets DEBUG and higher, information for post
#     execution analysis of long evolution runs.
# -----------------------------------------------------------


def init_logger(filename: str = "rtsmicro.log") -> None:
    """Init logger."""
    global _console_handler

    _main_logger.handlers = []
    _main_logger.setLevel(logging.DEBUG)

    # create formatters
    consoleformatter = colorlog.ColoredFormatter(
        "%(log_color)s%(levelname)s%(reset)s - %(message)s",
        log_colors={
            "DEBUG": "cyan",
            "INFO": "green",
            "WARNING": "yellow",
            "ERROR": "red",
            "CRITICAL": "red,bg_white",
        },
    )
    fileformatter = logging.Formatter(
        "%(asctime)s, %(name)s, %(levelname)s, %(message)s",
        datefmt="%Y-%m-%dT%H:%M:%S%z",
    )

    # create console handler used for higher log levels
    ch = colorlog.StreamHandler()
    ch.setLevel(logging.WARNING)
    ch.setFormatter(consoleformatter)
    _main_logger.addHandler(ch)
    _console_handler = ch

    # create file handler which logs more information (lower level
    # errors, as well as time information)
    fh = logging.handlers.RotatingFileHandler(filename=filename, maxBytes=100000, backupCount=5, encoding="utf-8")
    fh.setLevel(logging.DEBUG)
    fh.setFormatter(fileformatter)
    _main_logger.addHandler(fh)


def set_verbosity(verbose: bool) -> None:
    """Show INFO messages on the console when verbose, WARNING and higher otherwise."""
    if _console_handler is not None:
        _console_handler.setLevel(logging.INFO if verbose else logging.WARNING)


def get_logger(name: str) -> logging.Logger:
    """Get a logger for a module, derived from the main logging object."""
    if name.startswith("rtsmicro."):
        start = name.find(".")
        name = name[start + 1 :]
    clogger = _main_logger.getChild(name)

    return clogger


# -----------------------------------------------------------
init_logger()
