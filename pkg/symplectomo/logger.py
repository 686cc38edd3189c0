import logging

_LOGGER = logging.getLogger("symplectomo")


def log(message: str, level_in: int = 0):
    if level_in == 0:
        level = logging.INFO
    elif level_in == 1:
        level = logging.WARNING
    elif level_in == 2:
        level = logging.CRITICAL
    else:
        level = logging.INFO
    _LOGGER.log(level, str(message))


def configure(verbose: bool = False):
    """Attach a single stream handler to the package logger."""
    if not any(getattr(h, "_symplectomo", False) for h in _LOGGER.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        handler._symplectomo = True
        _LOGGER.addHandler(handler)
    _LOGGER.setLevel(logging.INFO if verbose else logging.WARNING)
