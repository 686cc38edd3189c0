from . import logger
from .errors import DependencyError

__version__ = "0.1.0"

MIN_DUCKDB_VERSION = "1.1.0"

# Global flag to track the DuckDB check
_duckdb_ready = False


def ensure_duckdb():
    """Check that a recent enough DuckDB is importable.

    Slice directories are read back through DuckDB, so every reader calls this
    first. Raises DependencyError with an install hint otherwise.
    """
    global _duckdb_ready
    if _duckdb_ready:
        return True
    try:
        import duckdb
    except ImportError:
        logger.log("DuckDB not found", 2)
        raise DependencyError(
            f"duckdb>={MIN_DUCKDB_VERSION} is required: pip install 'duckdb>={MIN_DUCKDB_VERSION}'"
        )

    from packaging import version as version_parser

    version = duckdb.__version__
    if version_parser.parse(version) < version_parser.parse(MIN_DUCKDB_VERSION):
        logger.log(f"DuckDB {version} found but needs upgrade to {MIN_DUCKDB_VERSION}+", 2)
        raise DependencyError(
            f"duckdb {version} is too old, upgrade to {MIN_DUCKDB_VERSION} or newer"
        )
    logger.log(f"DuckDB {version} available")
    _duckdb_ready = True
    return True
