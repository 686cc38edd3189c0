import builtins
from unittest.mock import patch

import pytest

import symplectomo
from symplectomo.errors import DependencyError


@pytest.fixture
def fresh_check(monkeypatch):
    """Forget any earlier successful DuckDB check"""
    monkeypatch.setattr(symplectomo, "_duckdb_ready", False)


def test_ensure_duckdb_accepts_current_version(fresh_check):
    with patch("duckdb.__version__", "1.1.3"):
        assert symplectomo.ensure_duckdb() is True
    assert symplectomo._duckdb_ready is True


def test_ensure_duckdb_rejects_old_version(fresh_check):
    with patch("duckdb.__version__", "0.9.2"):
        with pytest.raises(DependencyError, match="too old"):
            symplectomo.ensure_duckdb()
    assert symplectomo._duckdb_ready is False


def test_ensure_duckdb_reports_missing_package(fresh_check):
    real_import = builtins.__import__

    def no_duckdb(name, *args, **kwargs):
        if name == "duckdb":
            raise ImportError("No module named 'duckdb'")
        return real_import(name, *args, **kwargs)

    with patch("builtins.__import__", side_effect=no_duckdb):
        with pytest.raises(DependencyError, match="pip install"):
            symplectomo.ensure_duckdb()


def test_ensure_duckdb_is_cached(monkeypatch):
    monkeypatch.setattr(symplectomo, "_duckdb_ready", True)
    with patch("duckdb.__version__", "0.1.0"):
        assert symplectomo.ensure_duckdb() is True
