#!/usr/bin/env python3
"""Shared fixtures: isolated reference directories and oracle tables."""

from pathlib import Path

import pytest

from tailvol import benchmarks
from tailvol.benchmarks import generate_reference_table, table_path
from tailvol.utils.exceptions import MissingReferenceTable

# Small enough to regenerate with the oracle inside a test session.
SESSION_DATASETS = ("Corners", "HighVol", "CLY20", "Stress")


@pytest.fixture
def reference_dir(tmp_path, monkeypatch) -> Path:
    """Point the benchmark module at an empty reference directory."""
    monkeypatch.setattr(benchmarks, "REFERENCE_DIR", tmp_path)
    return tmp_path


@pytest.fixture(scope="session")
def session_tables(tmp_path_factory) -> Path:
    """Oracle tables for the small datasets, generated once per session."""
    directory = tmp_path_factory.mktemp("reference")
    for name in SESSION_DATASETS:
        generate_reference_table(name, workers=1, reference_dir=directory)
    return directory


@pytest.fixture
def session_dataset(session_tables):
    def load(name: str):
        return benchmarks.build_dataset(name, reference_dir=session_tables)

    return load


@pytest.fixture(scope="session")
def generated_tables(tmp_path_factory) -> Path:
    return tmp_path_factory.mktemp("generated")


@pytest.fixture
def full_dataset(generated_tables):
    """Load a full dataset, generating its oracle table once if none is persisted."""

    def load(name: str):
        try:
            return benchmarks.build_dataset(name)
        except MissingReferenceTable:
            pass
        if not table_path(name, generated_tables).is_file():
            generate_reference_table(name, reference_dir=generated_tables)
        return benchmarks.build_dataset(name, reference_dir=generated_tables)

    return load
