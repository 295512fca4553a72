# tests/test_module_loggers.py
from __future__ import annotations

import importlib
import logging
import pkgutil

import pytest

import core

CORE_MODULES = sorted(m.name for m in pkgutil.iter_modules(core.__path__))


@pytest.mark.parametrize("name", CORE_MODULES)
def test_module_declares_named_logger(name):
    module = importlib.import_module(f"core.{name}")
    assert isinstance(module.logger, logging.Logger)
    assert module.logger.name == f"core.{name}"
