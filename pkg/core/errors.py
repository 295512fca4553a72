# core/errors.py
from __future__ import annotations

import logging
from typing import Any, Dict

logger = logging.getLogger(__name__)


class LabError(Exception):
    """
    Base class for every error the lab raises on purpose.

    Each subclass carries:
      - kind: stable machine-readable tag (used in the CLI error JSON)
      - exit_code: process exit status for the CLI
    """

    kind = "lab_error"
    exit_code = 1

    def as_dict(self) -> Dict[str, Any]:
        return {"error": self.kind, "message": str(self), "exit_code": self.exit_code}


class ConfigError(LabError):
    kind = "invalid_config"
    exit_code = 3


class DomainError(LabError, ValueError):
    kind = "domain_error"
    exit_code = 4


class UnsupportedRegimeError(DomainError):
    kind = "unsupported_regime"


class ResourceError(LabError):
    kind = "resource_cap"
    exit_code = 5


class NumericError(LabError, ArithmeticError):
    kind = "numeric_error"
    exit_code = 6


INTERNAL_ERROR = {"error": "internal_error", "exit_code": 1}
