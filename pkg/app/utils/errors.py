#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Error Types Module
"""

EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3
EXIT_ERROR = 4


class FairAuditError(Exception):
    """Base error for all auditing failures"""

    exit_code = EXIT_ERROR
    hint = None

    def __init__(self, message, hint=None):
        super().__init__(message)
        if hint is not None:
            self.hint = hint


class SchemaError(FairAuditError):
    """Column mapping does not match the input"""

    hint = "check --label-col, --protected-col and --score against the header row"


class RowError(FairAuditError):
    """A single input row could not be parsed or is out of range"""

    hint = "fix or remove the offending row; missing values are never imputed"

    def __init__(self, row, column, message):
        # Data row 0 sits on line 2, after the header
        super().__init__(f"row {row} (line {row + 2}), column '{column}': {message}")
        self.row = row
        self.column = column


class ValidationError(FairAuditError):
    """Input violates a dataset or model invariant"""


class ParameterError(FairAuditError, ValueError):
    """Numeric parameter outside its allowed range"""


class UsageError(FairAuditError):
    """Command-line flags are missing or inconsistent"""

    exit_code = EXIT_USAGE
    hint = "run with --help to list the accepted flags"
