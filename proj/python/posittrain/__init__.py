"""Emulated posit / binary16 arithmetic and the verification suites."""

import json

from ._core import Half, Posit, ResultFileError, __version__, render_table, suite_names
from ._core import run_suite as _run_suite


def run_suite(name):
    """Run a verification suite and return its report as a dict."""
    return json.loads(_run_suite(name))


__all__ = ["Half", "Posit", "ResultFileError", "__version__", "render_table", "run_suite", "suite_names"]
