# Copyright (c) 2025, superposition_networks contributors
# For license information, please see license.txt

import logging
import os

__version__ = "0.0.1"

_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"
_configured = False
_error_log = []


def _configure():
    global _configured
    if _configured:
        return
    root = logging.getLogger("superposition_networks")
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(_LOG_FORMAT))
        root.addHandler(handler)
    root.setLevel(os.environ.get("SUPERPOSITION_LOG_LEVEL", "WARNING").upper())
    root.propagate = False
    _configured = True


def logger(module=None):
    """Return the package logger, or a child logger for ``module``."""
    _configure()
    name = "superposition_networks" if not module else f"superposition_networks.{module}"
    return logging.getLogger(name)


def set_log_level(level):
    _configure()
    logging.getLogger("superposition_networks").setLevel(level)


def log_error(message, title=None):
    """
    Record an error entry with a title.

    The entry is written to the ``error_log`` logger and kept in memory so
    experiment runners can attach it to their reports.
    """
    entry = {"title": title or "Error", "message": str(message)}
    _error_log.append(entry)
    logger("error_log").error(f"{entry['title']}: {entry['message']}")
    return entry


def error_log():
    return list(_error_log)


def clear_error_log():
    _error_log.clear()


def throw(msg, exc=None):
    """Raise ``exc`` (default ValidationError) with ``msg``."""
    from superposition_networks.exceptions import ValidationError

    raise (exc or ValidationError)(msg)
