"""Exception hierarchy shared across the package."""

from __future__ import annotations


class DocweaverError(Exception):
    """Base class for all package errors."""


class ConfigurationError(DocweaverError):
    """A config file, flag, or precondition is invalid."""


class ComponentNotFoundError(DocweaverError):
    """A qualified name does not exist in the catalog."""


class GraphInvariantError(DocweaverError):
    """An internal graph invariant was violated (e.g. cycle after condensation)."""


class GatewayError(DocweaverError):
    """The LLM gateway failed after exhausting retries."""


class ScriptError(GatewayError):
    """A scripted backend had no matching entry and no default."""


class ReplyParseError(DocweaverError):
    """An agent reply did not match its expected structure."""


class BudgetExceededError(DocweaverError):
    """A token budget cannot be satisfied (limit below the focal floor)."""


class StaleSourceError(DocweaverError):
    """A component's recorded span no longer matches the file on disk."""


class ResumeError(DocweaverError):
    """A run directory cannot be resumed (corrupt state or changed repo)."""


class LockHeldError(DocweaverError):
    """Another writer holds the run directory lock."""
