"""Exception hierarchy shared by every scpt module."""

from __future__ import annotations


class ScptError(Exception):
    """Base class for all errors raised by scpt."""


# --- molgraph -------------------------------------------------------------

class SmilesError(ScptError, ValueError):
    """Any failure to turn a SMILES string into a Molecule."""


class SmilesSyntaxError(SmilesError):
    """Unbalanced brackets/parentheses, dangling ring closures, stray characters."""


class ValenceError(SmilesError):
    """Implied valence of an organic-subset atom exceeds its supported maximum."""


class UnsupportedFeature(SmilesError):
    """Valid SMILES that uses something outside the supported subset."""


# --- fingerprint ----------------------------------------------------------

class WidthMismatch(ScptError, ValueError):
    pass


# --- decompose ------------------------------------------------------------

class SizeLimitExceeded(ScptError, ValueError):
    pass


# --- properties / metrics -------------------------------------------------

class MissingProperty(ScptError, KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"property {self.name!r} missing from profile"


class OracleMiss(ScptError, KeyError):
    def __init__(self, key: str):
        super().__init__(key)
        self.key = key

    def __str__(self) -> str:
        return f"no oracle row for {self.key!r}"


class OracleLoadError(ScptError, ValueError):
    pass


class EmptyBatch(ScptError, ValueError):
    pass


class DegenerateBaseline(ScptError, ZeroDivisionError):
    def __init__(self, name: str, value: float):
        super().__init__(name, value)
        self.name = name
        self.value = value

    def __str__(self) -> str:
        return f"source value of {self.name!r} is {self.value!r}; relative change undefined"


# --- pipeline -------------------------------------------------------------

class CorpusTooLarge(ScptError, ValueError):
    pass


class InsufficientPairs(ScptError):
    def __init__(self, label: str, available: int, wanted: int):
        super().__init__(label, available, wanted)
        self.label = label
        self.available = available
        self.wanted = wanted

    def __str__(self) -> str:
        return f"bin {self.label}: {self.available} pairs available, {self.wanted} requested"


# --- align_ref ------------------------------------------------------------

class DivergenceDetected(ScptError, FloatingPointError):
    pass


# --- cli ------------------------------------------------------------------

class ConfigError(ScptError, ValueError):
    pass
