"""
Exception hierarchy for asyndgan-desk
Library code raises these; only the CLI catches them
"""

from typing import List, Optional


class AsynDGANError(Exception):
    """Base class for every error raised by the package"""


# -- numerics -----------------------------------------------------------------

class DimensionError(AsynDGANError, ValueError):
    """Shape mismatch, tagged with the layer or tensor that tripped it"""

    def __init__(self, name: str, message: str):
        self.name = name
        super().__init__(f"[{name}] {message}")


class NumericError(AsynDGANError, ArithmeticError):
    """Non-finite value produced or consumed"""

    def __init__(self, name: str, message: str = "non-finite entry"):
        self.name = name
        super().__init__(f"[{name}] {message}")


class EmptyBatchError(AsynDGANError, ValueError):
    pass


class StalenessError(AsynDGANError):
    """A feedback tape does not belong to the generator's current version"""


class IndexOutOfRangeError(AsynDGANError, IndexError):
    pass


# -- protocol -----------------------------------------------------------------

class EncodeError(AsynDGANError, ValueError):
    pass


class DecodeError(AsynDGANError, ValueError):
    pass


class MagicMismatch(DecodeError):
    def __init__(self, expected: bytes, actual: bytes):
        self.expected = expected
        self.actual = actual
        super().__init__(f"bad magic: expected {expected!r}, got {actual!r}")


class VersionMismatch(DecodeError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"unsupported version {actual} (expected {expected})")


class UnknownVariant(DecodeError):
    def __init__(self, code: int, kind: str = "variant"):
        self.code = code
        super().__init__(f"unknown {kind} code {code}")


class Truncated(DecodeError):
    def __init__(self, what: str, expected: int, actual: int):
        self.what = what
        self.expected = expected
        self.actual = actual
        super().__init__(f"truncated {what}: expected {expected} bytes, got {actual}")


class TransportError(AsynDGANError):
    def __init__(self, link: str, message: str):
        self.link = link
        super().__init__(f"link {link}: {message}")


class BarrierTimeout(TransportError):
    def __init__(self, node: int, waited: float, what: str = "message"):
        self.node = node
        self.waited = waited
        super().__init__(f"node-{node}", f"no {what} after {waited:.1f}s")


# -- configuration ------------------------------------------------------------

class ConfigError(AsynDGANError, ValueError):
    """Collects every field-level problem found during validation"""

    def __init__(self, diagnostics: List[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.diagnostics))

    def fields(self) -> List[str]:
        return [d.split(":", 1)[0].strip() for d in self.diagnostics]


# -- metrics ------------------------------------------------------------------

class MetricError(AsynDGANError, ValueError):
    pass


class DegenerateDenominatorError(MetricError):
    def __init__(self, metric: str, denominator: Optional[str] = None):
        self.metric = metric
        detail = f" ({denominator} is empty)" if denominator else ""
        super().__init__(f"{metric} undefined: zero denominator{detail}")


class GridMismatchError(MetricError):
    pass


class SupportError(MetricError):
    pass
