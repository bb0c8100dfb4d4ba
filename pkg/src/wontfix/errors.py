"""Exception hierarchy shared by every module.

Each error carries an ``exit_code`` so the CLI can map failures onto its
documented codes without a lookup table.
"""


class WontfixError(Exception):
    exit_code = 2


# corpus
class ParseError(WontfixError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateId(WontfixError):
    pass


class MissingField(WontfixError):
    def __init__(self, field: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}missing field {field!r}")
        self.field = field
        self.line = line


class OpenIssue(WontfixError):
    pass


class DegenerateClass(WontfixError):
    pass


# features
class EmptyCorpus(WontfixError):
    pass


class DomainError(WontfixError, ValueError):
    pass


# classifiers
class SingleClass(WontfixError):
    pass


class FormatError(WontfixError):
    pass


class VersionError(WontfixError):
    pass


# evaluation
class EmptyEvaluation(WontfixError):
    pass


class TooFewInstances(WontfixError):
    pass


# analytics
class MissingCloseTime(WontfixError):
    pass


class DegenerateVariance(WontfixError):
    pass


class SampleSizeError(WontfixError, ValueError):
    pass


class MissingAnnotations(WontfixError):
    pass


# miner
class MinerError(WontfixError):
    pass


class AuthError(MinerError):
    pass


class RateLimited(MinerError):
    pass


class NotFound(MinerError):
    pass


class TransportError(MinerError):
    def __init__(self, message: str, retries: int):
        super().__init__(f"{message} (after {retries} retries)")
        self.retries = retries


class NonConvergenceWarning(UserWarning):
    """Raised as a warning: SMO hit its pass budget before KKT was satisfied."""
