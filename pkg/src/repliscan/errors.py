"""Exception types shared across the toolkit."""


class RepliscanError(Exception):
    """Base class for all toolkit errors."""


class ContractError(RepliscanError):
    """An operation was called with arguments that violate its contract."""


class ConfigError(RepliscanError):
    """Invalid or inconsistent configuration."""


class FormatError(RepliscanError):
    """A file does not follow one of the documented on-disk formats."""


class IngestionError(RepliscanError):
    """A clip or corpus could not be ingested."""


class IngestionReport(IngestionError):
    """Raised when one or more manifest entries fail to load.

    Carries every failing entry so a whole-corpus ingestion can report all
    problems at once instead of stopping at the first bad file.
    """

    def __init__(self, failures):
        self.failures = list(failures)  # (clip_id, path, reason) triples
        lines = "; ".join(f"{cid} [{path}]: {reason}" for cid, path, reason in self.failures)
        super().__init__(f"{len(self.failures)} manifest entries failed to ingest: {lines}")
