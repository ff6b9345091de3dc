"""Exception types shared across the toolkit."""


class BeliefMapError(Exception):
    """Base class for every domain error raised by this package."""


class ConfigError(BeliefMapError):
    """Invalid runtime parameters (bad weights, dimension mismatch, B < 1, ...)."""


class ConfigFileError(BeliefMapError):
    """Malformed or incomplete configuration file. The CLI maps this to a usage error."""


class CorpusIntegrityError(BeliefMapError):
    """Too many malformed lines in an interchange file."""

    def __init__(self, message: str, bad_lines: list[int] | None = None):
        super().__init__(message)
        self.bad_lines = bad_lines or []


class WindowError(BeliefMapError):
    """Gameplay window marker missing or inconsistent for a group."""


class AlignmentError(BeliefMapError):
    """Marker detection could not align all groups."""

    def __init__(self, message: str, diagnostics: list[str] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class PipelineError(BeliefMapError):
    """Term-extraction stage failed (empty corpus, all-empty sequence, ...)."""


class MapgenError(BeliefMapError):
    """Map construction or export failed (missing places, unknown format)."""


class SimError(BeliefMapError):
    """Simulation-level failure (insufficient population for classification)."""


class SynthSpecError(BeliefMapError):
    """Synthetic corpus specification is inconsistent (rates above 1, short markers)."""
