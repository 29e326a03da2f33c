"""Exceptions raised by the package. All of them are ValueError subclasses."""


class InvalidGenomeError(ValueError):
    """A genome has the wrong length or contains something other than bits."""


class InvalidParamsError(ValueError):
    """A controller parameter is outside its allowed range."""


class ConfigError(ValueError):
    """A configuration file, profile or manifest is malformed."""


class ArtifactError(ValueError):
    """A run artifact is missing or cannot be parsed."""
