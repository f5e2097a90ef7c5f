"""Exception types shared across the package.

The benchmark CLI maps these onto distinct process exit codes, so the
numerical layers raise them instead of bare ValueError/RuntimeError
whenever the failure has a defined operational meaning.
"""


class ConfigError(ValueError):
    """Invalid configuration or malformed input (CLI exit code 2)."""


class CapError(RuntimeError):
    """A hard resource cap was exceeded: Hilbert-space dimension above the
    dense-matrix limit, or a certified series order beyond the supported
    maximum (CLI exit code 3)."""


class RadiusError(RuntimeError):
    """A requested series evaluation lies outside its certified convergence
    radius and automatic sub-stepping was disabled (CLI exit code 4)."""
