"""Single source for the package version, stamped into report metadata."""

__version__ = "0.1.0"
