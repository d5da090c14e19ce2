"""Policy-aware M2M service stack for a campus autonomous-bus fleet."""

from importlib import resources

__version__ = "0.1.0"


def data_path(name: str):
    """Path of a bundled scenario or policy file."""
    return resources.files(__name__).joinpath("data", name)
