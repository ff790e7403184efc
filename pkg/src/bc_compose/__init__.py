"""Composition law for rapidly alternating boundary conditions of a quantum cavity."""

from importlib.metadata import version

from .boundary_algebra import BoundaryUnitary
from .boundary_algebra import ExtensionDecomposition
from .boundary_algebra import compose
from .boundary_algebra import decompose
from .config import settings
from .interval_cavity import Cavity1D
from .interval_cavity import build_cavity

__all__ = [
    "BoundaryUnitary",
    "Cavity1D",
    "ExtensionDecomposition",
    "build_cavity",
    "compose",
    "decompose",
    "settings",
]


class MissingVersionWarning(UserWarning): ...


try:
    try:
        __version__ = version(__name__)
    except Exception:
        __version__ = version("bc-compose")

except Exception as err:
    import sys
    import warnings

    if not sys.warnoptions:
        warnings.simplefilter("default")

    warnings.warn(
        f"Unable to determine package version!\nMessage: {err}",
        category=MissingVersionWarning,
        stacklevel=2,
    )

    __version__ = "0.0.0"
