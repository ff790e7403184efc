"""Load the bc_compose settings into Pydantic models for correct type annotations."""

from .load import BcComposeConfig
from .load import load_pydantic_settings

__all__ = [
    "BcComposeConfig",
    "load_pydantic_settings",
]
