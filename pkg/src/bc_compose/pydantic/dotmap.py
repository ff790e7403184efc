from __future__ import annotations

from typing import Any
from typing import overload

from pydantic import BaseModel

UNRECOGNIZED = "Unrecognized key datatype"


class DotMapBaseModel(BaseModel):
    """Pydantic model that also answers dict-style lookups.

    ``m.cluster``, ``m["cluster"]`` and ``m.get("cluster")`` all return the same
    field value, and assigning through ``m["cluster"] = x`` goes through the
    normal attribute path so ``validate_assignment`` still applies.
    """

    def __getitem__(self, key: str) -> Any:
        """Return a field via dict-style indexing.

        Args:
          key: Field name.

        Returns:
          Any: The field value.

        Raises:
          KeyError: If ``key`` is not a field of the model.
          TypeError: If ``key`` is not a string.
        """
        if not isinstance(key, str):
            raise TypeError(UNRECOGNIZED)
        if key not in type(self).model_fields:
            raise KeyError(key)
        return getattr(self, key)

    def __setitem__(self, key: str, value: Any) -> None:
        """Assign a field via dict-style indexing.

        Raises:
          KeyError: If ``key`` is not a field of the model.
          TypeError: If ``key`` is not a string.
        """
        if not isinstance(key, str):
            raise TypeError(UNRECOGNIZED)
        if key not in type(self).model_fields:
            raise KeyError(key)
        setattr(self, key, value)

    def __contains__(self, key: object) -> bool:
        """Return True if ``key`` names a field of the model."""
        return isinstance(key, str) and key in type(self).model_fields

    def keys(self) -> list[str]:
        """Return the field names in declaration order."""
        return list(type(self).model_fields)

    @overload
    def get(self, key: str) -> Any | None: ...

    @overload
    def get(self, key: str, default: Any) -> Any: ...

    def get(self, key: str, default: Any | None = None) -> Any:
        """Return the field ``key`` if present; otherwise ``default``."""
        if key in self:
            return getattr(self, key)
        return default
