from __future__ import annotations

import logging

LOGGER_NAME = "bc_compose"

logger = logging.getLogger(LOGGER_NAME)
logger.addHandler(logging.NullHandler())
