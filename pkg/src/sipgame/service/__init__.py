"""Game service: HTTP API, level catalog, sessions and persistence."""

from .app import GameService, create_app, score_update  # noqa: F401
from .config import ServiceConfig  # noqa: F401
from .levels import Level, LevelError, load_levels  # noqa: F401
from .store import EventStore  # noqa: F401
