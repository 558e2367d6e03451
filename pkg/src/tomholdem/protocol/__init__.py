"""Turn-based agent channel: redacted views and a JSON wire protocol."""

from .session import DEFAULT_AGENTS, DEFAULT_PORT, DuplicateAgentName, GameSession, SessionConfig, hand_seed
from .views import ActionRequest, ErrorCode, ProtocolError, StateView, make_view
from .wire import PortUnavailable, ProtocolClient, ServiceHandle, handle_request, serve
