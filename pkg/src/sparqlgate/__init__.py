"""sparqlgate: turn any SPARQL endpoint into a documented REST API.

A configuration document declares a mount point, a SPARQL endpoint, and a
set of operations binding URL templates to query templates. The gateway
matches incoming call URLs, runs the query, refines the tabular result via
reserved query parameters (require/filter/sort/format/json), and returns
CSV or JSON — identically through the CLI, the embeddable manager, and the
HTTP server.
"""

from .config import (
    ApiSpec,
    ConfigDocument,
    OperationSpec,
    load_document,
    parse_document,
    serialize_document,
)
from .errors import CallError, ConfigError
from .manager import ApiManager, OperationHandle
from .pipeline import CallOutcome
from .server import GatewayServer, serve

__version__ = "0.1.0"

__all__ = [
    "ApiManager",
    "ApiSpec",
    "CallError",
    "CallOutcome",
    "ConfigDocument",
    "ConfigError",
    "GatewayServer",
    "OperationHandle",
    "OperationSpec",
    "load_document",
    "parse_document",
    "serialize_document",
    "serve",
    "__version__",
]
