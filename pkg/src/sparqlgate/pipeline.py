"""End-to-end execution of one call.

The stages run in a fixed order: route resolution, typed coercion of the
path parameters, the preprocess chain, template substitution, endpoint
dispatch, results parsing, the postprocess chain, refinement parsing, and
finally refinement application with serialization. Preprocess, postprocess
and refinements are true no-ops when absent: without them the body is
exactly the serialized parse of the endpoint response.

Every failure surfaces as a CallOutcome whose status mirrors the error
(404/405 routing, 400 bad parameter or refinement, 500 endpoint or
transform trouble) and whose body is the uniform JSON error payload.
"""

from __future__ import annotations

import logging
import urllib.parse
from dataclasses import dataclass, field
from typing import Callable, Mapping

import requests

from .client import ResultTable, dispatch, parse_results, substitute
from .config import ApiSpec, OperationSpec, ProcessStep
from .errors import (
    CallError,
    NotFoundError,
    TransformError,
    UnknownFunctionError,
    error_body,
)
from .refine import apply_plan, parse_refinements
from .router import (
    CallRequest,
    CompiledRoute,
    coerce_binding,
    extract_bindings,
    match_path,
    require_method,
)

log = logging.getLogger(__name__)

ParamTransform = Callable[..., object]
TableTransform = Callable[..., ResultTable]


@dataclass(frozen=True)
class CallOutcome:
    """What one call produced: status code, body text, media type."""

    status: int
    body: str
    content_type: str


@dataclass
class ProcessRegistry:
    """Named transforms available to preprocess/postprocess chains.

    Populated once at startup (built-ins plus one optional plugin) and
    treated as immutable afterwards; transforms must be pure or internally
    synchronized, since calls run concurrently.
    """

    param_fns: dict[str, ParamTransform] = field(default_factory=dict)
    table_fns: dict[str, TableTransform] = field(default_factory=dict)

    def register_param(self, name: str, fn: ParamTransform) -> None:
        self.param_fns[name] = fn

    def register_table(self, name: str, fn: TableTransform) -> None:
        self.table_fns[name] = fn

    def validate_chains(self, operation: OperationSpec) -> None:
        """Check every chained function exists; raised at spec-load time."""
        for step in operation.preprocess:
            if step.function not in self.param_fns:
                raise UnknownFunctionError(
                    f"preprocess function {step.function!r} is not registered",
                    field="preprocess",
                )
        for step in operation.postprocess:
            if step.function not in self.table_fns:
                raise UnknownFunctionError(
                    f"postprocess function {step.function!r} is not registered",
                    field="postprocess",
                )


def register_builtins(registry: ProcessRegistry) -> ProcessRegistry:
    """Ship the stock parameter transforms; table transforms are all plugin-provided."""
    registry.register_param("lower", _variadic(str.lower))
    registry.register_param("upper", _variadic(str.upper))
    registry.register_param("encode", _variadic(lambda v: urllib.parse.quote(v, safe="")))
    registry.register_param("decode", _variadic(urllib.parse.unquote))
    return registry


def _variadic(fn: Callable[[str], str]) -> ParamTransform:
    def transform(*values: str) -> tuple[str, ...]:
        return tuple(fn(v) for v in values)

    return transform


# ---------------------------------------------------------------------------
# Chain execution
# ---------------------------------------------------------------------------

def run_preprocess(
    registry: ProcessRegistry,
    chain: tuple[ProcessStep, ...],
    bindings: Mapping[str, str],
) -> dict[str, str]:
    """Apply a parameter chain left to right, rebinding transformed values.

    Each step reads its named parameters' current values and writes back
    exactly as many values (arity preserved). A transform returning a bare
    string counts as one value.
    """
    out = dict(bindings)
    for step in chain:
        fn = registry.param_fns[step.function]
        inputs = tuple(out[name] for name in step.args)
        try:
            result = fn(*inputs)
        except Exception as exc:
            raise TransformError(step.function, str(exc)) from None
        values = (result,) if isinstance(result, str) else tuple(result or ())
        if len(values) != len(inputs):
            raise TransformError(
                step.function,
                f"arity changed: {len(inputs)} in, {len(values)} out",
            )
        for name, value in zip(step.args, values):
            if not isinstance(value, str):
                raise TransformError(step.function, "produced a non-text value")
            out[name] = value
    return out


def run_postprocess(
    registry: ProcessRegistry,
    chain: tuple[ProcessStep, ...],
    table: ResultTable,
) -> ResultTable:
    """Apply a table chain left to right on the evolving table."""
    for step in chain:
        fn = registry.table_fns[step.function]
        try:
            table = fn(table, *step.args)
        except TransformError:
            raise
        except Exception as exc:
            raise TransformError(step.function, str(exc)) from None
        if not isinstance(table, ResultTable):
            raise TransformError(step.function, "did not return a result table")
    return table


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------

def execute(
    api: ApiSpec,
    routes: tuple[CompiledRoute, ...],
    registry: ProcessRegistry,
    request: CallRequest,
    *,
    timeout: float = 30.0,
    session: requests.Session | None = None,
) -> tuple[CallOutcome, OperationSpec | None]:
    """Run the whole pipeline; returns the outcome plus the matched operation.

    Never raises: call-time errors become outcomes with the error's status
    and the uniform JSON error body (content type application/json). The
    matched operation — None when routing failed — feeds call statistics.
    """
    operation: OperationSpec | None = None
    try:
        found = match_path(routes, request.full_path)
        if found is None:
            raise NotFoundError(f"no operation matches {request.full_path!r}")
        route, m = found
        # The operation is pinned before the method check so a 405 is still
        # attributed to it in the call statistics.
        operation = route.operation
        require_method(operation, request.method)

        raw = extract_bindings(operation, m)
        bindings = {
            shape.param_name: coerce_binding(raw[shape.param_name], shape)
            for shape in operation.params
        }
        bindings = run_preprocess(registry, operation.preprocess, bindings)
        query = substitute(operation.sparql, bindings)
        _, _, body = dispatch(
            api.endpoint, query, operation.method, timeout=timeout, session=session
        )
        table = parse_results(body, field_types=operation.field_types)
        table = run_postprocess(registry, operation.postprocess, table)

        plan = parse_refinements(request.query_params)
        content_type, text = apply_plan(table, plan, request.accept_header)
        return CallOutcome(200, text, content_type), operation
    except CallError as exc:
        return CallOutcome(exc.status, error_body(exc), "application/json"), operation
    except Exception as exc:  # never leak a traceback to the caller
        log.exception("pipeline failure for %s", request.full_path)
        wrapped = CallError(f"internal error: {exc}")
        return CallOutcome(500, error_body(wrapped), "application/json"), operation


def exec_call(
    api: ApiSpec,
    routes: tuple[CompiledRoute, ...],
    registry: ProcessRegistry,
    request: CallRequest,
    *,
    timeout: float = 30.0,
    session: requests.Session | None = None,
) -> CallOutcome:
    """Like execute, reporting only the outcome."""
    outcome, _ = execute(
        api, routes, registry, request, timeout=timeout, session=session
    )
    return outcome
