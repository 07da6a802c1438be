"""Parser for hash-format configuration documents.

A configuration document is a sequence of blocks. Every block starts with a
``#url`` line; within a block, each line whose column-0 ``#`` is followed by
a recognized field name starts a new field, and every other line continues
the current field's value (so SPARQL templates — including their own
``# comment`` lines — survive verbatim). Exactly one block must have
``#type api``; every ``#type operation`` block declares one REST operation.

Error classes raised here, by failure kind:

* DocumentStructureError — content before the first ``#url``, missing or
  unknown ``#type``, missing api block, more than one api block;
* DuplicateFieldError — a field name repeated within one block;
* ParamShapeError — malformed parameter shape or ``#field_type`` entry;
* ProcessChainError — malformed ``#preprocess`` / ``#postprocess`` text;
* SpecValidationError — structurally sound but semantically invalid specs
  (bad method tokens, relative endpoint URL, undeclared query placeholders,
  chain arguments naming unknown parameters or variables, ...).
"""

from __future__ import annotations

import logging
import re
import urllib.parse
from dataclasses import dataclass, field

from .errors import (
    ConfigError,
    DocumentStructureError,
    DuplicateFieldError,
    ParamShapeError,
    ProcessChainError,
    SpecValidationError,
)
from .values import VALUE_TYPES

log = logging.getLogger(__name__)

# Field names recognized when splitting a block into fields. Any column-0
# hash line whose token is not in this set (nor a parameter declared by the
# block's own #url template) is treated as field-value content.
API_FIELDS = frozenset(
    {
        "url",
        "type",
        "base",
        "method",
        "title",
        "description",
        "version",
        "license",
        "contacts",
        "endpoint",
        "addon",
    }
)
OPERATION_FIELDS = frozenset(
    {
        "url",
        "type",
        "method",
        "description",
        "preprocess",
        "postprocess",
        "field_type",
        "call",
        "output_json",
        "sparql",
    }
)
KNOWN_FIELDS = API_FIELDS | OPERATION_FIELDS

DEFAULT_PATTERN = ".+"
HTTP_METHODS = frozenset({"get", "post"})

_FIELD_LINE_RE = re.compile(r"^#([A-Za-z_]\w*)(?:[ \t]+(.*))?$")
PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_]\w*)\}")
_SLOT_RE = re.compile(r"\[\[([A-Za-z_]\w*)\]\]")
_ALT_SLOT_RE = re.compile(r"\[\{([A-Za-z_]\w*)\}\]")
_SHAPE_RE = re.compile(r"^([A-Za-z_]\w*)(?:\((.*)\))?$", re.DOTALL)
_CHAIN_TERM_RE = re.compile(r"^([A-Za-z_]\w*)\((.*)\)$", re.DOTALL)
_NAME_RE = re.compile(r"^[A-Za-z_]\w*$")


# ---------------------------------------------------------------------------
# Data model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldEntry:
    """One ``#name value`` field, value joined across continuation lines."""

    name: str
    value: str


@dataclass(frozen=True)
class ParamShape:
    """Declared type and textual form of one path parameter."""

    param_name: str
    value_type: str = "str"
    pattern: str = DEFAULT_PATTERN


@dataclass(frozen=True)
class ProcessStep:
    """One ``name(arg, ...)`` term of a transform chain."""

    function: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class ApiSpec:
    """Parsed api block: mount point, endpoint, and page metadata."""

    url: str
    endpoint: str
    methods: tuple[str, ...]
    base: str = ""
    title: str = ""
    description: str = ""
    version: str = ""
    license: str = ""
    contacts: str = ""
    addon: str = ""
    fields: tuple[FieldEntry, ...] = ()
    extras: tuple[FieldEntry, ...] = ()


@dataclass(frozen=True)
class OperationSpec:
    """Parsed operation block: URL template bound to a SPARQL template."""

    url_template: str
    method: str
    sparql: str
    params: tuple[ParamShape, ...] = ()
    preprocess: tuple[ProcessStep, ...] = ()
    postprocess: tuple[ProcessStep, ...] = ()
    description: str = ""
    field_types: dict[str, str] = field(default_factory=dict)
    call_example: str = ""
    output_json_example: str = ""
    fields: tuple[FieldEntry, ...] = ()
    extras: tuple[FieldEntry, ...] = ()

    def shape_of(self, param_name: str) -> ParamShape:
        for shape in self.params:
            if shape.param_name == param_name:
                return shape
        raise KeyError(param_name)


@dataclass(frozen=True)
class ConfigDocument:
    """One parsed configuration document: the api block plus its operations."""

    api: ApiSpec
    operations: tuple[OperationSpec, ...]


# ---------------------------------------------------------------------------
# Block splitting
# ---------------------------------------------------------------------------

def split_blocks(text: str) -> list[list[FieldEntry]]:
    """Split document text into blocks of fields.

    A block begins at each column-0 ``#url`` line. Inside a block a line
    starts a new field only when its ``#`` token is a recognized field name
    or a parameter declared in the block's own URL template; anything else
    (blank lines, SPARQL comments, unknown hash tokens) continues the
    current field's value. Before the first block only blank lines and
    comment lines (``#`` followed by whitespace or nothing) are allowed.
    """
    blocks: list[list[tuple[str, list[str]]]] = []
    current: list[tuple[str, list[str]]] | None = None
    recognized: frozenset[str] = KNOWN_FIELDS

    for line in text.splitlines():
        m = _FIELD_LINE_RE.match(line)
        token = m.group(1) if m else None
        if token == "url":
            url_value = m.group(2) or ""
            current = [("url", [url_value])]
            blocks.append(current)
            declared = PLACEHOLDER_RE.findall(url_value)
            recognized = KNOWN_FIELDS | frozenset(declared)
            continue
        if current is None:
            if not line.strip() or _is_comment_line(line):
                continue
            raise DocumentStructureError(
                f"content before the first '#url' line: {line!r}"
            )
        if token is not None and token in recognized:
            current.append((token, [m.group(2) or ""]))
        else:
            current[-1][1].append(line)

    if not blocks:
        raise DocumentStructureError("document declares no '#url' block")
    return [
        [FieldEntry(name, "\n".join(lines).strip()) for name, lines in block]
        for block in blocks
    ]


def _is_comment_line(line: str) -> bool:
    return line.startswith("#") and (len(line) == 1 or line[1] in " \t")


# ---------------------------------------------------------------------------
# Field-level parsers
# ---------------------------------------------------------------------------

def parse_param_shape(param_name: str, text: str) -> ParamShape:
    """Parse a shape declaration: ``<type>`` or ``<type>(<regex>)``."""
    m = _SHAPE_RE.match(text.strip())
    if not m:
        raise ParamShapeError(f"malformed shape {text!r}", field=param_name)
    value_type, pattern = m.group(1), m.group(2)
    if value_type not in VALUE_TYPES:
        raise ParamShapeError(
            f"unknown type {value_type!r} in shape {text!r}", field=param_name
        )
    if pattern is None:
        pattern = DEFAULT_PATTERN
    try:
        re.compile(pattern)
    except re.error as exc:
        raise ParamShapeError(
            f"shape pattern {pattern!r} does not compile: {exc}", field=param_name
        ) from None
    return ParamShape(param_name, value_type, pattern)


def parse_process_chain(text: str) -> tuple[ProcessStep, ...]:
    """Parse a ``-->``-separated chain of ``name(arg1, arg2, ...)`` terms."""
    steps = []
    for term in text.split("-->"):
        term = term.strip()
        m = _CHAIN_TERM_RE.match(term)
        if not m:
            raise ProcessChainError(f"malformed chain term {term!r}")
        name, body = m.group(1), m.group(2).strip()
        args = []
        if body:
            for arg in body.split(","):
                arg = arg.strip()
                if not _NAME_RE.match(arg):
                    raise ProcessChainError(
                        f"bad argument {arg!r} in chain term {term!r}"
                    )
                args.append(arg)
        steps.append(ProcessStep(name, tuple(args)))
    return tuple(steps)


def parse_field_types(text: str) -> dict[str, str]:
    """Parse ``#field_type`` text: whitespace-separated ``type(var)`` items."""
    field_types: dict[str, str] = {}
    for item in text.split():
        m = _SHAPE_RE.match(item)
        if not m or m.group(2) is None:
            raise ParamShapeError(f"malformed field type {item!r}", field="field_type")
        value_type, var = m.group(1), m.group(2)
        if value_type not in VALUE_TYPES:
            raise ParamShapeError(
                f"unknown type {value_type!r} in field type {item!r}",
                field="field_type",
            )
        if not _NAME_RE.match(var):
            raise ParamShapeError(
                f"bad variable name {var!r} in field type {item!r}",
                field="field_type",
            )
        field_types[var] = value_type
    return field_types


def placeholder_names(template: str) -> list[str]:
    """``{name}`` placeholders of a URL template, in first-appearance order."""
    seen: list[str] = []
    for name in PLACEHOLDER_RE.findall(template):
        if name not in seen:
            seen.append(name)
    return seen


def normalize_slots(sparql: str) -> str:
    """Rewrite the ``[{name}]`` slot spelling to the canonical ``[[name]]``."""
    return _ALT_SLOT_RE.sub(r"[[\1]]", sparql)


def slot_names(sparql: str) -> set[str]:
    """``[[name]]`` substitution slots of a (normalized) SPARQL template."""
    return set(_SLOT_RE.findall(sparql))


# ---------------------------------------------------------------------------
# Document assembly
# ---------------------------------------------------------------------------

def parse_document(text: str) -> ConfigDocument:
    """Parse one configuration document into its api and operation specs."""
    api: ApiSpec | None = None
    operations: list[OperationSpec] = []

    for index, entries in enumerate(split_blocks(text), start=1):
        _reject_duplicates(entries, index)
        values = {e.name: e.value for e in entries}
        block_type = values.get("type")
        if block_type is None:
            raise DocumentStructureError("block has no '#type' field", block_index=index)
        if block_type == "api":
            if api is not None:
                raise DocumentStructureError(
                    "more than one '#type api' block", block_index=index
                )
            api = _build_api(entries, values, index)
        elif block_type == "operation":
            operations.append(_build_operation(entries, values, index))
        else:
            raise DocumentStructureError(
                f"unknown '#type' value {block_type!r}", block_index=index
            )

    if api is None:
        raise DocumentStructureError("document has no '#type api' block")
    for op in operations:
        if op.method not in api.methods:
            raise SpecValidationError(
                f"operation {op.url_template!r} uses method {op.method!r}, "
                f"not among the api methods {'/'.join(api.methods)}",
                field="method",
            )
    return ConfigDocument(api=api, operations=tuple(operations))


def load_document(path: str) -> ConfigDocument:
    """Read a configuration file (UTF-8) and parse it."""
    with open(path, encoding="utf-8") as handle:
        return parse_document(handle.read())


def serialize_document(doc: ConfigDocument) -> str:
    """Re-emit a parsed document, fields in original order, values verbatim."""
    blocks = [doc.api.fields] + [op.fields for op in doc.operations]
    rendered = []
    for entries in blocks:
        lines = []
        for entry in entries:
            lines.append(f"#{entry.name} {entry.value}" if entry.value else f"#{entry.name}")
        rendered.append("\n".join(lines))
    return "\n\n".join(rendered) + "\n"


def _reject_duplicates(entries: list[FieldEntry], index: int) -> None:
    seen: set[str] = set()
    for entry in entries:
        if entry.name in seen:
            raise DuplicateFieldError(
                "field declared twice", block_index=index, field=entry.name
            )
        seen.add(entry.name)


def _build_api(
    entries: list[FieldEntry], values: dict[str, str], index: int
) -> ApiSpec:
    url = values["url"]
    if not url.startswith("/") or url.endswith("/"):
        raise SpecValidationError(
            f"api url {url!r} must start with '/' and not end with '/'",
            block_index=index,
            field="url",
        )
    endpoint = values.get("endpoint", "")
    if not endpoint:
        raise SpecValidationError(
            "api block declares no '#endpoint'", block_index=index, field="endpoint"
        )
    parts = urllib.parse.urlparse(endpoint)
    if not parts.scheme or not parts.netloc:
        raise SpecValidationError(
            f"endpoint {endpoint!r} is not an absolute URL",
            block_index=index,
            field="endpoint",
        )
    methods = _parse_methods(values.get("method"), index)
    extras = tuple(e for e in entries if e.name not in API_FIELDS)
    for extra in extras:
        log.warning("block %d: field '#%s' is not an api field", index, extra.name)
    return ApiSpec(
        url=url,
        endpoint=endpoint,
        methods=methods,
        base=values.get("base", ""),
        title=values.get("title", ""),
        description=values.get("description", ""),
        version=values.get("version", ""),
        license=values.get("license", ""),
        contacts=values.get("contacts", ""),
        addon=values.get("addon", ""),
        fields=tuple(entries),
        extras=extras,
    )


def _parse_methods(value: str | None, index: int) -> tuple[str, ...]:
    # '#method' omitted in the api block allows both verbs.
    if value is None:
        return ("get", "post")
    methods = tuple(token.lower() for token in value.split())
    if not methods:
        raise SpecValidationError(
            "'#method' declares no methods", block_index=index, field="method"
        )
    for token in methods:
        if token not in HTTP_METHODS:
            raise SpecValidationError(
                f"unknown method {token!r}", block_index=index, field="method"
            )
    return methods


def _build_operation(
    entries: list[FieldEntry], values: dict[str, str], index: int
) -> OperationSpec:
    template = values["url"]
    if not template.startswith("/"):
        raise SpecValidationError(
            f"operation url {template!r} must start with '/'",
            block_index=index,
            field="url",
        )
    declared = placeholder_names(template)

    method_value = values.get("method", "")
    methods = method_value.split()
    if len(methods) != 1 or methods[0].lower() not in HTTP_METHODS:
        raise SpecValidationError(
            f"operation needs exactly one method, got {method_value!r}",
            block_index=index,
            field="method",
        )

    sparql_raw = values.get("sparql", "")
    if not sparql_raw:
        raise SpecValidationError(
            "operation block declares no '#sparql'", block_index=index, field="sparql"
        )
    sparql = normalize_slots(sparql_raw)
    undeclared = slot_names(sparql) - set(declared)
    if undeclared:
        raise SpecValidationError(
            f"sparql template references undeclared parameters: "
            f"{', '.join(sorted(undeclared))}",
            block_index=index,
            field="sparql",
        )

    shapes = []
    for name in declared:
        if name in values:
            shapes.append(_at_block(index, parse_param_shape, name, values[name]))
        else:
            shapes.append(ParamShape(name))

    field_types = _at_block(index, parse_field_types, values.get("field_type", ""))

    preprocess = _parse_chain_field(values, "preprocess", index)
    postprocess = _parse_chain_field(values, "postprocess", index)
    for step in preprocess:
        for arg in step.args:
            if arg not in declared:
                raise SpecValidationError(
                    f"preprocess argument {arg!r} is not a declared parameter",
                    block_index=index,
                    field="preprocess",
                )
    for step in postprocess:
        for arg in step.args:
            if arg not in field_types:
                raise SpecValidationError(
                    f"postprocess argument {arg!r} is not listed in '#field_type'",
                    block_index=index,
                    field="postprocess",
                )

    known = OPERATION_FIELDS | set(declared)
    extras = tuple(e for e in entries if e.name not in known)
    for extra in extras:
        log.warning("block %d: field '#%s' is not an operation field", index, extra.name)

    return OperationSpec(
        url_template=template,
        method=methods[0].lower(),
        sparql=sparql,
        params=tuple(shapes),
        preprocess=preprocess,
        postprocess=postprocess,
        description=values.get("description", ""),
        field_types=field_types,
        call_example=values.get("call", ""),
        output_json_example=values.get("output_json", ""),
        fields=tuple(entries),
        extras=extras,
    )


def _parse_chain_field(
    values: dict[str, str], name: str, index: int
) -> tuple[ProcessStep, ...]:
    text = values.get(name, "")
    if not text:
        return ()
    try:
        return parse_process_chain(text)
    except ProcessChainError as exc:
        raise ProcessChainError(
            exc.bare_message, block_index=index, field=name
        ) from None


def _at_block(index: int, parser, *args):
    """Run a field-level parser, pinning any config error to the block."""
    try:
        return parser(*args)
    except ConfigError as exc:
        raise exc.at_block(index) from None
