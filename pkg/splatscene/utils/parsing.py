"""Lenient JSON helpers for planner replies."""

import json
import logging
from typing import Any

log = logging.getLogger(__name__)

_LITERALS = {"true", "false", "null"}
_NUMBER_CHARS = set("0123456789+-.eE")


def extract_json_object(text: str) -> str:
    """Return the first balanced top-level {...} object in text (string-aware)."""
    start = text.find("{")
    if start < 0:
        raise ValueError("no JSON object in reply")
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    raise ValueError("unbalanced JSON object in reply")


def quote_bare_words(text: str) -> str:
    """Quote unquoted identifiers outside strings, e.g. {"sofa1": SIDE}."""
    out: list[str] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == '"':
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == '"':
                    break
                j += 1
            out.append(text[i : j + 1])
            i = j + 1
        elif ch.isdigit() or ch == "-":
            j = i + 1
            while j < n and text[j] in _NUMBER_CHARS:
                j += 1
            out.append(text[i:j])
            i = j
        elif ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            out.append(word if word in _LITERALS else f'"{word}"')
            i = j
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def loads_document(text: str, pairs: bool = False) -> Any:
    """Parse a planning document, tolerating bare enum tokens.

    With ``pairs=True`` every object is returned as a list of (key, value)
    pairs so repeated keys stay visible.
    """
    hook = (lambda items: list(items)) if pairs else None
    try:
        return json.loads(text, object_pairs_hook=hook)
    except json.JSONDecodeError:
        log.debug("Strict JSON parse failed, quoting bare tokens")
        return json.loads(quote_bare_words(text), object_pairs_hook=hook)
