"""JSON file loading with positioned errors."""

import json

from .errors import InvalidInputError, ParseError


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", line=exc.lineno, column=exc.colno) from None


def load_with(path, parser):
    """Load JSON from ``path`` and hand it to ``parser``; schema errors name the file."""
    obj = load_json(path)
    try:
        return parser(obj)
    except InvalidInputError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None
