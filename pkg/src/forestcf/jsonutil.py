"""Shared JSON formatting so CLI files and HTTP bodies are byte-identical."""

from __future__ import annotations

import json


def to_json(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"
