# label helpers for catalog lookups ("pnorm(4)", "scaled-div2d(0.25)")

import re
from typing import List, Tuple

from app.core.errors import ConfigurationError

_LABEL = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*(?:\((.*)\))?\s*$")


def split_label(label: str) -> Tuple[str, List[float]]:
    match = _LABEL.match(label or "")
    if not match:
        raise ConfigurationError(f"Malformed label '{label}'")
    name, args = match.group(1).lower(), match.group(2)
    if args is None or not args.strip():
        return name, []
    try:
        return name, [float(a) for a in args.split(",")]
    except ValueError:
        raise ConfigurationError(f"Label '{label}' has non-numeric parameters")
