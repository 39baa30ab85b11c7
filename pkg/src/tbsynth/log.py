"""Structured ``key=value`` logging on standard error."""

import logging
import sys

# Attributes every LogRecord carries; anything else arrived through ``extra``.
_RESERVED = frozenset(vars(logging.LogRecord("", 0, "", 0, "", None, None))) | {"message", "asctime"}


class KeyValueFormatter(logging.Formatter):
    """Render records as ``level=... logger=... msg="..."`` followed by extra fields."""

    def format(self, record: logging.LogRecord) -> str:
        """Format one record as a single structured line."""
        parts = [
            f"level={record.levelname.lower()}",
            f"logger={record.name}",
            f"msg={_quote(record.getMessage())}",
        ]
        for key, value in sorted(vars(record).items()):
            if key not in _RESERVED and not key.startswith("_"):
                parts.append(f"{key}={_quote(str(value))}")
        if record.exc_info:
            parts.append(f"exc={_quote(self.formatException(record.exc_info))}")
        return " ".join(parts)


def _quote(text: str) -> str:
    if text and all(ch.isalnum() or ch in "._-/:+" for ch in text):
        return text
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def configure_logging(level: str = "WARNING") -> None:
    """Install the structured stderr handler on the ``tbsynth`` logger.

    Calling it again replaces the handler instead of stacking a second one.
    """
    logger = logging.getLogger("tbsynth")
    for handler in list(logger.handlers):
        if getattr(handler, "_tbsynth", False):
            logger.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(KeyValueFormatter())
    handler._tbsynth = True  # type: ignore[attr-defined]
    logger.addHandler(handler)
    logger.setLevel(level.upper())
