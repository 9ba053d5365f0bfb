"""
Utilities shared by every module: sequence counter and emit_event().

Events are appended as JSON lines to 'events.log' in the current working
directory unless a run redirects them with set_events_log(). The sequence
counter lives in-process and is reset at the start of each run, so the log
of a run is reproducible.
"""

from typing import Dict, Any, Optional
import json
import os
import threading

_EVENTS_LOG: Optional[str] = None
_SEQ = 0
_SEQ_LOCK = threading.Lock()
_ECHO = True


def events_log_path() -> str:
    if _EVENTS_LOG is not None:
        return _EVENTS_LOG
    return os.path.join(os.getcwd(), "events.log")


def set_events_log(path: Optional[str]) -> None:
    """Redirect events to `path` (None restores the cwd default)."""
    global _EVENTS_LOG
    _EVENTS_LOG = path


def set_echo(enabled: bool) -> None:
    global _ECHO
    _ECHO = enabled


def reset_events(path: Optional[str] = None) -> None:
    """Start a fresh log: truncate it and rewind the sequence counter."""
    global _SEQ
    set_events_log(path)
    with _SEQ_LOCK:
        _SEQ = 0
    log = events_log_path()
    if os.path.exists(log):
        os.remove(log)


def tick() -> int:
    """Increment and return the event sequence number."""
    global _SEQ
    with _SEQ_LOCK:
        _SEQ += 1
        return _SEQ


def emit_event(event: Dict[str, Any]) -> None:
    """
    Append event as a JSON-line to the events log.
    If 'seq' key missing, adds it via tick().
    """
    if "seq" not in event:
        event["seq"] = tick()
    line = json.dumps(event, sort_keys=True, default=float)
    with open(events_log_path(), "a", encoding="utf-8", newline="\n") as f:
        f.write(line + "\n")
    if _ECHO:
        print(f"[EVENT {event['seq']}] {event.get('type', 'unknown')}")
