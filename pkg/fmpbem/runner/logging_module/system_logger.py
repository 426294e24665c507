import logging
import json
import sys
import threading
import time
import traceback
from collections import defaultdict, deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional


class LogLevel(Enum):
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class EventType(Enum):
    SWEEP_START = "sweep_start"
    SWEEP_STOP = "sweep_stop"
    PERFORMANCE = "performance"
    ERROR = "error"
    CUSTOM = "custom"


_LEVELS_COUNTED_AS_ERRORS = (LogLevel.ERROR, LogLevel.CRITICAL)


@dataclass
class LogEvent:
    timestamp: datetime
    level: LogLevel
    event_type: EventType
    message: str
    component: str
    metadata: Dict[str, Any]
    error_details: Optional[Dict[str, Any]] = None

    def to_record(self) -> Dict[str, Any]:
        """JSON-ready form used by the exporter"""
        return {
            'timestamp': self.timestamp.isoformat(),
            'level': self.level.value,
            'event_type': self.event_type.value,
            'message': self.message,
            'component': self.component,
            'metadata': self.metadata,
            'error_details': self.error_details,
        }


@dataclass
class StageTiming:
    """Running statistics of one timed operation"""
    count: int = 0
    total_ms: float = 0.0
    max_ms: float = 0.0
    components: set = field(default_factory=set)

    def add(self, component: str, duration_ms: float) -> None:
        self.count += 1
        self.total_ms += duration_ms
        self.max_ms = max(self.max_ms, duration_ms)
        self.components.add(component)

    def as_dict(self) -> Dict[str, Any]:
        return {'count': self.count, 'total_ms': self.total_ms, 'mean_ms': self.total_ms / self.count,
                'max_ms': self.max_ms, 'components': sorted(self.components)}


def _json_default(value):
    """numpy scalars, arrays and paths in metadata"""
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return str(value)


def _handler(target, pattern: str) -> logging.Handler:
    handler = logging.StreamHandler(target) if target is sys.stdout else logging.FileHandler(target)
    handler.setFormatter(logging.Formatter(pattern))
    return handler


class SystemLogger:
    """
    Structured logging for solver runs.

    Every record goes to the "FMPBEMLogger" logger as "<message> | <json>".
    Events are also kept in a bounded queue, together with per-component
    counters and per-operation timing statistics, so a sweep can be
    summarised or exported once it finishes. Sweeps log from worker threads;
    all bookkeeping happens under one lock.
    """

    def __init__(self,
                 log_level: LogLevel = LogLevel.INFO,
                 max_events: int = 10000,
                 log_file: Optional[str] = None,
                 enable_console: bool = True):
        """
        Args:
            log_level (LogLevel): Threshold of the underlying logger.
            max_events (int): Events kept in memory; older ones are dropped.
            log_file (str, optional): File receiving every record.
            enable_console (bool, optional): Also write records to stdout.
        """
        self.log_level = log_level
        self.max_events = max_events

        self.events: deque = deque(maxlen=max_events)
        self.error_counts: Dict[str, int] = defaultdict(int)
        self.component_stats: Dict[str, Dict[str, Any]] = {}
        self.timings: Dict[str, StageTiming] = {}
        self._lock = threading.Lock()

        self.logger = logging.getLogger("FMPBEMLogger")
        self.logger.setLevel(getattr(logging, log_level.value))
        for handler in list(self.logger.handlers):
            handler.close()
        self.logger.handlers.clear()
        if enable_console:
            self.logger.addHandler(_handler(sys.stdout, '%(asctime)s - %(levelname)s - %(message)s'))
        if log_file:
            self.logger.addHandler(_handler(log_file, '%(asctime)s - %(name)s - %(levelname)s - %(message)s'))

    # ------------------------------------------------------------------
    # Recording
    # ------------------------------------------------------------------

    def _record(self, event: LogEvent) -> None:
        with self._lock:
            self.events.append(event)
            stats = self.component_stats.setdefault(
                event.component, {'event_count': 0, 'error_count': 0, 'last_activity': None})
            stats['event_count'] += 1
            stats['last_activity'] = event.timestamp
            if event.level in _LEVELS_COUNTED_AS_ERRORS:
                self.error_counts[event.component] += 1
                stats['error_count'] += 1

    def log_event(self,
                  level: LogLevel,
                  message: str,
                  component: str = "system",
                  event_type: EventType = EventType.CUSTOM,
                  metadata: Optional[Dict[str, Any]] = None,
                  error_details: Optional[Dict[str, Any]] = None):
        """Store the event and emit "<message> | {"comp": ..., "metadata": ...}" """
        event = LogEvent(timestamp=datetime.now(), level=level, event_type=event_type, message=message,
                         component=component, metadata=metadata or {}, error_details=error_details)
        self._record(event)

        payload = {'comp': component, 'metadata': event.metadata}
        if error_details:
            payload['error_details'] = error_details
        self.logger.log(getattr(logging, level.value),
                        f"{message} | {json.dumps(payload, default=_json_default)}")

    def log_error(self,
                  message: str,
                  component: str = "system",
                  exception: Optional[Exception] = None,
                  metadata: Optional[Dict[str, Any]] = None):
        """Error event; the exception type, message and traceback go to error_details"""
        details = {}
        if exception is not None:
            details = {
                'exception_type': type(exception).__name__,
                'exception_message': str(exception),
                'traceback': ''.join(traceback.format_exception(type(exception), exception,
                                                                exception.__traceback__)),
            }
        self.log_event(LogLevel.ERROR, message, component, EventType.ERROR, metadata, details)

    def log_performance(self,
                        component: str,
                        operation: str,
                        duration_ms: float,
                        metadata: Optional[Dict[str, Any]] = None):
        """
        Wall time of one stage (assembly, spectrum, gmres, postprocess...).

        The event metadata carries the operation name, the duration in
        milliseconds and the caller's metadata; the operation's running
        statistics are updated.
        """
        with self._lock:
            self.timings.setdefault(operation, StageTiming()).add(component, duration_ms)
        self.log_event(LogLevel.INFO, f"Performance: {operation} completed in {duration_ms:.2f}ms", component,
                       EventType.PERFORMANCE, {'operation': operation, 'duration_ms': duration_ms,
                                               **(metadata or {})})

    @contextmanager
    def timed(self, component: str, operation: str, metadata: Optional[Dict[str, Any]] = None) -> Iterator[Dict]:
        """
        Time the enclosed block and log it as one performance event.

        Yields a dict the block may fill with metadata known only at the end
        (iteration counts, sizes). Nothing is logged if the block raises.
        """
        extra: Dict[str, Any] = dict(metadata or {})
        started = time.perf_counter()
        yield extra
        self.log_performance(component, operation, (time.perf_counter() - started) * 1000.0, extra)

    def log_sweep_start(self, scene: str, metadata: Optional[Dict[str, Any]] = None):
        self.log_event(LogLevel.INFO, f"Sweep '{scene}' started", "scene_runner", EventType.SWEEP_START,
                       {'scene': scene, **(metadata or {})})

    def log_sweep_stop(self, scene: str, metadata: Optional[Dict[str, Any]] = None):
        self.log_event(LogLevel.INFO, f"Sweep '{scene}' finished", "scene_runner", EventType.SWEEP_STOP,
                       {'scene': scene, **(metadata or {})})

    def log_info(self, message: str, component: str = "system", metadata: Optional[Dict[str, Any]] = None):
        self.log_event(LogLevel.INFO, message, component, EventType.CUSTOM, metadata)

    def log_warning(self, message: str, component: str = "system", metadata: Optional[Dict[str, Any]] = None):
        self.log_event(LogLevel.WARNING, message, component, EventType.CUSTOM, metadata)

    def log_debug(self, message: str, component: str = "system", metadata: Optional[Dict[str, Any]] = None):
        self.log_event(LogLevel.DEBUG, message, component, EventType.CUSTOM, metadata)

    def log_critical(self, message: str, component: str = "system", metadata: Optional[Dict[str, Any]] = None):
        self.log_event(LogLevel.CRITICAL, message, component, EventType.CUSTOM, metadata)

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def get_events(self,
                   component: Optional[str] = None,
                   level: Optional[LogLevel] = None,
                   event_type: Optional[EventType] = None,
                   since: Optional[datetime] = None,
                   limit: Optional[int] = None) -> List[LogEvent]:
        """Stored events matching every given filter, newest first"""
        with self._lock:
            events = list(self.events)
        events = [e for e in events
                  if (component is None or e.component == component)
                  and (level is None or e.level == level)
                  and (event_type is None or e.event_type == event_type)
                  and (since is None or e.timestamp > since)]
        events.reverse()
        return events[:limit] if limit else events

    def get_performance(self, operation: Optional[str] = None) -> List[Dict[str, Any]]:
        """Metadata of the performance events, optionally for one operation, oldest first"""
        records = [e.metadata for e in reversed(self.get_events(event_type=EventType.PERFORMANCE))]
        if operation:
            records = [r for r in records if r.get('operation') == operation]
        return records

    def get_timings(self) -> Dict[str, Dict[str, Any]]:
        """Per-operation count, total, mean and max duration in milliseconds"""
        with self._lock:
            return {name: timing.as_dict() for name, timing in sorted(self.timings.items())}

    def get_component_stats(self) -> Dict[str, Dict[str, Any]]:
        with self._lock:
            return {name: dict(stats) for name, stats in self.component_stats.items()}

    def get_error_counts(self) -> Dict[str, int]:
        with self._lock:
            return dict(self.error_counts)

    def get_recent_errors(self, minutes: int = 60, limit: int = 50) -> List[LogEvent]:
        since = datetime.now() - timedelta(minutes=minutes)
        return self.get_events(level=LogLevel.ERROR, since=since, limit=limit)

    def clear_events(self):
        with self._lock:
            self.events.clear()
            self.error_counts.clear()
            self.component_stats.clear()
            self.timings.clear()

    def export_events(self, filename: str, format: str = 'json'):
        """Write the stored events to a JSON file; no other format is supported"""
        if format.lower() != 'json':
            raise ValueError(f"Unsupported export format: {format}")
        with self._lock:
            records = [event.to_record() for event in self.events]
        with open(filename, 'w') as handle:
            json.dump(records, handle, indent=2, default=_json_default)
        self.log_info(f"Events exported to {filename}", metadata={'event_count': len(records), 'format': format})

    def get_summary(self) -> Dict[str, Any]:
        """Event counts per level and component, error counts, component and timing statistics"""
        with self._lock:
            events = list(self.events)
        levels: Dict[str, int] = defaultdict(int)
        components: Dict[str, int] = defaultdict(int)
        for event in events:
            levels[event.level.value] += 1
            components[event.component] += 1
        return {
            'total_events': len(events),
            'level_distribution': dict(levels),
            'component_distribution': dict(components),
            'error_counts': self.get_error_counts(),
            'component_stats': self.get_component_stats(),
            'timings': self.get_timings(),
        }
