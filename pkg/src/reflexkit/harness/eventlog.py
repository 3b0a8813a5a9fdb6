"""Totally ordered, append-only record of everything that happens in a run."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator

KINDS = (
    "dispatch",
    "reply",
    "checkpoint",
    "graph-edit",
    "lifecycle",
    "fault",
    "suspicion",
    "warning",
)

HEADER = "#reflexkit-log v1 seed={seed}"


def _clean(text: str) -> str:
    return text.replace("\t", " ").replace("\r", " ").replace("\n", " ")


@dataclass(frozen=True)
class EventRecord:
    time: int
    seq: int
    kind: str
    subject: str
    detail: str

    def line(self) -> str:
        return f"{self.time}\t{self.seq}\t{self.kind}\t{self.subject}\t{self.detail}"

    def fields(self) -> dict[str, str]:
        """Parse ``key=value`` tokens out of the detail text."""
        out = {}
        for token in self.detail.split(" "):
            key, sep, value = token.partition("=")
            if sep:
                out[key] = value
        return out

    @classmethod
    def parse(cls, line: str) -> "EventRecord":
        time, seq, kind, subject, detail = line.rstrip("\n").split("\t", 4)
        return cls(int(time), int(seq), kind, subject, detail)


class EventLog:
    """Records carry a global sequence index so ``(time, seq)`` is strictly increasing."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.records: list[EventRecord] = []
        self._subscribers: list[Callable[[EventRecord], None]] = []

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[EventRecord]:
        return iter(self.records)

    def __getitem__(self, item):
        return self.records[item]

    def subscribe(self, fn: Callable[[EventRecord], None]) -> None:
        self._subscribers.append(fn)

    def append(self, time: int, kind: str, subject: str, detail: str = "") -> EventRecord:
        if kind not in KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        if self.records and time < self.records[-1].time:
            raise ValueError(f"log time went backwards: {time} < {self.records[-1].time}")
        record = EventRecord(time, len(self.records), kind, _clean(subject), _clean(detail))
        self.records.append(record)
        for fn in self._subscribers:
            fn(record)
        return record

    def of_kind(self, *kinds: str) -> list[EventRecord]:
        return [r for r in self.records if r.kind in kinds]

    def header(self) -> str:
        return HEADER.format(seed=self.seed)

    def to_text(self) -> str:
        return "".join(line + "\n" for line in self.lines())

    def lines(self) -> Iterable[str]:
        yield self.header()
        for record in self.records:
            yield record.line()

    def write(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_text().encode("utf-8"))

    @classmethod
    def read(cls, path: str | Path) -> "EventLog":
        log = cls()
        for raw in Path(path).read_text(encoding="utf-8").splitlines():
            if raw.startswith("#reflexkit-log"):
                log.seed = int(raw.rsplit("seed=", 1)[1])
            elif raw.startswith("#") or not raw:
                continue
            else:
                log.records.append(EventRecord.parse(raw))
        return log
