"""
Bandwidth ledger
Per (link, direction, variant) byte accounting plus the ordered event log of every frame
"""

import logging
from collections import OrderedDict
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from src.protocol.messages import Direction, Message, Variant

logger = logging.getLogger(__name__)

# Parameter count of the hypothetical model whose gradients a parameter-sharing scheme ships
DEFAULT_BASELINE_PARAMETERS = 42_500_000
BYTES_PER_PARAMETER = 4

EVENT_COLUMNS = ["seq", "round", "link", "direction", "variant", "node", "modality",
                 "payload_bytes", "framed_bytes"]


@dataclass
class LedgerEntry:
    count: int = 0
    payload: int = 0
    framed: int = 0

    @property
    def header(self) -> int:
        return self.framed - self.payload


@dataclass(frozen=True)
class LedgerEvent:
    seq: int
    round: int
    link: str
    direction: str
    variant: str
    node: int
    modality: Optional[int]
    payload_bytes: int
    framed_bytes: int


class BandwidthLedger:
    """Shared by both ends of every link; each frame is recorded once, by its sender"""

    def __init__(self):
        self.entries: "OrderedDict[Tuple[str, Direction, Variant], LedgerEntry]" = OrderedDict()
        self.events: List[LedgerEvent] = []
        self._round_bytes: Dict[int, int] = {}

    def record(self, link: str, direction: Direction, msg: Message, framed: int, payload: int) -> LedgerEvent:
        key = (link, direction, msg.variant)
        entry = self.entries.setdefault(key, LedgerEntry())
        entry.count += 1
        entry.payload += payload
        entry.framed += framed
        event = LedgerEvent(
            seq=len(self.events),
            round=msg.round,
            link=link,
            direction=direction.value,
            variant=msg.variant.name,
            node=getattr(msg.body, "node", -1),
            modality=getattr(msg.body, "modality", None),
            payload_bytes=payload,
            framed_bytes=framed,
        )
        self.events.append(event)
        self._round_bytes[msg.round] = self._round_bytes.get(msg.round, 0) + framed
        return event

    def total(self, include_control: bool = True) -> LedgerEntry:
        out = LedgerEntry()
        for (_, _, variant), entry in self.entries.items():
            if variant is Variant.CONTROL and not include_control:
                continue
            out.count += entry.count
            out.payload += entry.payload
            out.framed += entry.framed
        return out

    def count(self, variant: Variant, link: Optional[str] = None) -> int:
        return sum(e.count for (lk, _, v), e in self.entries.items()
                   if v is variant and (link is None or lk == link))

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(e) for e in self.events], columns=EVENT_COLUMNS)

    def bytes_by_round(self) -> Dict[int, int]:
        """Framed bytes per round, control frames included"""
        return dict(self._round_bytes)

    def bytes_in_round(self, round_: int) -> int:
        return self._round_bytes.get(round_, 0)

    def __len__(self):
        return len(self.events)


def baseline_bytes(parameters: int = DEFAULT_BASELINE_PARAMETERS) -> int:
    """Bytes one node ships per iteration when sharing a full f32 gradient"""
    return int(parameters) * BYTES_PER_PARAMETER


def ledger_report(ledger: BandwidthLedger,
                  baseline_parameters: int = DEFAULT_BASELINE_PARAMETERS) -> Dict[str, Any]:
    """
    Summary block for report.json.

    Returns:
        totals (all frames and data-only), per-link / per-direction / per-variant
        counts, per-round framed bytes, and the parameter-sharing baseline with the
        ratio of baseline bytes to the observed bytes per node per round
    """
    df = ledger.frame()
    baseline = {"parameters": int(baseline_parameters), "bytes": baseline_bytes(baseline_parameters)}
    if df.empty:
        return {
            "total": {"messages": 0, "payload_bytes": 0, "framed_bytes": 0},
            "data": {"messages": 0, "payload_bytes": 0, "framed_bytes": 0},
            "per_link": {},
            "per_round": {},
            "baseline": {**baseline, "ratio_per_node_round": 0.0},
        }

    def _summary(frame: pd.DataFrame) -> Dict[str, int]:
        return {"messages": int(len(frame)),
                "payload_bytes": int(frame["payload_bytes"].sum()),
                "framed_bytes": int(frame["framed_bytes"].sum())}

    data = df[df["variant"] != Variant.CONTROL.name]
    per_link: Dict[str, Dict[str, Dict[str, Dict[str, int]]]] = {}
    grouped = df.groupby(["link", "direction", "variant"], sort=True)
    for (link, direction, variant), frame in grouped:
        per_link.setdefault(link, {}).setdefault(direction, {})[variant] = _summary(frame)

    per_round = {int(r): int(v) for r, v in df.groupby("round")["framed_bytes"].sum().items()}

    node_rounds = data.groupby(["link", "round"])["framed_bytes"].sum()
    mean_node_round = float(node_rounds.mean()) if len(node_rounds) else 0.0
    ratio = baseline["bytes"] / mean_node_round if mean_node_round else 0.0

    return {
        "total": _summary(df),
        "data": _summary(data),
        "per_link": per_link,
        "per_round": per_round,
        "baseline": {**baseline, "mean_bytes_per_node_round": mean_node_round,
                     "ratio_per_node_round": ratio},
    }
