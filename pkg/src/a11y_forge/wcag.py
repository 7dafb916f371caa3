"""Embedded WCAG 2.2 success-criterion table (levels A and AA)."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Optional


class Level(Enum):
    A = "A"
    AA = "AA"
    AAA = "AAA"


@dataclass(frozen=True)
class WcagCriterion:
    id: str
    name: str
    level: Level
    version_introduced: str  # "2.0" | "2.1" | "2.2"

    @property
    def slug(self) -> str:
        s = self.name.lower()
        s = re.sub(r"[(),]", "", s)
        return re.sub(r"\s+", "-", s.strip())

    @property
    def reference_url(self) -> str:
        return f"https://www.w3.org/WAI/WCAG22/Understanding/{self.slug}"


def _c(cid: str, name: str, level: str, version: str) -> WcagCriterion:
    return WcagCriterion(cid, name, Level(level), version)


# All Level A and AA success criteria of WCAG 2.2 (4.1.1 was removed in 2.2).
_CRITERIA = [
    _c("1.1.1", "Non-text Content", "A", "2.0"),
    _c("1.2.1", "Audio-only and Video-only (Prerecorded)", "A", "2.0"),
    _c("1.2.2", "Captions (Prerecorded)", "A", "2.0"),
    _c("1.2.3", "Audio Description or Media Alternative (Prerecorded)", "A", "2.0"),
    _c("1.2.4", "Captions (Live)", "AA", "2.0"),
    _c("1.2.5", "Audio Description (Prerecorded)", "AA", "2.0"),
    _c("1.3.1", "Info and Relationships", "A", "2.0"),
    _c("1.3.2", "Meaningful Sequence", "A", "2.0"),
    _c("1.3.3", "Sensory Characteristics", "A", "2.0"),
    _c("1.3.4", "Orientation", "AA", "2.1"),
    _c("1.3.5", "Identify Input Purpose", "AA", "2.1"),
    _c("1.4.1", "Use of Color", "A", "2.0"),
    _c("1.4.2", "Audio Control", "A", "2.0"),
    _c("1.4.3", "Contrast (Minimum)", "AA", "2.0"),
    _c("1.4.4", "Resize Text", "AA", "2.0"),
    _c("1.4.5", "Images of Text", "AA", "2.0"),
    _c("1.4.10", "Reflow", "AA", "2.1"),
    _c("1.4.11", "Non-text Contrast", "AA", "2.1"),
    _c("1.4.12", "Text Spacing", "AA", "2.1"),
    _c("1.4.13", "Content on Hover or Focus", "AA", "2.1"),
    _c("2.1.1", "Keyboard", "A", "2.0"),
    _c("2.1.2", "No Keyboard Trap", "A", "2.0"),
    _c("2.1.4", "Character Key Shortcuts", "A", "2.1"),
    _c("2.2.1", "Timing Adjustable", "A", "2.0"),
    _c("2.2.2", "Pause, Stop, Hide", "A", "2.0"),
    _c("2.3.1", "Three Flashes or Below Threshold", "A", "2.0"),
    _c("2.4.1", "Bypass Blocks", "A", "2.0"),
    _c("2.4.2", "Page Titled", "A", "2.0"),
    _c("2.4.3", "Focus Order", "A", "2.0"),
    _c("2.4.4", "Link Purpose (In Context)", "A", "2.0"),
    _c("2.4.5", "Multiple Ways", "AA", "2.0"),
    _c("2.4.6", "Headings and Labels", "AA", "2.0"),
    _c("2.4.7", "Focus Visible", "AA", "2.0"),
    _c("2.4.11", "Focus Not Obscured (Minimum)", "AA", "2.2"),
    _c("2.5.1", "Pointer Gestures", "A", "2.1"),
    _c("2.5.2", "Pointer Cancellation", "A", "2.1"),
    _c("2.5.3", "Label in Name", "A", "2.1"),
    _c("2.5.4", "Motion Actuation", "A", "2.1"),
    _c("2.5.7", "Dragging Movements", "AA", "2.2"),
    _c("2.5.8", "Target Size (Minimum)", "AA", "2.2"),
    _c("3.1.1", "Language of Page", "A", "2.0"),
    _c("3.1.2", "Language of Parts", "AA", "2.0"),
    _c("3.2.1", "On Focus", "A", "2.0"),
    _c("3.2.2", "On Input", "A", "2.0"),
    _c("3.2.3", "Consistent Navigation", "AA", "2.0"),
    _c("3.2.4", "Consistent Identification", "AA", "2.0"),
    _c("3.2.6", "Consistent Help", "A", "2.2"),
    _c("3.3.1", "Error Identification", "A", "2.0"),
    _c("3.3.2", "Labels or Instructions", "A", "2.0"),
    _c("3.3.3", "Error Suggestion", "AA", "2.0"),
    _c("3.3.4", "Error Prevention (Legal, Financial, Data)", "AA", "2.0"),
    _c("3.3.7", "Redundant Entry", "A", "2.2"),
    _c("3.3.8", "Accessible Authentication (Minimum)", "AA", "2.2"),
    _c("4.1.2", "Name, Role, Value", "A", "2.0"),
    _c("4.1.3", "Status Messages", "AA", "2.1"),
]

CRITERIA: dict[str, WcagCriterion] = {c.id: c for c in _CRITERIA}

_ID_PATTERN = re.compile(r"\b(\d+\.\d+\.\d+)\b")


def lookup(criterion_id: str) -> WcagCriterion:
    return CRITERIA[criterion_id]


def is_valid_criterion(criterion_id: str) -> bool:
    return criterion_id in CRITERIA


def extract_criterion_id(text: str) -> Optional[str]:
    """Pull a dotted criterion number out of free text like 'WCAG 2.1.1'."""
    if not text:
        return None
    m = _ID_PATTERN.search(text)
    return m.group(1) if m else None
