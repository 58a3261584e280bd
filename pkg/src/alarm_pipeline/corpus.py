"""Ground-truth data model, corpus file IO, stack labeling, and fold assignment.

A "stack" is the classifier's prediction unit: a window of consecutive frames
anchored at its last frame, so the stack at anchor ``f`` covers frames
``[f - (L - 1), f]``. Scores are the model's No-Fall probability; frame
intervals are inclusive on both ends and 0-based throughout.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import CorpusFormatError, InfeasibleError


class StackLabel(Enum):
    """Ground-truth class of one stack, derived from fall intervals."""

    FALL = "fall"
    NO_FALL = "no_fall"
    TRANSITION = "transition"


@dataclass(frozen=True)
class StackConfig:
    """Stack geometry: window length in frames and anchor stride."""

    stack_length: int = 10
    stride: int = 1

    def __post_init__(self) -> None:
        if self.stack_length < 1:
            raise ValueError(f"stack_length must be >= 1, got {self.stack_length}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")

    def span(self, anchor_frame: int) -> tuple[int, int]:
        """Inclusive frame span covered by the stack anchored at ``anchor_frame``."""
        return anchor_frame - (self.stack_length - 1), anchor_frame


@dataclass(frozen=True)
class VideoAnnotation:
    """Per-video ground truth: fall intervals over a known frame range.

    ``fall_intervals`` are inclusive ``(start, end)`` frame pairs, sorted and
    pairwise disjoint. An empty list marks a daily-life video with no fall.
    ``group_id`` ties derived sequences (pre-fall/fall/post-fall cuts, camera
    views) back to their parent recording for fold assignment; it defaults to
    the video's own id.
    """

    video_id: str
    database_id: str
    fps: float
    frame_count: int
    fall_intervals: tuple[tuple[int, int], ...] = ()
    group_id: str = ""

    def __post_init__(self) -> None:
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        if not (self.fps > 0):
            raise ValueError(f"fps must be > 0, got {self.fps}")
        if self.frame_count < 1:
            raise ValueError(f"frame_count must be >= 1, got {self.frame_count}")
        intervals = tuple((int(s), int(e)) for s, e in self.fall_intervals)
        object.__setattr__(self, "fall_intervals", intervals)
        prev_end = -1
        for start, end in intervals:
            if not (0 <= start <= end < self.frame_count):
                raise ValueError(
                    f"fall interval [{start}, {end}] outside frames [0, {self.frame_count})"
                )
            if start <= prev_end:
                raise ValueError(
                    f"fall intervals must be sorted and disjoint; [{start}, {end}] "
                    f"follows an interval ending at {prev_end}"
                )
            prev_end = end
        if not self.group_id:
            object.__setattr__(self, "group_id", self.video_id)


@dataclass
class PredictionStream:
    """Ordered per-stack No-Fall scores for one video, keyed by anchor frame."""

    video_id: str
    anchor_frames: np.ndarray
    scores: np.ndarray

    def __post_init__(self) -> None:
        self.anchor_frames = np.asarray(self.anchor_frames, dtype=np.int64)
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.anchor_frames.shape != self.scores.shape or self.anchor_frames.ndim != 1:
            raise ValueError("anchor_frames and scores must be 1-D and the same length")
        if self.anchor_frames.size > 1 and not np.all(np.diff(self.anchor_frames) > 0):
            raise ValueError(f"anchor frames must be strictly increasing in {self.video_id!r}")
        if self.scores.size and (self.scores.min() < 0.0 or self.scores.max() > 1.0):
            raise ValueError(f"scores must lie in [0, 1] in {self.video_id!r}")

    def __len__(self) -> int:
        return int(self.anchor_frames.size)


@dataclass(frozen=True)
class FoldAssignment:
    """Video -> fold mapping produced by :func:`assign_folds`."""

    k: int
    seed: int
    folds: Mapping[str, int]

    def videos_in(self, fold: int) -> list[str]:
        return sorted(v for v, f in self.folds.items() if f == fold)


def label_stack(
    annotation: VideoAnnotation, anchor_frame: int, config: StackConfig = StackConfig()
) -> StackLabel:
    """Classify one stack against the fall intervals.

    FALL if every frame of the stack's span lies inside a fall interval,
    NO_FALL if none does, TRANSITION if the span straddles a boundary.
    """
    lo, hi = config.span(anchor_frame)
    if lo < 0 or hi >= annotation.frame_count:
        raise IndexError(
            f"stack span [{lo}, {hi}] outside frames [0, {annotation.frame_count}) "
            f"of {annotation.video_id!r}"
        )
    for start, end in annotation.fall_intervals:
        if start <= lo and hi <= end:
            return StackLabel.FALL
        if lo <= end and hi >= start:
            return StackLabel.TRANSITION
    return StackLabel.NO_FALL


def stack_label_masks(
    annotation: VideoAnnotation,
    anchor_frames: np.ndarray,
    config: StackConfig = StackConfig(),
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`label_stack` over many anchors.

    Returns ``(fall, transition)`` boolean masks; anchors where both are False
    are NO_FALL. Raises IndexError if any span leaves the frame range.
    """
    anchors = np.asarray(anchor_frames, dtype=np.int64)
    lo = anchors - (config.stack_length - 1)
    if anchors.size:
        if lo.min() < 0 or anchors.max() >= annotation.frame_count:
            bad = int(anchors[(lo < 0) | (anchors >= annotation.frame_count)][0])
            raise IndexError(
                f"stack at anchor {bad} leaves frames [0, {annotation.frame_count}) "
                f"of {annotation.video_id!r}"
            )
    fall = np.zeros(anchors.shape, dtype=bool)
    touches = np.zeros(anchors.shape, dtype=bool)
    for start, end in annotation.fall_intervals:
        fall |= (lo >= start) & (anchors <= end)
        touches |= (lo <= end) & (anchors >= start)
    return fall, touches & ~fall


def stack_labels(
    annotation: VideoAnnotation,
    anchor_frames: np.ndarray,
    config: StackConfig = StackConfig(),
) -> list[StackLabel]:
    """Per-anchor labels as a list, for callers that want the enum values."""
    fall, transition = stack_label_masks(annotation, anchor_frames, config)
    out = []
    for is_fall, is_trans in zip(fall, transition):
        if is_fall:
            out.append(StackLabel.FALL)
        elif is_trans:
            out.append(StackLabel.TRANSITION)
        else:
            out.append(StackLabel.NO_FALL)
    return out


def assign_folds(groups: Mapping[str, str], k: int = 5, seed: int = 0) -> FoldAssignment:
    """Assign videos to ``k`` folds without ever splitting a parent group.

    ``groups`` maps video_id -> group_id. Groups are shuffled with
    ``random.Random(seed)`` (Mersenne Twister, so the mapping is reproducible
    across platforms) and dealt round-robin, which balances folds by group
    count to within one group.
    """
    if k < 2:
        raise ValueError(f"fold count must be >= 2, got {k}")
    group_ids = sorted(set(groups.values()))
    if len(group_ids) < k:
        raise InfeasibleError(
            f"cannot split {len(group_ids)} parent groups into {k} folds"
        )
    rng = random.Random(seed)
    rng.shuffle(group_ids)
    group_fold = {g: i % k for i, g in enumerate(group_ids)}
    folds = {video: group_fold[group] for video, group in groups.items()}
    return FoldAssignment(k=k, seed=seed, folds=folds)


# -- file formats -------------------------------------------------------------
#
# Annotations: JSON Lines, one object per video.
# Predictions: CSV with header video_id,anchor_frame,score.
# Both writers emit a canonical byte layout so save -> load -> save is a
# fixed point (useful for golden files and reproducibility checks).

_ANNOTATION_KEYS = ("video_id", "database_id", "fps", "frame_count", "fall_intervals", "group_id")
_PREDICTION_HEADER = ["video_id", "anchor_frame", "score"]


def load_annotations(path: str | Path) -> list[VideoAnnotation]:
    """Read an annotation JSONL file, validating every record."""
    path = Path(path)
    annotations: list[VideoAnnotation] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"invalid JSON ({exc.msg})", path=str(path), line=line_no)
            if not isinstance(record, dict):
                raise CorpusFormatError("annotation record must be an object", path=str(path), line=line_no)
            missing = [k for k in ("video_id", "database_id", "fps", "frame_count", "fall_intervals") if k not in record]
            if missing:
                raise CorpusFormatError(f"missing keys {missing}", path=str(path), line=line_no)
            try:
                annotation = VideoAnnotation(
                    video_id=str(record["video_id"]),
                    database_id=str(record["database_id"]),
                    fps=float(record["fps"]),
                    frame_count=int(record["frame_count"]),
                    fall_intervals=tuple((int(s), int(e)) for s, e in record["fall_intervals"]),
                    group_id=str(record.get("group_id", "") or ""),
                )
            except (TypeError, ValueError) as exc:
                raise CorpusFormatError(
                    f"record {record.get('video_id', '?')!r}: {exc}", path=str(path), line=line_no
                )
            if annotation.video_id in seen:
                raise CorpusFormatError(
                    f"duplicate video_id {annotation.video_id!r}", path=str(path), line=line_no
                )
            seen.add(annotation.video_id)
            annotations.append(annotation)
    return annotations


def save_annotations(annotations: Iterable[VideoAnnotation], path: str | Path) -> None:
    """Write annotations as canonical JSONL (fixed key order, one video per line)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        for ann in annotations:
            record = {
                "video_id": ann.video_id,
                "database_id": ann.database_id,
                "fps": ann.fps,
                "frame_count": ann.frame_count,
                "fall_intervals": [[s, e] for s, e in ann.fall_intervals],
                "group_id": ann.group_id,
            }
            handle.write(json.dumps(record, separators=(", ", ": ")) + "\n")


def load_predictions(path: str | Path) -> list[PredictionStream]:
    """Read a prediction CSV, grouping rows into per-video streams.

    Rows of one video may be interleaved with other videos but must keep
    strictly increasing anchor frames; violations are reported with the
    offending line number.
    """
    path = Path(path)
    order: list[str] = []
    anchors: dict[str, list[int]] = {}
    scores: dict[str, list[float]] = {}
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusFormatError("empty prediction file", path=str(path), line=1)
        if header != _PREDICTION_HEADER:
            raise CorpusFormatError(
                f"expected header {','.join(_PREDICTION_HEADER)!r}, got {','.join(header)!r}",
                path=str(path),
                line=1,
            )
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise CorpusFormatError(f"expected 3 columns, got {len(row)}", path=str(path), line=line_no)
            video_id, anchor_text, score_text = row
            try:
                anchor = int(anchor_text)
                score = float(score_text)
            except ValueError:
                raise CorpusFormatError(
                    f"bad anchor/score {anchor_text!r},{score_text!r} for video {video_id!r}",
                    path=str(path),
                    line=line_no,
                )
            if not (0.0 <= score <= 1.0):
                raise CorpusFormatError(
                    f"score {score} outside [0, 1] for video {video_id!r}", path=str(path), line=line_no
                )
            if video_id not in anchors:
                order.append(video_id)
                anchors[video_id] = []
                scores[video_id] = []
            elif anchors[video_id] and anchor <= anchors[video_id][-1]:
                raise CorpusFormatError(
                    f"anchor {anchor} not increasing for video {video_id!r}", path=str(path), line=line_no
                )
            anchors[video_id].append(anchor)
            scores[video_id].append(score)
    return [
        PredictionStream(video_id=v, anchor_frames=np.array(anchors[v]), scores=np.array(scores[v]))
        for v in order
    ]


def save_predictions(streams: Iterable[PredictionStream], path: str | Path) -> None:
    """Write prediction streams as canonical CSV (shortest round-trip floats)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(_PREDICTION_HEADER)
        for stream in streams:
            for anchor, score in zip(stream.anchor_frames, stream.scores):
                writer.writerow([stream.video_id, int(anchor), repr(float(score))])
