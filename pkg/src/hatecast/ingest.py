"""Ingestion of Reddit-style line-delimited JSON dumps into discussion trees.

Submissions (records without a parent link) become roots; comments attach via
their ``parent_id``.  The ``t1_``/``t3_`` fullname prefixes that appear in
Pushshift dumps are stripped so links resolve uniformly.  Comments whose
parent chain cannot be resolved are dropped together with their descendants
and counted as orphans; trees containing duplicate ids are rejected whole.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .trees import CommentNode, DiscussionTree, TreeError, make_tree

_LINK_PREFIXES = ("t1_", "t3_")


class IngestError(ValueError):
    pass


@dataclass
class RawRecord:
    id: str
    parent_id: str | None
    text: str
    score: int
    community: str
    is_submission: bool
    line_no: int


@dataclass
class IngestReport:
    total_records: int = 0
    malformed_lines: int = 0
    trees_built: int = 0
    nodes_kept: int = 0
    orphans_dropped: int = 0
    rejected_trees: int = 0
    rejected_records: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def accounted(self) -> int:
        """Every input line lands in exactly one bucket."""
        return self.nodes_kept + self.orphans_dropped + self.malformed_lines + self.rejected_records


def _strip_prefix(value: str) -> str:
    for p in _LINK_PREFIXES:
        if value.startswith(p):
            return value[len(p):]
    return value


def parse_records(stream, strict: bool = False) -> tuple[list[RawRecord], list[str]]:
    """Parse line-delimited JSON records; malformed lines are skipped and reported.

    ``stream`` is any iterable of text lines (an open file works).  In strict
    mode the first malformed line raises IngestError instead.
    """
    records: list[RawRecord] = []
    diagnostics: list[str] = []

    def bad(line_no: int, reason: str) -> None:
        msg = f"line {line_no}: {reason}"
        if strict:
            raise IngestError(msg)
        diagnostics.append(msg)

    for line_no, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            bad(line_no, "empty line")
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            bad(line_no, f"invalid JSON ({exc.msg})")
            continue
        if not isinstance(obj, dict) or "id" not in obj:
            bad(line_no, "missing id field")
            continue
        if "score" not in obj:
            bad(line_no, "missing score field")
            continue
        try:
            score = int(obj["score"])
        except (TypeError, ValueError):
            bad(line_no, f"non-integer score {obj['score']!r}")
            continue

        parent = obj.get("parent_id")
        if parent is not None:
            parent = _strip_prefix(str(parent))
        if parent is None:
            # submission: text is the title plus any selftext
            title = obj.get("title") or ""
            selftext = obj.get("selftext") or ""
            text = (title + "\n\n" + selftext).strip() if (title or selftext) else obj.get("body")
            if text is None:
                bad(line_no, "submission has neither title/selftext nor body")
                continue
        else:
            text = obj.get("body")
            if text is None:
                bad(line_no, "comment missing body")
                continue
        records.append(
            RawRecord(
                id=_strip_prefix(str(obj["id"])),
                parent_id=parent,
                text=str(text),
                score=score,
                community=str(obj.get("subreddit", "")),
                is_submission=parent is None,
                line_no=line_no,
            )
        )
    return records, diagnostics


def build_trees(records: list[RawRecord]) -> tuple[list[DiscussionTree], IngestReport]:
    """Group records into one tree per submission.

    Comments are attached by walking parent links up to a submission; a broken
    link orphans the comment and everything below it.
    """
    report = IngestReport(total_records=len(records))
    submissions = {r.id: r for r in records if r.is_submission}
    comments = [r for r in records if not r.is_submission]
    comment_ids = {r.id for r in comments}

    # memoized resolution: comment id -> submission id, or None for orphans
    root_of: dict[str, str | None] = {}

    def resolve(rec: RawRecord) -> str | None:
        chain = []
        cur: str | None = rec.id
        seen = set()
        while True:
            if cur in root_of:
                result = root_of[cur]
                break
            if cur in seen:
                result = None  # cyclic links
                break
            seen.add(cur)
            chain.append(cur)
            parent = by_id[cur].parent_id if cur in by_id else None
            if parent is None:
                result = None
                break
            if parent in submissions:
                result = parent
                break
            if parent not in comment_ids:
                result = None
                break
            cur = parent
        for cid in chain:
            root_of[cid] = result
        return result

    by_id = {r.id: r for r in comments}
    grouped: dict[str, list[RawRecord]] = {sid: [] for sid in submissions}
    for rec in comments:
        root = resolve(rec)
        if root is None:
            report.orphans_dropped += 1
        else:
            grouped[root].append(rec)

    trees: list[DiscussionTree] = []
    for sid, sub in submissions.items():
        members = [sub] + grouped[sid]
        ids = [r.id for r in members]
        if len(set(ids)) != len(ids):
            report.rejected_trees += 1
            report.rejected_records += len(members)
            report.diagnostics.append(f"submission {sid}: duplicate comment id, tree rejected")
            continue
        nodes = [
            CommentNode(
                id=r.id,
                parent_id=None if r.is_submission else r.parent_id,
                text=r.text,
                score=r.score,
                community=sub.community,
            )
            for r in members
        ]
        try:
            tree = make_tree(nodes, sub.community)
        except TreeError as exc:
            report.rejected_trees += 1
            report.rejected_records += len(members)
            report.diagnostics.append(f"submission {sid}: {exc}")
            continue
        trees.append(tree)
        report.nodes_kept += len(tree)
    report.trees_built = len(trees)
    return trees, report


def ingest_stream(stream, strict: bool = False) -> tuple[list[DiscussionTree], IngestReport]:
    """parse_records + build_trees, with malformed-line accounting folded in."""
    records, diagnostics = parse_records(stream, strict=strict)
    trees, report = build_trees(records)
    report.malformed_lines = len(diagnostics)
    report.total_records = len(records) + len(diagnostics)
    report.diagnostics = diagnostics + report.diagnostics
    return trees, report
