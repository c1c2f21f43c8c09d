"""The CRL family: full lists, deltas, sliding-window deltas, over-issuing
schedules, segmented lists with redirect tables, and the client-side status
check over a document cache.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .core import (
    TIME_MAX,
    KeyStore,
    RevocationRecord,
    Signature,
    check_time,
    pack_opt_str,
    pack_opt_u64,
    pack_str,
    pack_u32,
    pack_u64,
)


class CrlKind(Enum):
    FULL = "full"
    DELTA = "delta"
    SEGMENT = "segment"


class CrlStatus(Enum):
    REVOKED = "revoked"
    NOT_REVOKED = "not_revoked"
    STALE_INFORMATION = "stale_information"


class ExpiredEntryError(ValueError):
    """A record for an already-expired certificate was offered for listing."""


class DeltaBaseError(ValueError):
    """A delta entry predates the referenced base issuance."""


class PartitionError(ValueError):
    """Redirect table ranges overlap, leave gaps, or do not cover a serial."""


@dataclass(frozen=True)
class CrlDocument:
    """A signed status list. Authoritative over [this_update, next_update)."""

    issuer: str
    kind: CrlKind
    this_update: int
    next_update: int
    entries: tuple[tuple[int, int], ...]  # (serial, revoked_at), strictly ascending
    signature: Signature
    window_start: Optional[int] = None
    segment_id: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.this_update < self.next_update:
            raise ValueError("this_update must precede next_update")
        serials = [s for s, _ in self.entries]
        if any(a >= b for a, b in zip(serials, serials[1:])):
            raise ValueError("entries must be strictly ascending by serial")
        if self.kind is CrlKind.DELTA and self.window_start is not None:
            if any(t < self.window_start for _, t in self.entries):
                raise ValueError("delta entry revoked before window_start")

    @cached_property
    def _payload(self) -> bytes:
        parts = [
            pack_str(self.issuer),
            pack_str(self.kind.value),
            pack_u64(self.this_update),
            pack_u64(self.next_update),
            pack_opt_u64(self.window_start),
            pack_opt_str(self.segment_id),
            pack_u32(len(self.entries)),
        ]
        parts.extend(pack_u64(s) + pack_u64(t) for s, t in self.entries)
        return b"".join(parts)

    def signed_payload(self) -> bytes:
        return self._payload

    def to_bytes(self) -> bytes:
        return self.signed_payload() + self.signature.to_bytes()

    @cached_property
    def wire_size(self) -> int:
        return len(self.to_bytes())

    def covers(self, now: int) -> bool:
        return self.this_update <= now < self.next_update

    def lists(self, serial: int) -> bool:
        lo, hi = 0, len(self.entries)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.entries[mid][0] < serial:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(self.entries) and self.entries[lo][0] == serial

    def to_json_dict(self) -> dict:
        return {
            "issuer": self.issuer,
            "kind": self.kind.value,
            "this_update": self.this_update,
            "next_update": self.next_update,
            "window_start": self.window_start,
            "segment_id": self.segment_id,
            "entries": [[s, t] for s, t in self.entries],
            "signature": {"key_id": self.signature.key_id, "mac": self.signature.mac.hex()},
        }

    @staticmethod
    def from_json_dict(d: dict) -> "CrlDocument":
        return CrlDocument(
            issuer=d["issuer"],
            kind=CrlKind(d["kind"]),
            this_update=d["this_update"],
            next_update=d["next_update"],
            window_start=d.get("window_start"),
            segment_id=d.get("segment_id"),
            entries=tuple((s, t) for s, t in d["entries"]),
            signature=Signature(d["signature"]["key_id"], bytes.fromhex(d["signature"]["mac"])),
        )


@dataclass(frozen=True)
class IssuanceSchedule:
    """How often documents are released.

    overissue_factor f staggers equally long-lived documents every
    base_period / f. A sliding window, when configured, must reach at least
    one base period back or reconstruction from deltas alone cannot be
    guaranteed.
    """

    base_period: int
    delta_period: Optional[int] = None
    overissue_factor: int = 1
    window_length: Optional[int] = None

    def __post_init__(self) -> None:
        if self.base_period <= 0:
            raise ValueError("base_period must be positive")
        if self.delta_period is not None:
            if self.delta_period <= 0 or self.base_period % self.delta_period:
                raise ValueError("delta_period must evenly divide base_period")
        if self.overissue_factor < 1:
            raise ValueError("overissue_factor must be >= 1")
        if self.base_period % self.overissue_factor:
            raise ValueError("overissue_factor must evenly divide base_period")
        if self.window_length is not None and self.window_length < self.base_period:
            raise ValueError("window_length must be at least base_period")

    @property
    def release_interval(self) -> int:
        return self.base_period // self.overissue_factor


@dataclass(frozen=True)
class RedirectTable:
    """Signed, versioned map from serial ranges to segment ids.

    Ranges are closed intervals, pairwise disjoint, and must tile the table's
    whole envelope without gaps so every serial in the managed space resolves
    to exactly one segment.
    """

    version: int
    ranges: tuple[tuple[int, int, str], ...]  # (lo, hi, segment_id)
    signature: Signature

    def __post_init__(self) -> None:
        if not self.ranges:
            raise PartitionError("redirect table has no ranges")
        ordered = sorted(self.ranges)
        for lo, hi, _ in ordered:
            if lo > hi:
                raise PartitionError(f"empty range [{lo}, {hi}]")
        for (_, hi_a, _), (lo_b, _, _) in zip(ordered, ordered[1:]):
            if lo_b <= hi_a:
                raise PartitionError("redirect table ranges overlap")
            if lo_b != hi_a + 1:
                raise PartitionError(f"gap between {hi_a} and {lo_b}")

    def signed_payload(self) -> bytes:
        parts = [pack_u32(self.version), pack_u32(len(self.ranges))]
        parts.extend(
            pack_u64(lo) + pack_u64(hi) + pack_str(seg) for lo, hi, seg in sorted(self.ranges)
        )
        return b"".join(parts)

    def to_bytes(self) -> bytes:
        return self.signed_payload() + self.signature.to_bytes()

    @cached_property
    def wire_size(self) -> int:
        return len(self.to_bytes())

    def segment_ids(self) -> list[str]:
        return sorted({seg for _, _, seg in self.ranges})


def make_redirect_table(
    version: int,
    ranges: Sequence[tuple[int, int, str]],
    keystore: KeyStore,
    key_id: str,
) -> RedirectTable:
    unsigned = RedirectTable(version=version, ranges=tuple(ranges), signature=Signature(key_id, b""))
    return RedirectTable(
        version=version,
        ranges=tuple(ranges),
        signature=keystore.sign(unsigned.signed_payload(), key_id),
    )


def resolve_segment(serial: int, table: RedirectTable) -> str:
    """The unique segment whose range contains serial; closed-interval bounds."""
    for lo, hi, seg in table.ranges:
        if lo <= serial <= hi:
            return seg
    raise PartitionError(f"serial {serial} not covered by redirect table v{table.version}")


class CrlIssuer:
    """Single-writer issuer for the CRL family under one CA key."""

    def __init__(self, keystore: KeyStore, key_id: str, schedule: IssuanceSchedule) -> None:
        self.keystore = keystore
        self.key_id = key_id
        self.schedule = schedule

    def _signed(
        self,
        kind: CrlKind,
        this_update: int,
        next_update: int,
        entries: Iterable[tuple[int, int]],
        window_start: Optional[int] = None,
        segment_id: Optional[str] = None,
    ) -> CrlDocument:
        check_time(next_update)
        doc = CrlDocument(
            issuer=self.key_id,
            kind=kind,
            this_update=this_update,
            next_update=next_update,
            window_start=window_start,
            segment_id=segment_id,
            entries=tuple(sorted(entries)),
            signature=Signature(self.key_id, b""),
        )
        sig = self.keystore.sign(doc.signed_payload(), self.key_id)
        return CrlDocument(
            issuer=doc.issuer,
            kind=doc.kind,
            this_update=doc.this_update,
            next_update=doc.next_update,
            window_start=doc.window_start,
            segment_id=doc.segment_id,
            entries=doc.entries,
            signature=sig,
        )

    def issue_full(
        self,
        revoked: Iterable[RevocationRecord],
        now: int,
        expiry: Optional[dict[int, int]] = None,
    ) -> CrlDocument:
        """Full list of all currently valid (non-expired) but revoked certificates.

        When an expiry map is supplied the not-yet-expired precondition is
        enforced; entries for expired certificates are a caller error, not
        something to silently drop.
        """
        entries = []
        for record in revoked:
            if expiry is not None and expiry.get(record.serial, TIME_MAX) <= now:
                raise ExpiredEntryError(f"serial {record.serial} expired before {now}")
            entries.append((record.serial, record.revoked_at))
        return self._signed(CrlKind.FULL, now, now + self.schedule.base_period, entries)

    def issue_delta(
        self,
        revoked_since: Iterable[RevocationRecord],
        base_ref: CrlDocument,
        now: int,
    ) -> CrlDocument:
        """Changes to a base CRL: everything revoked after the base was issued."""
        if base_ref.kind is not CrlKind.FULL:
            raise DeltaBaseError("delta must reference a full CRL")
        if self.schedule.delta_period is None:
            raise ValueError("schedule has no delta_period")
        entries = []
        for record in revoked_since:
            if record.revoked_at <= base_ref.this_update:
                raise DeltaBaseError(
                    f"record for serial {record.serial} predates base issuance"
                )
            entries.append((record.serial, record.revoked_at))
        return self._signed(
            CrlKind.DELTA,
            now,
            now + self.schedule.delta_period,
            entries,
            window_start=base_ref.this_update,
        )

    def issue_sliding_delta(
        self,
        all_records: Iterable[RevocationRecord],
        now: int,
        window_length: Optional[int] = None,
    ) -> CrlDocument:
        """Delta over a fixed trailing window: revocations in (now - W, now]."""
        window = self.schedule.window_length if window_length is None else window_length
        if window is None or window <= 0:
            raise ValueError("sliding delta requires a positive window_length")
        if self.schedule.delta_period is None:
            raise ValueError("schedule has no delta_period")
        # A window reaching past epoch 0 covers all history, bound inclusive.
        bound = now - window
        entries = [
            (r.serial, r.revoked_at)
            for r in all_records
            if (bound < r.revoked_at <= now) or (bound < 0 and r.revoked_at <= now)
        ]
        return self._signed(
            CrlKind.DELTA,
            now,
            now + self.schedule.delta_period,
            entries,
            window_start=max(0, bound),
        )

    def segment(
        self,
        records: Iterable[RevocationRecord],
        partition: RedirectTable,
        now: int,
    ) -> list[CrlDocument]:
        """One segment document per segment id; entries routed by serial range."""
        buckets: dict[str, list[tuple[int, int]]] = {seg: [] for seg in partition.segment_ids()}
        for record in records:
            seg = resolve_segment(record.serial, partition)
            buckets[seg].append((record.serial, record.revoked_at))
        return [
            self._signed(
                CrlKind.SEGMENT,
                now,
                now + self.schedule.base_period,
                buckets[seg],
                segment_id=seg,
            )
            for seg in partition.segment_ids()
        ]


def verify_document(doc: CrlDocument, keystore: KeyStore, issuer_key: str) -> bool:
    return keystore.verify(doc.signed_payload(), doc.signature, issuer_key)


def check_status(
    serial: int,
    docs: Iterable[CrlDocument],
    now: int,
    keystore: KeyStore,
    issuer_key: str,
    table: Optional[RedirectTable] = None,
) -> CrlStatus:
    """Client-side status decision over a cache of documents.

    A document with a bad signature is discarded as if absent. The answer is
    authoritative only when some base (full, or the serial's segment) plus a
    chain of deltas with contiguous windows reaches a document whose
    [this_update, next_update) covers `now`; otherwise the information is
    stale. Chaining means each delta's window_start is at or before the
    coverage point established so far, so no revocation can fall in a gap.
    """
    valid = [d for d in docs if verify_document(d, keystore, issuer_key)]

    scope_segment: Optional[str] = None
    if table is not None:
        scope_segment = resolve_segment(serial, table)

    bases = [
        d
        for d in valid
        if d.kind is CrlKind.FULL
        or (d.kind is CrlKind.SEGMENT and scope_segment is not None and d.segment_id == scope_segment)
    ]
    if not bases:
        return CrlStatus.STALE_INFORMATION
    base = max(bases, key=lambda d: d.this_update)

    deltas = sorted(
        (d for d in valid if d.kind is CrlKind.DELTA),
        key=lambda d: d.this_update,
    )
    covered_until = base.this_update
    current = base.covers(now)
    listed = base.lists(serial)
    for delta in deltas:
        start = delta.window_start if delta.window_start is not None else covered_until
        if start <= covered_until and delta.this_update >= covered_until:
            covered_until = delta.this_update
            current = current or delta.covers(now)
            listed = listed or delta.lists(serial)
    if not current:
        return CrlStatus.STALE_INFORMATION
    return CrlStatus.REVOKED if listed else CrlStatus.NOT_REVOKED


def apply_delta(base: CrlDocument, delta: CrlDocument) -> list[tuple[int, int]]:
    """Merged entry list of a base and one delta (union by serial)."""
    merged = dict(base.entries)
    merged.update(dict(delta.entries))
    return sorted(merged.items())
