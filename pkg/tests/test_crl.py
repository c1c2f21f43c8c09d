"""CRL family: issuance, deltas, sliding windows, segments, status checks."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revokebench.core import DAY, HOUR, KeyStore, RevocationRecord
from revokebench.crl import (
    CrlDocument,
    CrlIssuer,
    CrlKind,
    CrlStatus,
    DeltaBaseError,
    ExpiredEntryError,
    IssuanceSchedule,
    PartitionError,
    apply_delta,
    check_status,
    make_redirect_table,
    resolve_segment,
    verify_document,
)


def make_issuer(keystore, **kwargs):
    kwargs.setdefault("base_period", DAY)
    return CrlIssuer(keystore, "ca", IssuanceSchedule(**kwargs))


def records_of(*pairs):
    return [RevocationRecord(serial=s, revoked_at=t) for s, t in pairs]


class TestIssueFull:
    def test_empty(self, keystore):
        doc = make_issuer(keystore).issue_full([], 0)
        assert doc.kind is CrlKind.FULL
        assert doc.entries == ()
        assert verify_document(doc, keystore, "ca")

    def test_direct_construction(self, keystore):
        doc = make_issuer(keystore).issue_full(records_of((3, 0), (7, 0)), 0)
        assert [s for s, _ in doc.entries] == [3, 7]
        assert doc.next_update == 86400

    def test_thousand_records_match_brute_force(self, keystore, rng):
        now = 1_000_000
        expiry = {}
        raw = []
        for serial in range(1, 1001):
            expiry[serial] = rng.randrange(1, 2 * now)
            raw.append(RevocationRecord(serial=serial, revoked_at=rng.randrange(now)))
        survivors = [r for r in raw if expiry[r.serial] > now]  # oracle: linear scan
        doc = make_issuer(keystore).issue_full(survivors, now, expiry=expiry)
        assert sorted(s for s, _ in doc.entries) == sorted(r.serial for r in survivors)

    def test_expired_entry_is_an_error(self, keystore):
        issuer = make_issuer(keystore)
        with pytest.raises(ExpiredEntryError):
            issuer.issue_full(records_of((3, 0)), 100, expiry={3: 50})


class TestIssueDelta:
    def test_empty_delta_still_signed(self, keystore):
        issuer = make_issuer(keystore, delta_period=HOUR)
        base = issuer.issue_full([], 0)
        delta = issuer.issue_delta([], base, 100)
        assert delta.kind is CrlKind.DELTA
        assert delta.entries == ()
        assert verify_document(delta, keystore, "ca")

    def test_window_start_is_base_issuance(self, keystore):
        issuer = make_issuer(keystore, delta_period=HOUR)
        base = issuer.issue_full([], 0)
        delta = issuer.issue_delta(records_of((1, 100), (2, 200)), base, 300)
        assert delta.window_start == 0
        assert [s for s, _ in delta.entries] == [1, 2]

    def test_record_predating_base_rejected(self, keystore):
        issuer = make_issuer(keystore, delta_period=HOUR)
        base = issuer.issue_full([], 500)
        with pytest.raises(DeltaBaseError):
            issuer.issue_delta(records_of((1, 400)), base, 600)

    def test_delta_on_delta_rejected(self, keystore):
        issuer = make_issuer(keystore, delta_period=HOUR)
        base = issuer.issue_full([], 0)
        delta = issuer.issue_delta([], base, 100)
        with pytest.raises(DeltaBaseError):
            issuer.issue_delta([], delta, 200)

    def test_apply_equals_full_reissue(self, keystore, rng):
        """Oracle: recompute the full list from all records at delta time."""
        issuer = make_issuer(keystore, delta_period=HOUR)
        early = records_of(*[(s, rng.randrange(1000)) for s in range(1, 30)])
        base = issuer.issue_full(early, 1000)
        late = records_of(*[(s, 1001 + rng.randrange(1000)) for s in range(30, 50)])
        delta = issuer.issue_delta(late, base, 2500)
        merged = apply_delta(base, delta)
        full = issuer.issue_full(early + late, 2500)
        assert merged == list(full.entries)


class TestSlidingDelta:
    def test_window_covering_history_equals_full_list(self, keystore):
        issuer = make_issuer(keystore, delta_period=HOUR, window_length=10 * DAY)
        recs = records_of((1, 0), (2, 500), (3, 900))
        doc = issuer.issue_sliding_delta(recs, 1000)
        assert [s for s, _ in doc.entries] == [1, 2, 3]

    def test_window_boundaries(self, keystore):
        issuer = make_issuer(keystore, base_period=100, delta_period=50, window_length=100)
        recs = records_of((1, 899), (2, 900), (3, 1000), (4, 1001))
        doc = issuer.issue_sliding_delta(recs, 1000)
        # (now - W, now] is half-open at the old end
        assert [s for s, _ in doc.entries] == [3]
        assert doc.window_start == 900

    def test_random_stream_matches_time_filter(self, keystore, rng):
        issuer = make_issuer(keystore, delta_period=HOUR, window_length=3 * DAY)
        recs = records_of(*[(s, rng.randrange(30 * DAY)) for s in range(1, 500)])
        now = 20 * DAY
        doc = issuer.issue_sliding_delta(recs, now)
        oracle = sorted(r.serial for r in recs if now - 3 * DAY < r.revoked_at <= now)
        assert [s for s, _ in doc.entries] == oracle


class TestCheckStatus:
    def test_membership_on_current_full(self, keystore):
        issuer = make_issuer(keystore)
        doc = issuer.issue_full(records_of((7, 10)), 100)
        assert check_status(7, [doc], 200, keystore, "ca") is CrlStatus.REVOKED
        assert check_status(8, [doc], 200, keystore, "ca") is CrlStatus.NOT_REVOKED

    def test_empty_cache_is_stale(self, keystore):
        assert check_status(7, [], 0, keystore, "ca") is CrlStatus.STALE_INFORMATION

    def test_expired_doc_is_stale(self, keystore):
        issuer = make_issuer(keystore)
        doc = issuer.issue_full([], 0)
        assert check_status(7, [doc], DAY, keystore, "ca") is CrlStatus.STALE_INFORMATION

    def test_tampered_doc_discarded(self, keystore):
        issuer = make_issuer(keystore)
        good = issuer.issue_full(records_of((7, 10)), 100)
        bad = CrlDocument(
            issuer=good.issuer,
            kind=good.kind,
            this_update=good.this_update,
            next_update=good.next_update,
            entries=((8, 10),),  # entry swapped after signing
            signature=good.signature,
        )
        assert check_status(8, [bad], 200, keystore, "ca") is CrlStatus.STALE_INFORMATION

    def test_base_plus_current_delta_covers(self, keystore):
        issuer = make_issuer(keystore, base_period=1000, delta_period=100)
        base = issuer.issue_full([], 0)
        delta = issuer.issue_delta(records_of((9, 1500)), base, 1500)
        # base expired at 1000, but the chained current delta keeps coverage
        assert check_status(9, [base, delta], 1550, keystore, "ca") is CrlStatus.REVOKED
        assert check_status(4, [base, delta], 1550, keystore, "ca") is CrlStatus.NOT_REVOKED

    def test_chain_gap_is_stale(self, keystore):
        issuer = make_issuer(keystore, base_period=100, delta_period=50, window_length=100)
        base = issuer.issue_full([], 0)
        # window (100, 200] does not reach back to the base issued at 0
        orphan = issuer.issue_sliding_delta([], 200)
        assert check_status(1, [base, orphan], 210, keystore, "ca") is CrlStatus.STALE_INFORMATION

    def test_segment_scope_respected(self, keystore):
        """A segment document only answers for serials its range covers."""
        issuer = make_issuer(keystore)
        table = make_redirect_table(1, [(0, 99, "A"), (100, 999, "B")], keystore, "ca")
        docs = issuer.segment(records_of((3, 0), (300, 0)), table, 0)
        doc_a = next(d for d in docs if d.segment_id == "A")
        status = check_status(300, [doc_a], 50, keystore, "ca", table=table)
        assert status is CrlStatus.STALE_INFORMATION  # wrong segment: no basis
        doc_b = next(d for d in docs if d.segment_id == "B")
        assert check_status(300, [doc_b], 50, keystore, "ca", table=table) is CrlStatus.REVOKED
        assert check_status(150, [doc_b], 50, keystore, "ca", table=table) is CrlStatus.NOT_REVOKED

    def test_71h_gaps_never_need_second_base(self, keystore):
        """Client consulting at least every 71h under a 72h window keeps full
        coverage from its first base forever."""
        issuer = make_issuer(keystore, base_period=DAY, delta_period=15 * 60, window_length=72 * HOUR)
        all_records = records_of(*[(s, s * 7919 % (30 * DAY)) for s in range(1, 200)])
        cache = [issuer.issue_full([r for r in all_records if r.revoked_at <= 0], 0)]
        t = 0
        for _ in range(10):
            t += 71 * HOUR
            tick = (t // (15 * 60)) * (15 * 60)
            current = [r for r in all_records if r.revoked_at <= tick]
            cache.append(issuer.issue_sliding_delta(current, tick))
            status = check_status(1, cache, t, keystore, "ca")
            assert status is not CrlStatus.STALE_INFORMATION


class TestSegments:
    def test_degenerate_partition_matches_full(self, keystore):
        issuer = make_issuer(keystore)
        table = make_redirect_table(1, [(0, 2**64 - 2, "all")], keystore, "ca")
        recs = records_of((3, 0), (300, 0))
        [seg] = issuer.segment(recs, table, 0)
        full = issuer.issue_full(recs, 0)
        assert seg.entries == full.entries

    def test_direct_routing(self, keystore):
        issuer = make_issuer(keystore)
        table = make_redirect_table(1, [(0, 99, "A"), (100, 999, "B")], keystore, "ca")
        docs = {d.segment_id: d for d in issuer.segment(records_of((3, 0), (300, 0)), table, 0)}
        assert [s for s, _ in docs["A"].entries] == [3]
        assert [s for s, _ in docs["B"].entries] == [300]

    def test_random_partition_matches_range_filter(self, keystore, rng):
        issuer = make_issuer(keystore)
        bounds = sorted(rng.sample(range(1, 10_000), 7))
        ranges = []
        lo = 0
        for i, b in enumerate(bounds):
            ranges.append((lo, b, f"s{i}"))
            lo = b + 1
        ranges.append((lo, 10_000, "s7"))
        table = make_redirect_table(1, ranges, keystore, "ca")
        recs = records_of(*[(rng.randrange(1, 10_000), 0) for _ in range(500)])
        recs = list({r.serial: r for r in recs}.values())
        docs = {d.segment_id: d for d in issuer.segment(recs, table, 0)}
        for lo_r, hi_r, seg in ranges:  # oracle: per-range linear filter
            expected = sorted(r.serial for r in recs if lo_r <= r.serial <= hi_r)
            assert [s for s, _ in docs[seg].entries] == expected
        all_entries = sorted(s for d in docs.values() for s, _ in d.entries)
        assert all_entries == sorted(r.serial for r in recs)

    def test_partition_gap_rejected(self, keystore):
        with pytest.raises(PartitionError):
            make_redirect_table(1, [(0, 99, "A"), (101, 999, "B")], keystore, "ca")

    def test_partition_overlap_rejected(self, keystore):
        with pytest.raises(PartitionError):
            make_redirect_table(1, [(0, 100, "A"), (100, 999, "B")], keystore, "ca")


class TestResolveSegment:
    def test_boundary_serial_belongs_to_its_range(self, keystore):
        table = make_redirect_table(1, [(0, 99, "A"), (100, 999, "B")], keystore, "ca")
        assert resolve_segment(99, table) == "A"
        assert resolve_segment(100, table) == "B"

    def test_repartition_re_resolves(self, keystore):
        v1 = make_redirect_table(1, [(0, 999, "hot")], keystore, "ca")
        v2 = make_redirect_table(2, [(0, 499, "left"), (500, 999, "right")], keystore, "ca")
        assert resolve_segment(700, v1) == "hot"
        assert resolve_segment(700, v2) == "right"

    def test_uncovered_serial_rejected(self, keystore):
        table = make_redirect_table(1, [(0, 99, "A")], keystore, "ca")
        with pytest.raises(PartitionError):
            resolve_segment(100, table)

    def test_random_tables_match_linear_scan(self, keystore, rng):
        for _ in range(20):
            bounds = sorted(rng.sample(range(1, 5000), rng.randrange(1, 6)))
            ranges, lo = [], 0
            for i, b in enumerate(bounds):
                ranges.append((lo, b, f"s{i}"))
                lo = b + 1
            ranges.append((lo, 5000, "last"))
            table = make_redirect_table(1, ranges, keystore, "ca")
            for _ in range(50):
                serial = rng.randrange(5001)
                expected = next(seg for lo_r, hi_r, seg in ranges if lo_r <= serial <= hi_r)
                assert resolve_segment(serial, table) == expected


class TestProperties:
    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000), sliding=st.booleans())
    def test_reconstruction_equals_single_full(self, seed, sliding):
        """Status from (base + deltas) equals status from one fresh full CRL."""
        r = random.Random(seed)
        keystore = KeyStore()
        keystore.generate("ca", random.Random(1))
        issuer = make_issuer(
            keystore, base_period=1000, delta_period=250, window_length=1000
        )
        records = [
            RevocationRecord(serial=s, revoked_at=r.randrange(1, 2400))
            for s in r.sample(range(1, 100), 40)
        ]
        def upto(t):
            return [rec for rec in records if rec.revoked_at <= t]

        base = issuer.issue_full(upto(0), 0)
        docs = [base]
        for t in (250, 500, 750, 1000, 1250, 1500, 1750, 2000, 2250):
            if sliding:
                docs.append(issuer.issue_sliding_delta(upto(t), t))
            else:
                if t % 1000 == 0:
                    base = issuer.issue_full(upto(t), t)
                    docs.append(base)
                else:
                    since = [rec for rec in upto(t) if rec.revoked_at > base.this_update]
                    docs.append(issuer.issue_delta(since, base, t))
        # The reference full list is issued at the same instant as the last
        # delta, so both sides share the same knowledge horizon.
        reference = issuer.issue_full(upto(2250), 2250)
        now = 2400
        for serial in range(1, 100):
            via_docs = check_status(serial, docs, now, keystore, "ca")
            via_full = check_status(serial, [reference], now, keystore, "ca")
            assert via_docs == via_full

    def test_tamper_evidence_on_every_entry(self, keystore, rng):
        issuer = make_issuer(keystore)
        recs = records_of(*[(s, rng.randrange(100)) for s in range(1, 20)])
        doc = issuer.issue_full(recs, 100)
        for i in range(len(doc.entries)):
            entries = list(doc.entries)
            serial, at = entries[i]
            entries[i] = (serial + 5000, at)
            mutated = CrlDocument(
                issuer=doc.issuer,
                kind=doc.kind,
                this_update=doc.this_update,
                next_update=doc.next_update,
                entries=tuple(sorted(entries)),
                signature=doc.signature,
            )
            assert not verify_document(mutated, keystore, "ca")

    def test_json_round_trip(self, keystore):
        issuer = make_issuer(keystore, delta_period=HOUR, window_length=DAY)
        doc = issuer.issue_sliding_delta(records_of((5, 3000)), 3600)
        again = CrlDocument.from_json_dict(doc.to_json_dict())
        assert again == doc
        assert again.to_bytes() == doc.to_bytes()


def test_schedule_validation():
    with pytest.raises(ValueError):
        IssuanceSchedule(base_period=100, delta_period=33)
    with pytest.raises(ValueError):
        IssuanceSchedule(base_period=100, overissue_factor=0)
    with pytest.raises(ValueError):
        IssuanceSchedule(base_period=100, window_length=50)  # window below base
    s = IssuanceSchedule(base_period=100, overissue_factor=4)
    assert s.release_interval == 25
