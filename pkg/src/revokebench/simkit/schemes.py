"""Scheme adapters: thin glue between the event loop and the scheme modules.

Each adapter owns the CA-side publishing schedule, the directory's stored
artifacts, and the per-client cache policy for one scheme. All status logic
is delegated to the scheme modules' public operations; the adapter only
moves bytes, counts them, and caches.
"""

from __future__ import annotations

from typing import Optional

from .. import crs as crs_mod
from .. import crt as crt_mod
from .. import responder as resp_mod
from .. import wcr as wcr_mod
from ..core import CrsAnchor
from ..crl import (
    CrlDocument,
    CrlIssuer,
    CrlKind,
    CrlStatus,
    IssuanceSchedule,
    check_status,
    make_redirect_table,
    resolve_segment,
)
from .config import Scheme

REQUEST_BYTES = 16  # serial + timestamp framing for any directory/CA query
FRESH_STATUS_BYTES = 9  # status tag + framing around a fresh certificate


class SchemeAdapter:
    name = "base"

    def __init__(self, sim) -> None:
        self.sim = sim
        self.config = sim.config
        self.ledger = sim.ledger
        self.keystore = sim.keystore
        self.metrics = sim.metrics
        self.ca_key = sim.ca_key

    # -- engine hooks --------------------------------------------------------

    def publish_events(self) -> list[tuple[int, str]]:
        return []

    def anchor_for(self, serial: int, now: int) -> Optional[CrsAnchor]:
        return None

    def on_issue(self, serial: int, now: int) -> None:
        pass

    def on_revoke(self, serial: int, now: int) -> None:
        pass

    def on_publish(self, now: int, tag: str) -> None:
        pass

    def on_fetch(self, client: int, now: int) -> None:
        pass

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        raise NotImplementedError

    # -- transport helpers ----------------------------------------------------

    def ca_push(self, nbytes: int) -> None:
        self.metrics.note_sent("ca_to_directory", nbytes)
        self.metrics.note_received("ca_to_directory", nbytes)
        self.sim.overlay_push(nbytes)

    def dir_fetch(self, now: int, nbytes: int) -> None:
        """One client request to the directory answered with nbytes."""
        self.metrics.note_request(now)
        self.metrics.note_sent("client_to_directory", REQUEST_BYTES)
        self.metrics.note_received("client_to_directory", REQUEST_BYTES)
        self.metrics.note_sent("directory_to_client", nbytes)
        self.metrics.note_received("directory_to_client", nbytes)

    def fresh_fetch(self, serial: int, now: int) -> wcr_mod.FreshFetch:
        """Authoritative certificate/status query answered and signed by the CA."""
        cert = self.ledger.certificates[serial]
        nbytes = cert.wire_size + FRESH_STATUS_BYTES
        self.metrics.note_sent("client_to_ca", REQUEST_BYTES)
        self.metrics.note_received("client_to_ca", REQUEST_BYTES)
        self.metrics.note_sent("ca_to_client", nbytes)
        self.metrics.note_received("ca_to_client", nbytes)
        self.metrics.note_sign("ca_sign")
        self.metrics.note_sign("client_verify")
        revoked = self.ledger.is_revoked(serial, now)
        return wcr_mod.FreshFetch(
            revoked=revoked,
            certificate=None if revoked else cert,
            nbytes=nbytes,
        )

    def log_actions(self, client: int, actions) -> None:
        if self.sim.action_log is not None:
            for t, serial, action, nbytes in actions:
                self.sim.action_log.append(f"{t},{client},{serial},{action},{nbytes}")


def _base_grid(horizon: int, period: int) -> list[tuple[int, str]]:
    return [(t, "base") for t in range(0, horizon, period)]


# ---------------------------------------------------------------------------
# CRL family
# ---------------------------------------------------------------------------

class FullCrlAdapter(SchemeAdapter):
    name = "full_crl"

    def __init__(self, sim) -> None:
        super().__init__(sim)
        self.issuer = CrlIssuer(
            self.keystore,
            self.ca_key,
            IssuanceSchedule(
                base_period=self.config.base_period,
                overissue_factor=self.config.overissue_factor,
            ),
        )
        self.current: Optional[CrlDocument] = None
        self.cache: dict[int, CrlDocument] = {}

    def publish_events(self) -> list[tuple[int, str]]:
        step = self.config.base_period // self.config.overissue_factor
        return [(t, "base") for t in range(0, self.config.horizon, step)]

    def on_publish(self, now: int, tag: str) -> None:
        doc = self.issuer.issue_full(self.ledger.revoked_non_expired(now), now)
        self.current = doc
        self.metrics.note_sign("ca_sign")
        self.metrics.note_publication("full_crl")
        self.ca_push(doc.wire_size)

    def _fetch(self, client: int, now: int) -> int:
        doc = self.current
        self.dir_fetch(now, doc.wire_size)
        self.metrics.note_sign("client_verify")
        self.cache[client] = doc
        self.metrics.base_crl_fetches += 1
        return doc.wire_size

    def on_fetch(self, client: int, now: int) -> None:
        if self.current is not None:  # nothing published yet -> nothing to prefetch
            self._fetch(client, now)

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        d2c = 0
        cached = self.cache.get(client)
        docs = [cached] if cached is not None else []
        status = check_status(serial, docs, now, self.keystore, self.ca_key)
        if status is CrlStatus.STALE_INFORMATION:
            d2c += self._fetch(client, now)
            status = check_status(serial, [self.cache[client]], now, self.keystore, self.ca_key)
        return status is not CrlStatus.REVOKED, d2c


class DeltaCrlAdapter(SchemeAdapter):
    name = "delta_crl"

    def __init__(self, sim) -> None:
        super().__init__(sim)
        self.issuer = CrlIssuer(
            self.keystore,
            self.ca_key,
            IssuanceSchedule(
                base_period=self.config.base_period,
                delta_period=self.config.delta_period,
            ),
        )
        self.base: Optional[CrlDocument] = None
        self.delta: Optional[CrlDocument] = None
        self.cache: dict[int, dict[str, Optional[CrlDocument]]] = {}

    def publish_events(self) -> list[tuple[int, str]]:
        events = _base_grid(self.config.horizon, self.config.base_period)
        on_grid = {
            t
            for t in range(0, self.config.horizon, self.config.delta_period)
            if t % self.config.base_period
        }
        # irregular freshest-delta releases ride on top of the regular grid
        on_grid.update(t for t in self.config.extra_delta_times if 0 < t < self.config.horizon)
        events.extend((t, "delta") for t in sorted(on_grid))
        return events

    def on_publish(self, now: int, tag: str) -> None:
        if tag == "base":
            self.base = self.issuer.issue_full(self.ledger.revoked_non_expired(now), now)
            self.delta = None
            doc = self.base
            self.metrics.note_publication("base_crl")
        else:
            since = [
                r
                for r in self.ledger.revoked_non_expired(now)
                if r.revoked_at > self.base.this_update
            ]
            self.delta = self.issuer.issue_delta(since, self.base, now)
            doc = self.delta
            self.metrics.note_publication("delta_crl")
        self.metrics.note_sign("ca_sign")
        self.ca_push(doc.wire_size)

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        slot = self.cache.setdefault(client, {"base": None, "delta": None})
        d2c = 0

        def docs() -> list[CrlDocument]:
            return [d for d in (slot["base"], slot["delta"]) if d is not None]

        status = check_status(serial, docs(), now, self.keystore, self.ca_key)
        if status is CrlStatus.STALE_INFORMATION and self.delta is not None:
            slot["delta"] = self.delta
            self.dir_fetch(now, self.delta.wire_size)
            self.metrics.note_sign("client_verify")
            d2c += self.delta.wire_size
            status = check_status(serial, docs(), now, self.keystore, self.ca_key)
        if status is CrlStatus.STALE_INFORMATION:
            slot["base"] = self.base
            self.dir_fetch(now, self.base.wire_size)
            self.metrics.note_sign("client_verify")
            self.metrics.base_crl_fetches += 1
            d2c += self.base.wire_size
            status = check_status(serial, docs(), now, self.keystore, self.ca_key)
        return status is not CrlStatus.REVOKED, d2c


class _SlidingClient:
    """Accumulated sliding-delta knowledge: a watermark plus merged entries.

    Semantically identical to crl.check_status over every document the client
    has ever fetched (the module tests pin that equivalence); keeping the
    merged view bounds client memory by the revoked population instead of the
    fetch count. covered_until is the knowledge watermark; current_until is
    the furthest next_update among the base and the deltas chained onto it,
    since an older base can outlive newer short-period deltas.
    """

    __slots__ = ("base_seen", "covered_until", "current_until", "known")

    def __init__(self) -> None:
        self.base_seen = False
        self.covered_until = 0
        self.current_until = 0
        self.known: dict[int, int] = {}

    def accept(self, doc: CrlDocument) -> bool:
        if doc.kind is CrlKind.FULL:
            self.known.update(dict(doc.entries))
            self.base_seen = True
            self.covered_until = max(self.covered_until, doc.this_update)
            self.current_until = max(self.current_until, doc.next_update)
            return True
        if not self.base_seen:
            return False
        start = doc.window_start if doc.window_start is not None else doc.this_update
        if start > self.covered_until:
            return False  # a gap: some revocation may have scrolled out of the window
        self.known.update(dict(doc.entries))
        if doc.this_update >= self.covered_until:
            self.covered_until = doc.this_update
            self.current_until = max(self.current_until, doc.next_update)
        return True

    def status(self, serial: int, now: int) -> CrlStatus:
        if not self.base_seen or not now < self.current_until:
            return CrlStatus.STALE_INFORMATION
        return CrlStatus.REVOKED if serial in self.known else CrlStatus.NOT_REVOKED


class SlidingDeltaAdapter(SchemeAdapter):
    name = "sliding_delta"

    def __init__(self, sim) -> None:
        super().__init__(sim)
        self.issuer = CrlIssuer(
            self.keystore,
            self.ca_key,
            IssuanceSchedule(
                base_period=self.config.base_period,
                delta_period=self.config.delta_period,
                window_length=self.config.window_length,
            ),
        )
        self.base: Optional[CrlDocument] = None
        self.delta: Optional[CrlDocument] = None
        self.clients: dict[int, _SlidingClient] = {}

    def publish_events(self) -> list[tuple[int, str]]:
        # Sliding deltas are decoupled from bases: one goes out every delta
        # tick, base times included, so the latest delta always covers `now`.
        events = _base_grid(self.config.horizon, self.config.base_period)
        ticks = set(range(0, self.config.horizon, self.config.delta_period))
        ticks.update(t for t in self.config.extra_delta_times if 0 < t < self.config.horizon)
        events.extend((t, "delta") for t in sorted(ticks))
        return events

    def on_publish(self, now: int, tag: str) -> None:
        records = self.ledger.revoked_non_expired(now)
        if tag == "base":
            self.base = self.issuer.issue_full(records, now)
            doc = self.base
            self.metrics.note_publication("base_crl")
        else:
            self.delta = self.issuer.issue_sliding_delta(records, now)
            doc = self.delta
            self.metrics.note_publication("sliding_delta")
        self.metrics.note_sign("ca_sign")
        self.ca_push(doc.wire_size)

    def _serve(self, doc: CrlDocument, now: int) -> int:
        self.dir_fetch(now, doc.wire_size)
        self.metrics.note_sign("client_verify")
        if doc.kind is CrlKind.FULL:
            self.metrics.base_crl_fetches += 1
        return doc.wire_size

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        state = self.clients.setdefault(client, _SlidingClient())
        d2c = 0
        status = state.status(serial, now)
        if status is CrlStatus.STALE_INFORMATION:
            delta = self.delta if self.delta is not None and self.delta.covers(now) else None
            if delta is not None:
                d2c += self._serve(delta, now)
                state.accept(delta)
            status = state.status(serial, now)
            if status is CrlStatus.STALE_INFORMATION:
                d2c += self._serve(self.base, now)
                state.accept(self.base)
                if delta is not None:
                    state.accept(delta)  # fetched above; chains onto the new base
                status = state.status(serial, now)
        return status is not CrlStatus.REVOKED, d2c


class SegmentedAdapter(SchemeAdapter):
    name = "segmented"

    def __init__(self, sim) -> None:
        super().__init__(sim)
        self.issuer = CrlIssuer(
            self.keystore,
            self.ca_key,
            IssuanceSchedule(base_period=self.config.base_period),
        )
        self.table = make_redirect_table(
            1, self._ranges(), self.keystore, self.ca_key
        )
        self.segdocs: dict[str, CrlDocument] = {}
        self.cache: dict[int, dict[str, CrlDocument]] = {}
        self.has_table: set[int] = set()

    def _ranges(self) -> list[tuple[int, int, str]]:
        n = self.config.segments
        # The envelope spans every serial the CA could allocate this run.
        span = max(2 * self.config.population + 2, n + 1)
        width = -(-span // n)
        ranges = []
        lo = 0
        for i in range(n):
            hi = 2**64 - 2 if i == n - 1 else lo + width - 1
            ranges.append((lo, hi, f"seg{i:03d}"))
            lo = hi + 1
        return ranges

    def publish_events(self) -> list[tuple[int, str]]:
        return _base_grid(self.config.horizon, self.config.base_period)

    def on_publish(self, now: int, tag: str) -> None:
        docs = self.issuer.segment(self.ledger.revoked_non_expired(now), self.table, now)
        self.segdocs = {d.segment_id: d for d in docs}
        self.metrics.note_sign("ca_sign", len(docs))
        self.metrics.note_publication("segment_crl", len(docs))
        self.ca_push(sum(d.wire_size for d in docs))
        if now == 0:
            self.ca_push(self.table.wire_size)
            self.metrics.note_publication("redirect_table")

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        d2c = 0
        if client not in self.has_table:
            self.dir_fetch(now, self.table.wire_size)
            self.metrics.note_sign("client_verify")
            d2c += self.table.wire_size
            self.has_table.add(client)
        seg = resolve_segment(serial, self.table)
        slot = self.cache.setdefault(client, {})
        doc = slot.get(seg)
        docs = [doc] if doc is not None else []
        status = check_status(serial, docs, now, self.keystore, self.ca_key, table=self.table)
        if status is CrlStatus.STALE_INFORMATION:
            doc = self.segdocs[seg]
            self.dir_fetch(now, doc.wire_size)
            self.metrics.note_sign("client_verify")
            d2c += doc.wire_size
            slot[seg] = doc
            status = check_status(serial, [doc], now, self.keystore, self.ca_key, table=self.table)
        return status is not CrlStatus.REVOKED, d2c


# ---------------------------------------------------------------------------
# CRS
# ---------------------------------------------------------------------------

class CrsAdapter(SchemeAdapter):
    name = "crs"

    def __init__(self, sim) -> None:
        super().__init__(sim)
        self.authority = crs_mod.CrsAuthority(sim.f_ca)
        self.period = self.config.crs_period
        self.lifetime = self.config.crs_lifetime_periods
        self.issue_grid: dict[int, int] = {}
        self.live: list[int] = []
        self.tokens: dict[int, crs_mod.CrsToken] = {}
        self.directory_period = -1
        self.token_bytes = crs_mod.token_wire_size(sim.f_ca)
        self.cache: dict[int, dict[int, tuple[crs_mod.CrsToken, int]]] = {}

    def anchor_for(self, serial: int, now: int) -> Optional[CrsAnchor]:
        anchor, _ = self.authority.setup(serial, self.lifetime, self.period, self.sim.rng_scheme)
        self.issue_grid[serial] = now // self.period
        self.live.append(serial)
        return anchor

    def on_revoke(self, serial: int, now: int) -> None:
        self.authority.revoke(serial)

    def publish_events(self) -> list[tuple[int, str]]:
        return [(t, "tokens") for t in range(self.period, self.config.horizon, self.period)]

    def on_publish(self, now: int, tag: str) -> None:
        grid = now // self.period
        periods = {}
        for serial in self.live:
            p = grid - self.issue_grid[serial]
            if 1 <= p <= self.lifetime:
                periods[serial] = p
        tokens = self.authority.publish_update(periods)
        self.tokens = {t.serial: t for t in tokens}
        self.directory_period = grid
        self.metrics.note_publication("crs_update")
        self.ca_push(len(tokens) * self.token_bytes)

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        grid = now // self.period
        claimed = grid - self.issue_grid[serial]
        if claimed == 0:
            # The anchor inside the certificate is the period-0 statement.
            return True, 0
        d2c = 0
        slot = self.cache.setdefault(client, {})
        hit = slot.get(serial)
        if hit is None or hit[1] != grid:
            token = self.tokens[serial]
            self.dir_fetch(now, self.token_bytes)
            d2c += self.token_bytes
            slot[serial] = (token, grid)
        else:
            token = hit[0]
        anchor = self.ledger.certificates[serial].crs_anchor
        result = crs_mod.crs_verify(token, anchor, claimed, self.sim.f_client)
        if result is crs_mod.CrsStatus.REVOKED:
            return False, d2c
        if result is crs_mod.CrsStatus.VALID_AT_PERIOD:
            return True, d2c
        raise AssertionError(f"genuine token failed verification for serial {serial}")


# ---------------------------------------------------------------------------
# CRT
# ---------------------------------------------------------------------------

class CrtAdapter(SchemeAdapter):
    name = "crt"

    def __init__(self, sim) -> None:
        super().__init__(sim)
        self.tree: Optional[crt_mod.CrtTree] = None
        self.cache: dict[int, dict[int, crt_mod.CrtProof]] = {}

    def publish_events(self) -> list[tuple[int, str]]:
        return _base_grid(self.config.horizon, self.config.base_period)

    def on_publish(self, now: int, tag: str) -> None:
        revoked = [r.serial for r in self.ledger.revoked_non_expired(now)]
        root_block = 32 + 8 + 8 + 40
        if self.tree is None:
            self.tree = crt_mod.crt_build(
                revoked, now, self.config.base_period, self.keystore, self.ca_key
            )
            nodes = sum(len(level) for level in self.tree.levels[1:])
            self.metrics.note_hash("ca_tree", nodes + len(self.tree.leaves))
            pushed = len(self.tree.leaves) * 16 + nodes * 32 + root_block
        else:
            have = set(self.tree.serials)
            want = set(revoked)
            self.tree, stats = crt_mod.crt_update(
                self.tree,
                sorted(want - have),
                sorted(have - want),
                now,
                self.config.base_period,
                self.keystore,
                self.ca_key,
            )
            self.metrics.crt_recomputed_hashes += stats.recomputed_internal
            self.metrics.note_hash("ca_tree", stats.recomputed_internal + stats.recomputed_leaves)
            pushed = stats.recomputed_leaves * 16 + stats.recomputed_internal * 32 + root_block
        self.metrics.note_sign("ca_sign")
        self.metrics.note_publication("crt_root")
        self.ca_push(pushed)

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        d2c = 0
        slot = self.cache.setdefault(client, {})
        proof = slot.get(serial)
        if proof is None or now >= proof.signed_root.next_update:
            proof = crt_mod.crt_prove(self.tree, serial)
            self.dir_fetch(now, proof.wire_size)
            d2c += proof.wire_size
            slot[serial] = proof
        verdict = crt_mod.crt_verify(proof, serial, self.keystore, self.ca_key, now)
        self.metrics.note_sign("client_verify")
        self.metrics.note_hash("client_tree", len(proof.siblings) + 1)
        if verdict is crt_mod.CrtVerdict.REVOKED:
            return False, d2c
        if verdict is crt_mod.CrtVerdict.VALID:
            return True, d2c
        raise AssertionError(f"genuine proof failed verification for serial {serial}")


# ---------------------------------------------------------------------------
# WCR and its comparison baselines
# ---------------------------------------------------------------------------

class _WcrServices:
    """Per-client service endpoints backed by the simulated directory and CA."""

    def __init__(self, adapter: "WcrAdapter") -> None:
        self.adapter = adapter
        self.cached: Optional[CrlDocument] = None

    def fetch_fresh_certificate(self, serial: int, now: int) -> wcr_mod.FreshFetch:
        return self.adapter.fresh_fetch(serial, now)

    def fetch_latest_crl(self, now: int) -> wcr_mod.CrlFetch:
        if self.cached is not None and self.cached.covers(now):
            return wcr_mod.CrlFetch(doc=self.cached, nbytes=0)
        doc = self.adapter.current
        self.cached = doc
        self.adapter.dir_fetch(now, doc.wire_size)
        self.adapter.metrics.note_sign("client_verify")
        self.adapter.metrics.base_crl_fetches += 1
        return wcr_mod.CrlFetch(doc=doc, nbytes=doc.wire_size)


class WcrAdapter(SchemeAdapter):
    name = "wcr"

    def __init__(self, sim) -> None:
        super().__init__(sim)
        self.issuer = wcr_mod.WcrIssuer(
            self.keystore,
            self.ca_key,
            self.config.base_period,
            wcr_mod.WcrIssuerConfig(self.config.wcr_window_size),
        )
        self.client_config = wcr_mod.WcrClientConfig(
            clean_duration=self.config.wcr_clean_duration,
            crl_period=self.config.base_period,
            window_size=self.config.wcr_window_size,
        )
        self.current: Optional[CrlDocument] = None
        self.services: dict[int, _WcrServices] = {}
        self.states: dict[tuple[int, int], wcr_mod.WcrClientState] = {}

    def publish_events(self) -> list[tuple[int, str]]:
        return _base_grid(self.config.horizon, self.config.base_period)

    def on_publish(self, now: int, tag: str) -> None:
        self.current = self.issuer.issue(
            self.ledger.revocations.values(), now // self.config.base_period, now
        )
        self.metrics.note_sign("ca_sign")
        self.metrics.note_publication("wcr_crl")
        self.ca_push(self.current.wire_size)

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        services = self.services.setdefault(client, _WcrServices(self))
        state = self.states.get(
            (client, serial), wcr_mod.WcrClientState(serial=serial)
        )
        decision, new_state, actions = wcr_mod.wcr_validate(
            state, now, services, self.client_config
        )
        self.states[(client, serial)] = new_state
        self.log_actions(client, actions)
        d2c = sum(n for _, _, act, n in actions if act == wcr_mod.ACT_CRL)
        return decision is wcr_mod.WcrDecision.USE, d2c


class AlwaysFreshAdapter(SchemeAdapter):
    """Baseline: only fresh certificates are ever used; nothing is published."""

    name = "always_fresh"

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        fresh = self.fresh_fetch(serial, now)
        actions = [(now, serial, wcr_mod.ACT_FRESH, fresh.nbytes)]
        if fresh.revoked:
            actions.append((now, serial, wcr_mod.ACT_DROP, 0))
            self.log_actions(client, actions)
            return False, 0
        actions.append((now, serial, wcr_mod.ACT_USE, 0))
        self.log_actions(client, actions)
        return True, 0


class PlainCrlBaselineAdapter(SchemeAdapter):
    """Baseline plain-CRL verifier: acquire the certificate once, then check
    every use against the current CRL (cached while its validity lasts)."""

    name = "plain_crl"

    def __init__(self, sim) -> None:
        super().__init__(sim)
        self.issuer = CrlIssuer(
            self.keystore,
            self.ca_key,
            IssuanceSchedule(base_period=self.config.base_period),
        )
        self.current: Optional[CrlDocument] = None
        self.held: set[tuple[int, int]] = set()
        self.cached: dict[int, CrlDocument] = {}

    def publish_events(self) -> list[tuple[int, str]]:
        return _base_grid(self.config.horizon, self.config.base_period)

    def on_publish(self, now: int, tag: str) -> None:
        self.current = self.issuer.issue_full(self.ledger.revoked_non_expired(now), now)
        self.metrics.note_sign("ca_sign")
        self.metrics.note_publication("full_crl")
        self.ca_push(self.current.wire_size)

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        actions = []
        d2c = 0
        if (client, serial) not in self.held:
            fresh = self.fresh_fetch(serial, now)
            actions.append((now, serial, wcr_mod.ACT_FRESH, fresh.nbytes))
            if fresh.revoked:
                actions.append((now, serial, wcr_mod.ACT_DROP, 0))
                self.log_actions(client, actions)
                return False, 0
            self.held.add((client, serial))
            actions.append((now, serial, wcr_mod.ACT_USE, 0))
            self.log_actions(client, actions)
            return True, 0
        doc = self.cached.get(client)
        if doc is None or not doc.covers(now):
            doc = self.current
            self.cached[client] = doc
            self.dir_fetch(now, doc.wire_size)
            self.metrics.note_sign("client_verify")
            self.metrics.base_crl_fetches += 1
            d2c += doc.wire_size
            actions.append((now, serial, wcr_mod.ACT_CRL, doc.wire_size))
        if doc.lists(serial):
            self.held.discard((client, serial))
            actions.append((now, serial, wcr_mod.ACT_DROP, 0))
            self.log_actions(client, actions)
            return False, d2c
        actions.append((now, serial, wcr_mod.ACT_USE, 0))
        self.log_actions(client, actions)
        return True, d2c


# ---------------------------------------------------------------------------
# OCSP and the naive signed-statement baseline
# ---------------------------------------------------------------------------

class OcspAdapter(SchemeAdapter):
    name = "ocsp"

    def __init__(self, sim) -> None:
        super().__init__(sim)
        keys = []
        t = 0
        i = 0
        while t < self.config.horizon:
            keys.append(
                resp_mod.ResponderKey(
                    key_id=f"resp{i:03d}",
                    valid_from=t,
                    valid_to=t + self.config.ocsp_key_lifetime,
                )
            )
            t += self.config.ocsp_key_lifetime
            i += 1
        self.chain = resp_mod.make_key_chain(keys, self.keystore, self.ca_key, sim.rng_scheme)
        self.responder = resp_mod.OcspResponder(self.keystore, self.chain, self.ledger)
        self.cached: dict[tuple[int, int], resp_mod.StatusResponse] = {}

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        if self.config.ocsp_max_age > 0:
            hit = self.cached.get((client, serial))
            if hit is not None and resp_mod.accept_cached(
                hit, self.config.ocsp_max_age, now, self.keystore, self.chain
            ):
                return hit.status is not resp_mod.OcspStatus.REVOKED, 0
        request = resp_mod.make_request(serial, now, self.sim.rng_nonce)
        response = self.responder.respond(request)
        self.metrics.note_request(now)
        self.metrics.note_sent("client_to_directory", request.wire_size)
        self.metrics.note_received("client_to_directory", request.wire_size)
        self.metrics.note_sent("directory_to_client", response.wire_size)
        self.metrics.note_received("directory_to_client", response.wire_size)
        self.metrics.note_sign("responder_sign")
        if not resp_mod.verify_response(response, request, self.keystore, self.chain):
            raise AssertionError("genuine responder answer failed verification")
        self.metrics.note_sign("client_verify")
        if self.config.ocsp_max_age > 0:
            self.cached[(client, serial)] = response
        return response.status is not resp_mod.OcspStatus.REVOKED, response.wire_size


class NaiveStatusAdapter(SchemeAdapter):
    name = "naive_signed_status"

    def __init__(self, sim) -> None:
        super().__init__(sim)
        self.statements: dict[int, resp_mod.SignedStatusStatement] = {}
        self.period = self.config.crs_period
        self.directory_period = -1
        self.cache: dict[int, dict[int, tuple[resp_mod.SignedStatusStatement, int]]] = {}

    def publish_events(self) -> list[tuple[int, str]]:
        return [(t, "statements") for t in range(self.period, self.config.horizon, self.period)]

    def on_publish(self, now: int, tag: str) -> None:
        period = now // self.period
        statements = resp_mod.publish_statements(
            self.ledger, period, now, self.keystore, self.ca_key
        )
        self.statements = {s.serial: s for s in statements}
        self.directory_period = period
        self.metrics.note_sign("ca_sign", len(statements))
        self.metrics.note_publication("status_statements", len(statements))
        self.ca_push(sum(s.wire_size for s in statements))

    def validate(self, client: int, serial: int, now: int) -> tuple[bool, int]:
        period = now // self.period
        if period == 0 or self.directory_period < 0:
            return True, 0  # issuance itself is the period-0 statement
        d2c = 0
        slot = self.cache.setdefault(client, {})
        hit = slot.get(serial)
        if hit is None or hit[1] != self.directory_period:
            statement = self.statements.get(serial)
            if statement is None:
                return True, 0  # issued since the last update; covered by issuance
            self.dir_fetch(now, statement.wire_size)
            d2c += statement.wire_size
            slot[serial] = (statement, self.directory_period)
        else:
            statement = hit[0]
        if not resp_mod.verify_statement(statement, self.keystore, self.ca_key, period):
            raise AssertionError("genuine statement failed verification")
        self.metrics.note_sign("client_verify")
        return statement.status is not resp_mod.OcspStatus.REVOKED, d2c


ADAPTERS = {
    Scheme.FULL_CRL: FullCrlAdapter,
    Scheme.DELTA_CRL: DeltaCrlAdapter,
    Scheme.SLIDING_DELTA: SlidingDeltaAdapter,
    Scheme.SEGMENTED: SegmentedAdapter,
    Scheme.CRS: CrsAdapter,
    Scheme.CRT: CrtAdapter,
    Scheme.WCR: WcrAdapter,
    Scheme.OCSP: OcspAdapter,
    Scheme.NAIVE_SIGNED_STATUS: NaiveStatusAdapter,
}
