"""Windowed certificate revocation.

Issuer side: a revocation stays on the CRL for a bounded number of
consecutive publishing dates instead of until expiry. Client side: the
verifier cache algorithm with a clean timer (how fresh a certificate must be
to skip revalidation) and a revocation-window timer (how long the CRL is
still guaranteed to list anything missed).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Protocol

from .core import Certificate, KeyStore, RevocationRecord, TIME_MAX
from .crl import CrlDocument, CrlIssuer, IssuanceSchedule


class WcrDecision(Enum):
    USE = "use"
    DROP = "drop"


class WcrFetchError(RuntimeError):
    """A fetch service failed; retryable, and timers must not move."""


@dataclass(frozen=True)
class WcrIssuerConfig:
    """window_size is the number of consecutive publishing dates a revocation
    must appear on; None means infinity (plain CRL behavior)."""

    revocation_window_size: Optional[int] = None

    def __post_init__(self) -> None:
        if self.revocation_window_size is not None and self.revocation_window_size < 1:
            raise ValueError("revocation window size must be >= 1 or infinite")


class WcrIssuer:
    """Publishes the windowed CRL on a fixed period.

    A record's publishing date is the first date at or after its revocation
    instant; with window size w it then appears on exactly w consecutive
    lists (every later list when w is infinite).
    """

    def __init__(
        self,
        keystore: KeyStore,
        key_id: str,
        period: int,
        config: WcrIssuerConfig,
    ) -> None:
        if period <= 0:
            raise ValueError("publishing period must be positive")
        self.period = period
        self.config = config
        self._crl = CrlIssuer(keystore, key_id, IssuanceSchedule(base_period=period))

    def assigned_index(self, revoked_at: int) -> int:
        return -(-revoked_at // self.period)

    def issue(
        self,
        records: Iterable[RevocationRecord],
        publish_index: int,
        now: int,
        expiry: Optional[dict[int, int]] = None,
    ) -> CrlDocument:
        window = self.config.revocation_window_size
        listed = []
        for record in records:
            if expiry is not None and expiry.get(record.serial, TIME_MAX) <= now:
                continue
            if window is None:
                listed.append(record)
                continue
            first = self.assigned_index(record.revoked_at)
            if first <= publish_index <= first + window - 1:
                listed.append(record)
        return self._crl.issue_full(listed, now)


class WcrServices(Protocol):
    """Network side of the verifier cache algorithm, supplied by the caller."""

    def fetch_fresh_certificate(self, serial: int, now: int) -> "FreshFetch": ...

    def fetch_latest_crl(self, now: int) -> "CrlFetch": ...


@dataclass(frozen=True)
class FreshFetch:
    revoked: bool
    certificate: Optional[Certificate]
    nbytes: int


@dataclass(frozen=True)
class CrlFetch:
    doc: CrlDocument
    nbytes: int  # zero when served from the client's own cache


@dataclass(frozen=True)
class WcrClientConfig:
    clean_duration: int
    crl_period: int
    window_size: Optional[int] = None  # None = infinity

    @property
    def window_duration(self) -> Optional[int]:
        if self.window_size is None:
            return None
        return (self.window_size - 1) * self.crl_period


@dataclass(frozen=True)
class WcrClientState:
    serial: int
    certificate: Optional[Certificate] = None
    clean_deadline: int = 0
    window_deadline: int = 0


# Action tags for the per-validation log (time, serial, action, bytes).
ACT_FRESH = "fresh_fetch"
ACT_CRL = "crl_fetch"
ACT_USE = "cache_use"
ACT_DROP = "drop"

Action = tuple[int, int, str, int]


def _armed(state: WcrClientState, anchor: int, config: WcrClientConfig) -> WcrClientState:
    # Deadlines are anchored to the publication date of the information just
    # consulted; a zero duration therefore always reads as expired.
    window = config.window_duration
    return WcrClientState(
        serial=state.serial,
        certificate=state.certificate,
        clean_deadline=anchor + config.clean_duration,
        window_deadline=TIME_MAX if window is None else anchor + window,
    )


def _dropped(state: WcrClientState) -> WcrClientState:
    return WcrClientState(serial=state.serial)


def wcr_validate(
    state: WcrClientState,
    now: int,
    services: WcrServices,
    config: WcrClientConfig,
) -> tuple[WcrDecision, WcrClientState, list[Action]]:
    """One pass of the verifier cache algorithm for one certificate.

    No certificate -> fetch fresh and arm both timers. Clean timer running ->
    use without revalidating. Both timers expired -> fetch fresh again. Clean
    expired inside the revocation window -> the latest CRL is still
    guaranteed to list anything missed, so consult it (cached copy if
    current), drop if listed, otherwise re-arm and use.

    Fetch failures raise WcrFetchError before any state change.
    """
    actions: list[Action] = []
    grid = (now // config.crl_period) * config.crl_period

    if state.certificate is None:
        fresh = services.fetch_fresh_certificate(state.serial, now)
        actions.append((now, state.serial, ACT_FRESH, fresh.nbytes))
        if fresh.revoked:
            actions.append((now, state.serial, ACT_DROP, 0))
            return WcrDecision.DROP, _dropped(state), actions
        held = WcrClientState(serial=state.serial, certificate=fresh.certificate)
        actions.append((now, state.serial, ACT_USE, 0))
        return WcrDecision.USE, _armed(held, grid, config), actions

    if now < state.clean_deadline:
        actions.append((now, state.serial, ACT_USE, 0))
        return WcrDecision.USE, state, actions

    if now >= state.window_deadline:
        fresh = services.fetch_fresh_certificate(state.serial, now)
        actions.append((now, state.serial, ACT_FRESH, fresh.nbytes))
        if fresh.revoked:
            actions.append((now, state.serial, ACT_DROP, 0))
            return WcrDecision.DROP, _dropped(state), actions
        held = WcrClientState(serial=state.serial, certificate=fresh.certificate)
        actions.append((now, state.serial, ACT_USE, 0))
        return WcrDecision.USE, _armed(held, grid, config), actions

    fetched = services.fetch_latest_crl(now)
    if fetched.nbytes:
        actions.append((now, state.serial, ACT_CRL, fetched.nbytes))
    if fetched.doc.lists(state.serial):
        actions.append((now, state.serial, ACT_DROP, 0))
        return WcrDecision.DROP, _dropped(state), actions
    actions.append((now, state.serial, ACT_USE, 0))
    return WcrDecision.USE, _armed(state, fetched.doc.this_update, config), actions
