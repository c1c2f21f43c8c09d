"""Shared domain types for the revocation workbench.

Serial numbers, simulated time, certificates, revocation records, the keyed
signature primitive, and the one-way function used by hash-chain tokens.
Every byte that gets signed or hashed anywhere in the workbench flows through
the canonical serialization helpers defined here.
"""

from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

# Serial numbers are unsigned 64-bit integers. 0 and 2**64-1 are reserved as
# the tree sentinels; real serials live strictly between them.
SERIAL_BITS = 64
SERIAL_MIN = 0
SERIAL_MAX = 2**64 - 1

# Simulated clock: seconds since epoch 0 of the run, unsigned 64-bit.
TIME_MAX = 2**64 - 1

DAY = 86_400
HOUR = 3_600


class ReasonCode(Enum):
    COMPROMISE = "compromise"
    DEPARTURE = "departure"
    ROLE_CHANGE = "role_change"
    OTHER = "other"


class UnknownKeyError(KeyError):
    """Signing or verification requested under an unregistered key id."""


class WidthError(ValueError):
    """Input to the one-way function has the wrong bit width."""


def check_serial(serial: int) -> int:
    if not SERIAL_MIN <= serial <= SERIAL_MAX:
        raise ValueError(f"serial {serial} outside unsigned 64-bit range")
    return serial


def check_time(t: int) -> int:
    """Guard simulated-time arithmetic against u64 overflow."""
    if not 0 <= t <= TIME_MAX:
        raise OverflowError(f"simulated time {t} outside unsigned 64-bit range")
    return t


# ---------------------------------------------------------------------------
# Canonical byte serialization: fixed field order, big-endian integers,
# length-prefixed byte strings. This is the bit-exact input to all signing
# and hashing.
# ---------------------------------------------------------------------------

def pack_u8(v: int) -> bytes:
    return struct.pack(">B", v)


def pack_u32(v: int) -> bytes:
    return struct.pack(">I", v)


def pack_u64(v: int) -> bytes:
    return struct.pack(">Q", v)


def pack_bytes(b: bytes) -> bytes:
    return struct.pack(">I", len(b)) + b


def pack_str(s: str) -> bytes:
    return pack_bytes(s.encode("utf-8"))


def pack_opt_u64(v: Optional[int]) -> bytes:
    return b"\x00" if v is None else b"\x01" + pack_u64(v)


def pack_opt_str(s: Optional[str]) -> bytes:
    return b"\x00" if s is None else b"\x01" + pack_str(s)


@dataclass(frozen=True)
class Signature:
    key_id: str
    mac: bytes

    def to_bytes(self) -> bytes:
        return pack_str(self.key_id) + pack_bytes(self.mac)

    @property
    def wire_size(self) -> int:
        return len(self.to_bytes())


class KeyStore:
    """Deterministic keyed-MAC signer behind the workbench signature contract.

    The schemes only care about signature sizes and operation counts, so a
    keyed hash stands in for an asymmetric algorithm; the contract (sign /
    verify / per-key identity) allows swapping one in later. Sign and verify
    call counts are kept for the simulator's CPU proxy.
    """

    MAC_BYTES = 32

    def __init__(self) -> None:
        self._keys: dict[str, bytes] = {}
        self.sign_count = 0
        self.verify_count = 0

    def register(self, key_id: str, secret: bytes) -> None:
        self._keys[key_id] = bytes(secret)

    def generate(self, key_id: str, rng) -> None:
        """Register a fresh key drawn from the given rng (seedable for tests)."""
        self.register(key_id, rng.getrandbits(256).to_bytes(32, "big"))

    def key_ids(self) -> list[str]:
        return sorted(self._keys)

    def sign(self, message: bytes, key_id: str) -> Signature:
        if key_id not in self._keys:
            raise UnknownKeyError(key_id)
        self.sign_count += 1
        mac = hmac.new(self._keys[key_id], message, hashlib.sha256).digest()
        return Signature(key_id=key_id, mac=mac)

    def verify(self, message: bytes, signature: Signature, key_id: str) -> bool:
        """True iff signature was produced over message under exactly key_id."""
        if key_id not in self._keys:
            raise UnknownKeyError(key_id)
        self.verify_count += 1
        if signature.key_id != key_id:
            return False
        expected = hmac.new(self._keys[key_id], message, hashlib.sha256).digest()
        return hmac.compare_digest(expected, signature.mac)


def sign(message: bytes, keystore: KeyStore, key_id: str) -> Signature:
    return keystore.sign(message, key_id)


def verify(message: bytes, signature: Signature, keystore: KeyStore, key_id: str) -> bool:
    return keystore.verify(message, signature, key_id)


# ---------------------------------------------------------------------------
# One-way function F: {0,1}^w -> {0,1}^w, default w = 100 bits.
# ---------------------------------------------------------------------------

class OneWayFunction:
    """Fixed-width one-way function, realized as a domain-separated hash
    truncated (and bit-masked) to the configured width.

    Values are big-endian byte strings of ceil(width/8) bytes whose excess
    high bits are zero, so the function's range is exactly its domain and
    iterate(x, a + b) == iterate(iterate(x, b), a) holds by construction.
    """

    _PREFIX = b"owf:"

    def __init__(self, width_bits: int = 100) -> None:
        if width_bits < 8 or width_bits > 256:
            raise ValueError("width must be between 8 and 256 bits")
        self.width_bits = width_bits
        self.width_bytes = (width_bits + 7) // 8
        excess = self.width_bytes * 8 - width_bits
        self._mask = 0xFF >> excess
        self.apply_count = 0

    def check_width(self, x: bytes) -> bytes:
        if len(x) != self.width_bytes or (x[0] & ~self._mask & 0xFF):
            raise WidthError(
                f"value must be exactly {self.width_bits} bits "
                f"({self.width_bytes} bytes, excess high bits zero)"
            )
        return x

    def random_value(self, rng) -> bytes:
        return rng.getrandbits(self.width_bits).to_bytes(self.width_bytes, "big")

    def apply(self, x: bytes) -> bytes:
        self.check_width(x)
        self.apply_count += 1
        digest = hashlib.sha256(self._PREFIX + x).digest()
        out = bytearray(digest[: self.width_bytes])
        out[0] &= self._mask
        return bytes(out)

    def iterate(self, x: bytes, n: int) -> bytes:
        """Apply F n times; iterate(x, 0) == x."""
        if n < 0:
            raise ValueError("iteration count must be >= 0")
        self.check_width(x)
        prefix = self._PREFIX
        nbytes = self.width_bytes
        mask = self._mask
        cur = x
        for _ in range(n):
            digest = hashlib.sha256(prefix + cur).digest()
            buf = bytearray(digest[:nbytes])
            buf[0] &= mask
            cur = bytes(buf)
        self.apply_count += n
        return cur


def iterate_F(f: OneWayFunction, x: bytes, n: int) -> bytes:
    return f.iterate(x, n)


# ---------------------------------------------------------------------------
# Certificates and revocation records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrsAnchor:
    """Public chain endpoints embedded in a certificate: Y = F^L(Y0), N = F(N0)."""

    y: bytes
    n: bytes
    lifetime_periods: int
    period_length: int

    def to_bytes(self) -> bytes:
        return (
            pack_bytes(self.y)
            + pack_bytes(self.n)
            + pack_u32(self.lifetime_periods)
            + pack_u64(self.period_length)
        )


@dataclass(frozen=True)
class Certificate:
    serial: int
    subject: str
    not_before: int
    not_after: int
    issuer_signature: Signature
    crs_anchor: Optional[CrsAnchor] = None
    segment_id: Optional[str] = None

    def __post_init__(self) -> None:
        check_serial(self.serial)
        if not self.not_before < self.not_after:
            raise ValueError("certificate validity window is empty")

    def signed_payload(self) -> bytes:
        anchor = b"\x00" if self.crs_anchor is None else b"\x01" + self.crs_anchor.to_bytes()
        return (
            pack_u64(self.serial)
            + pack_str(self.subject)
            + pack_u64(self.not_before)
            + pack_u64(self.not_after)
            + anchor
            + pack_opt_str(self.segment_id)
        )

    def to_bytes(self) -> bytes:
        return self.signed_payload() + self.issuer_signature.to_bytes()

    @property
    def wire_size(self) -> int:
        return len(self.to_bytes())

    def is_valid_at(self, now: int) -> bool:
        return self.not_before <= now < self.not_after


def make_certificate(
    serial: int,
    subject: str,
    not_before: int,
    not_after: int,
    keystore: KeyStore,
    key_id: str,
    crs_anchor: Optional[CrsAnchor] = None,
    segment_id: Optional[str] = None,
) -> Certificate:
    """Build and sign a certificate in one step (signature covers all other fields)."""
    unsigned = Certificate(
        serial=serial,
        subject=subject,
        not_before=not_before,
        not_after=not_after,
        issuer_signature=Signature(key_id=key_id, mac=b""),
        crs_anchor=crs_anchor,
        segment_id=segment_id,
    )
    sig = keystore.sign(unsigned.signed_payload(), key_id)
    return Certificate(
        serial=serial,
        subject=subject,
        not_before=not_before,
        not_after=not_after,
        issuer_signature=sig,
        crs_anchor=crs_anchor,
        segment_id=segment_id,
    )


def verify_certificate(cert: Certificate, keystore: KeyStore, key_id: str) -> bool:
    return keystore.verify(cert.signed_payload(), cert.issuer_signature, key_id)


@dataclass(frozen=True)
class RevocationRecord:
    serial: int
    revoked_at: int
    reason: ReasonCode = ReasonCode.OTHER

    def to_bytes(self) -> bytes:
        return pack_u64(self.serial) + pack_u64(self.revoked_at) + pack_str(self.reason.value)


class Ledger:
    """The CA's ground-truth record of issued and revoked certificates.

    Single-writer; every scheme's published documents derive from this state,
    and the simulator checks client decisions against it.
    """

    def __init__(self) -> None:
        self.certificates: dict[int, Certificate] = {}
        self.revocations: dict[int, RevocationRecord] = {}

    def add_certificate(self, cert: Certificate) -> None:
        if cert.serial in self.certificates:
            raise ValueError(f"serial {cert.serial} already issued")
        self.certificates[cert.serial] = cert

    def revoke(self, serial: int, revoked_at: int, reason: ReasonCode = ReasonCode.OTHER) -> RevocationRecord:
        cert = self.certificates.get(serial)
        if cert is None:
            raise KeyError(f"serial {serial} was never issued")
        if serial in self.revocations:
            raise ValueError(f"serial {serial} already revoked")
        if not cert.is_valid_at(revoked_at):
            raise ValueError("revocation instant outside certificate validity window")
        record = RevocationRecord(serial=serial, revoked_at=revoked_at, reason=reason)
        self.revocations[serial] = record
        return record

    def is_issued(self, serial: int) -> bool:
        return serial in self.certificates

    def revoked_at(self, serial: int) -> Optional[int]:
        record = self.revocations.get(serial)
        return None if record is None else record.revoked_at

    def is_revoked(self, serial: int, now: int) -> bool:
        record = self.revocations.get(serial)
        return record is not None and record.revoked_at <= now

    def non_expired_serials(self, now: int) -> list[int]:
        return sorted(s for s, c in self.certificates.items() if now < c.not_after)

    def revoked_non_expired(self, now: int) -> list[RevocationRecord]:
        """Records for certificates revoked by `now` and not yet expired."""
        out = [
            r
            for r in self.revocations.values()
            if r.revoked_at <= now and now < self.certificates[r.serial].not_after
        ]
        out.sort(key=lambda r: r.serial)
        return out


def sorted_unique_serials(serials: Iterable[int]) -> list[int]:
    out = sorted(set(serials))
    for s in out:
        check_serial(s)
    return out
