"""Command-line entry point.

Every subcommand is a thin delegation to one module operation: scheme
commands read and write the modules' file formats, `sim` drives the
simulator. Human-readable summaries go to stdout; machine-readable artifacts
go only to files named by flags. Exit codes: 0 success, 1 semantic failure
(verification failed or information stale), 2 usage or malformed input.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import crs as crs_mod
from . import crt as crt_mod
from . import responder as resp_mod
from . import simkit
from .core import DAY, HOUR, KeyStore, Ledger, OneWayFunction, ReasonCode, RevocationRecord
from .crl import CrlDocument, CrlIssuer, CrlStatus, IssuanceSchedule, check_status

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class InputError(Exception):
    """Malformed input file or inconsistent arguments."""


# ---------------------------------------------------------------------------
# File helpers
# ---------------------------------------------------------------------------

def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _write_json(path: str, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def load_keystore(path: str) -> KeyStore:
    data = _read_json(path)
    ks = KeyStore()
    for key_id, secret_hex in data.get("keys", {}).items():
        ks.register(key_id, bytes.fromhex(secret_hex))
    return ks


def load_ledger(path: str, keystore: KeyStore, key_id: str) -> Ledger:
    data = _read_json(path)
    ledger = Ledger()
    from .core import make_certificate

    for c in data.get("certificates", []):
        ledger.add_certificate(
            make_certificate(
                serial=c["serial"],
                subject=c.get("subject", f"subject-{c['serial']}"),
                not_before=c["not_before"],
                not_after=c["not_after"],
                keystore=keystore,
                key_id=key_id,
            )
        )
    for r in data.get("revocations", []):
        ledger.revoke(r["serial"], r["revoked_at"], ReasonCode(r.get("reason", "other")))
    return ledger


def _records(ledger: Ledger, now: int) -> list[RevocationRecord]:
    return ledger.revoked_non_expired(now)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_keygen(args) -> int:
    path = Path(args.keystore)
    data = {"keys": {}}
    if path.exists():
        data = _read_json(args.keystore)
    rng = random.Random(args.seed) if args.seed is not None else random.SystemRandom()
    data["keys"][args.key_id] = rng.getrandbits(256).to_bytes(32, "big").hex()
    _write_json(args.keystore, data)
    print(f"registered key {args.key_id!r} in {args.keystore}")
    return EXIT_OK


def cmd_crl_issue(args) -> int:
    ks = load_keystore(args.keystore)
    ledger = load_ledger(args.ledger, ks, args.key)
    schedule = IssuanceSchedule(
        base_period=args.base_period,
        delta_period=args.delta_period,
        window_length=args.window,
    )
    issuer = CrlIssuer(ks, args.key, schedule)
    if args.kind == "full":
        doc = issuer.issue_full(_records(ledger, args.now), args.now)
    else:
        doc = issuer.issue_sliding_delta(_records(ledger, args.now), args.now)
    Path(args.out).write_bytes(doc.to_bytes())
    _write_json(args.out + ".json", doc.to_json_dict())
    print(
        f"issued {doc.kind.value} crl: {len(doc.entries)} entries, "
        f"valid [{doc.this_update}, {doc.next_update}) -> {args.out}"
    )
    return EXIT_OK


def cmd_crl_check(args) -> int:
    ks = load_keystore(args.keystore)
    docs = [CrlDocument.from_json_dict(_read_json(p)) for p in args.doc]
    status = check_status(args.serial, docs, args.now, ks, args.key)
    print(status.value)
    return EXIT_OK if status is not CrlStatus.STALE_INFORMATION else EXIT_FAIL


def _load_crs_state(path: str) -> tuple[OneWayFunction, crs_mod.CrsAuthority, dict]:
    data = _read_json(path) if Path(path).exists() else {"width_bits": 100, "serials": {}}
    f = OneWayFunction(data.get("width_bits", 100))
    authority = crs_mod.CrsAuthority(f)
    for serial_str, entry in data.get("serials", {}).items():
        serial = int(serial_str)
        rng = _FixedSeeds(bytes.fromhex(entry["y0"]), bytes.fromhex(entry["n0"]), f)
        authority.setup(serial, entry["lifetime_periods"], entry["period_length"], rng)
        if entry.get("revoked"):
            authority.revoke(serial)
    return f, authority, data


class _FixedSeeds:
    """rng stand-in replaying stored chain seeds when reloading CA state."""

    def __init__(self, y0: bytes, n0: bytes, f: OneWayFunction) -> None:
        self._values = [y0, n0]
        self._f = f

    def getrandbits(self, bits: int) -> int:
        return int.from_bytes(self._values.pop(0), "big")


def cmd_crs_setup(args) -> int:
    f, authority, data = _load_crs_state(args.state)
    rng = random.Random(args.seed) if args.seed is not None else random.SystemRandom()
    anchor, secret = authority.setup(args.serial, args.periods, args.period_length, rng)
    data.setdefault("serials", {})[str(args.serial)] = {
        "y0": secret.y0.hex(),
        "n0": secret.n0.hex(),
        "lifetime_periods": args.periods,
        "period_length": args.period_length,
        "revoked": False,
    }
    data["width_bits"] = f.width_bits
    _write_json(args.state, data)
    _write_json(
        args.anchor_out,
        {
            "y": anchor.y.hex(),
            "n": anchor.n.hex(),
            "lifetime_periods": anchor.lifetime_periods,
            "period_length": anchor.period_length,
        },
    )
    print(f"serial {args.serial}: anchor written to {args.anchor_out}")
    return EXIT_OK


def cmd_crs_revoke(args) -> int:
    data = _read_json(args.state)
    entry = data["serials"].get(str(args.serial))
    if entry is None:
        raise InputError(f"serial {args.serial} not in CA state")
    entry["revoked"] = True
    _write_json(args.state, data)
    print(f"serial {args.serial} marked revoked")
    return EXIT_OK


def cmd_crs_token(args) -> int:
    f, authority, _ = _load_crs_state(args.state)
    token = authority.issue_token(args.serial, args.period)
    Path(args.out).write_bytes(token.to_bytes())
    print(f"{token.kind.value} token for serial {args.serial}, period {args.period} -> {args.out}")
    return EXIT_OK


def cmd_crs_verify(args) -> int:
    data = _read_json(args.anchor)
    from .core import CrsAnchor

    anchor = CrsAnchor(
        y=bytes.fromhex(data["y"]),
        n=bytes.fromhex(data["n"]),
        lifetime_periods=data["lifetime_periods"],
        period_length=data["period_length"],
    )
    f = OneWayFunction(args.width)
    token = crs_mod.parse_token(Path(args.token).read_bytes(), f)
    status = crs_mod.crs_verify(token, anchor, args.period, f)
    print(status.value)
    return EXIT_OK if status is not crs_mod.CrsStatus.INVALID_TOKEN else EXIT_FAIL


def cmd_crt_build(args) -> int:
    ks = load_keystore(args.keystore)
    revoked = _read_json(args.revoked)
    if not isinstance(revoked, list):
        raise InputError("revoked file must be a JSON list of serials")
    tree = crt_mod.crt_build(revoked, args.now, args.validity, ks, args.key)
    _write_json(
        args.out,
        {
            "serials": list(tree.serials),
            "issued_at": tree.signed_root.issued_at,
            "next_update": tree.signed_root.next_update,
            "root": tree.root.hex(),
            "signature": {
                "key_id": tree.signed_root.signature.key_id,
                "mac": tree.signed_root.signature.mac.hex(),
            },
        },
    )
    print(f"built tree over {len(tree.serials)} revoked serials ({len(tree.leaves)} leaves) -> {args.out}")
    return EXIT_OK


def _load_tree(path: str, keystore: KeyStore, key_id: str) -> crt_mod.CrtTree:
    from .core import Signature

    data = _read_json(path)
    rebuilt = crt_mod.crt_build(data["serials"], data["issued_at"],
                                data["next_update"] - data["issued_at"], keystore, key_id)
    if rebuilt.root.hex() != data["root"]:
        raise InputError("tree file root does not match its serial set")
    signed = crt_mod.SignedRoot(
        root=bytes.fromhex(data["root"]),
        issued_at=data["issued_at"],
        next_update=data["next_update"],
        signature=Signature(data["signature"]["key_id"], bytes.fromhex(data["signature"]["mac"])),
    )
    return crt_mod.CrtTree(
        serials=rebuilt.serials, leaves=rebuilt.leaves, levels=rebuilt.levels, signed_root=signed
    )


def cmd_crt_prove(args) -> int:
    ks = load_keystore(args.keystore)
    tree = _load_tree(args.tree, ks, args.key)
    proof = crt_mod.crt_prove(tree, args.serial)
    Path(args.out).write_bytes(proof.to_bytes())
    print(
        f"proof for serial {args.serial}: leaf ({proof.leaf.lo}, {proof.leaf.hi}), "
        f"{len(proof.siblings)} siblings, {proof.wire_size} bytes -> {args.out}"
    )
    return EXIT_OK


def cmd_crt_verify(args) -> int:
    ks = load_keystore(args.keystore)
    proof = crt_mod.parse_proof(Path(args.proof).read_bytes())
    verdict = crt_mod.crt_verify(proof, args.serial, ks, args.key, args.now)
    print(verdict.value)
    ok = verdict in (crt_mod.CrtVerdict.VALID, crt_mod.CrtVerdict.REVOKED)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ocsp_query(args) -> int:
    ks = load_keystore(args.keystore)
    ledger = load_ledger(args.ledger, ks, args.key)
    chain = resp_mod.make_key_chain(
        [resp_mod.ResponderKey("resp000", 0, max(args.now + 1, 1) * 2)],
        ks,
        args.key,
        random.Random(args.seed if args.seed is not None else 0),
    )
    responder = resp_mod.OcspResponder(ks, chain, ledger)
    rng = random.Random(args.seed) if args.seed is not None else random.SystemRandom()
    request = resp_mod.make_request(args.serial, args.now, rng)
    response = responder.respond(request)
    if not resp_mod.verify_response(response, request, ks, chain):
        print("response verification failed", file=sys.stderr)
        return EXIT_FAIL
    if args.out:
        Path(args.out).write_bytes(response.to_bytes())
    print(response.status.value)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Simulator
# ---------------------------------------------------------------------------

def _tradeoff_preset(seed: int) -> list[simkit.SimConfig]:
    """One comparable config per scheme at desk scale."""
    base = dict(
        seed=seed,
        horizon=60 * DAY,
        population=2000,
        n_clients=40,
        validation_rate=3.0,
        late_revoked_threshold=0,
    )
    return [
        simkit.SimConfig(scheme=simkit.Scheme.FULL_CRL, **base),
        simkit.SimConfig(
            scheme=simkit.Scheme.DELTA_CRL, delta_period=6 * HOUR, **base
        ),
        simkit.SimConfig(
            scheme=simkit.Scheme.SLIDING_DELTA,
            delta_period=3 * HOUR,
            window_length=21 * DAY,
            **base,
        ),
        simkit.SimConfig(scheme=simkit.Scheme.SEGMENTED, segments=8, **base),
        simkit.SimConfig(scheme=simkit.Scheme.CRS, **base),
        simkit.SimConfig(scheme=simkit.Scheme.CRT, **base),
        simkit.SimConfig(
            scheme=simkit.Scheme.WCR, wcr_window_size=3, wcr_clean_duration=12 * HOUR, **base
        ),
        simkit.SimConfig(scheme=simkit.Scheme.OCSP, **base),
        simkit.SimConfig(scheme=simkit.Scheme.NAIVE_SIGNED_STATUS, **base),
    ]


def cmd_sim(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.preset:
        if args.preset != "paper-tradeoffs":
            raise InputError(f"unknown preset {args.preset!r}")
        configs = _tradeoff_preset(args.seed if args.seed is not None else 42)
        results = simkit.compare(configs)
        (out_dir / "comparison.csv").write_text(simkit.comparison_csv(results))
        for config, report in results:
            (out_dir / f"report_{config.scheme.value}.json").write_text(report.to_json() + "\n")
        print((out_dir / "comparison.csv").read_text().rstrip())
        return EXIT_OK

    if args.compare:
        configs = [simkit.SimConfig.from_json_dict(_read_json(p)) for p in args.compare]
        if args.seed is not None:
            configs = [c.with_seed(args.seed) for c in configs]
        results = simkit.compare(configs)
        (out_dir / "comparison.csv").write_text(simkit.comparison_csv(results))
        for config, report in results:
            (out_dir / f"report_{config.scheme.value}.json").write_text(report.to_json() + "\n")
        print((out_dir / "comparison.csv").read_text().rstrip())
        return EXIT_OK

    if not args.config:
        raise InputError("one of --config, --compare, --preset is required")
    config = simkit.SimConfig.from_json_dict(_read_json(args.config))
    if args.seed is not None:
        config = config.with_seed(args.seed)
    report = simkit.run(config)
    (out_dir / "report.json").write_text(report.to_json() + "\n")
    (out_dir / "intervals.csv").write_text(simkit.interval_csv(report))
    row = report.summary_row()
    for key in sorted(row):
        print(f"{key}: {row[key]}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="revokebench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="register a signing key in a keystore file")
    p.add_argument("--keystore", required=True)
    p.add_argument("--key-id", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("crl-issue", help="issue a full or sliding-window CRL from a ledger")
    p.add_argument("--keystore", required=True)
    p.add_argument("--key", default="ca")
    p.add_argument("--ledger", required=True)
    p.add_argument("--now", type=int, required=True)
    p.add_argument("--base-period", type=int, default=DAY)
    p.add_argument("--delta-period", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--kind", choices=["full", "sliding"], default="full")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_crl_issue)

    p = sub.add_parser("crl-check", help="client-side status check over cached documents")
    p.add_argument("--keystore", required=True)
    p.add_argument("--key", default="ca")
    p.add_argument("--serial", type=int, required=True)
    p.add_argument("--now", type=int, required=True)
    p.add_argument("--doc", action="append", required=True, help="CRL .json file (repeatable)")
    p.set_defaults(func=cmd_crl_check)

    p = sub.add_parser("crs-setup", help="create chain secrets and the public anchor")
    p.add_argument("--state", required=True)
    p.add_argument("--serial", type=int, required=True)
    p.add_argument("--periods", type=int, default=365)
    p.add_argument("--period-length", type=int, default=DAY)
    p.add_argument("--anchor-out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_crs_setup)

    p = sub.add_parser("crs-revoke", help="mark a serial revoked in CA state")
    p.add_argument("--state", required=True)
    p.add_argument("--serial", type=int, required=True)
    p.set_defaults(func=cmd_crs_revoke)

    p = sub.add_parser("crs-token", help="issue the day-i token for a serial")
    p.add_argument("--state", required=True)
    p.add_argument("--serial", type=int, required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_crs_token)

    p = sub.add_parser("crs-verify", help="verify a token against an anchor")
    p.add_argument("--anchor", required=True)
    p.add_argument("--token", required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--width", type=int, default=100)
    p.set_defaults(func=cmd_crs_verify)

    p = sub.add_parser("crt-build", help="build a revocation tree over a serial list")
    p.add_argument("--keystore", required=True)
    p.add_argument("--key", default="ca")
    p.add_argument("--revoked", required=True, help="JSON list of revoked serials")
    p.add_argument("--now", type=int, required=True)
    p.add_argument("--validity", type=int, default=DAY)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_crt_build)

    p = sub.add_parser("crt-prove", help="produce a proof for one serial")
    p.add_argument("--keystore", required=True)
    p.add_argument("--key", default="ca")
    p.add_argument("--tree", required=True)
    p.add_argument("--serial", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_crt_prove)

    p = sub.add_parser("crt-verify", help="verify a proof and classify the serial")
    p.add_argument("--keystore", required=True)
    p.add_argument("--key", default="ca")
    p.add_argument("--proof", required=True)
    p.add_argument("--serial", type=int, required=True)
    p.add_argument("--now", type=int, required=True)
    p.set_defaults(func=cmd_crt_verify)

    p = sub.add_parser("ocsp-query", help="signed status query against a ledger")
    p.add_argument("--keystore", required=True)
    p.add_argument("--key", default="ca")
    p.add_argument("--ledger", required=True)
    p.add_argument("--serial", type=int, required=True)
    p.add_argument("--now", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_ocsp_query)

    p = sub.add_parser("sim", help="run the simulator or a scheme comparison")
    p.add_argument("--config", help="SimConfig JSON file")
    p.add_argument("--compare", nargs="+", help="two or more SimConfig JSON files")
    p.add_argument("--preset", help="named experiment preset (paper-tradeoffs)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sim)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, OSError, simkit.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
