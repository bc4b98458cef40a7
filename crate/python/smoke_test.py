#!/usr/bin/env python3
"""Smoke test for the uavnet_py extension module.

Build the module first, then run this script from anywhere:

    cargo build -p uavnet-py
    python3 python/smoke_test.py

The script copies the freshest built cdylib into a scratch directory
under the import name Python expects, then exercises the bindings:
determinism, flow conservation, the scheme ordering on both evaluation
metrics, sweep output, and chain verification with a tampered export.
"""

import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]


def import_module():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libuavnet_py.so", "libuavnet_py.dylib")
    ]
    built = [p for p in candidates if p.exists()]
    if not built:
        sys.exit("no built module found; run `cargo build -p uavnet-py` first")
    freshest = max(built, key=lambda p: p.stat().st_mtime)
    scratch = Path(tempfile.mkdtemp(prefix="uavnet-py-"))
    shutil.copy2(freshest, scratch / "uavnet_py.so")
    sys.path.insert(0, str(scratch))
    import uavnet_py

    return uavnet_py


def make_config(mod, scheme, n_nodes, seed):
    cfg = mod.Config()
    cfg.scheme = scheme
    cfg.n_nodes = n_nodes
    cfg.seed = seed
    return cfg


def check_determinism(mod):
    cfg = make_config(mod, "n2n-uav-bc", 40, 7)
    first = mod.run(cfg)
    second = mod.run(cfg)
    assert first.report.to_dict() == second.report.to_dict(), "reports differ across reruns"
    assert first.report.csv_row() == second.report.csv_row()
    assert first.public_chain_jsonl == second.public_chain_jsonl, "chains differ across reruns"
    assert first.private_chain_jsonl == second.private_chain_jsonl

    cfg.seed = 8
    other = mod.run(cfg)
    assert other.report.to_dict() != first.report.to_dict(), "seed change had no effect"
    print("determinism: same seed reproduces, different seed diverges")


def check_conservation(mod):
    for scheme in mod.schemes():
        report = mod.run(make_config(mod, scheme, 50, 11)).report
        delivered = report.delivered_authentic + report.delivered_compromised
        assert report.flows_total == delivered + report.dropped, (
            f"{scheme}: flow counters do not balance"
        )
        total = (
            report.data_transmissions + report.control_messages + report.consensus_messages
        )
        assert report.total_messages() == total, f"{scheme}: message total mismatch"
    print("conservation: flow and message counters balance in every scheme")


def check_scheme_ordering(mod):
    seeds = (42, 43, 44)
    success = {}
    messages = {}
    for scheme in mod.schemes():
        reports = [mod.run(make_config(mod, scheme, 60, s)).report for s in seeds]
        success[scheme] = sum(r.success_rate() for r in reports) / len(reports)
        messages[scheme] = sum(r.total_messages() for r in reports) / len(reports)
    assert success["n2n-uav-bc"] >= success["n2n-uav-no-bc"] >= success["n2n-bs"], success
    assert messages["n2n-bs"] <= messages["n2n-uav-no-bc"] <= messages["n2n-uav-bc"], messages
    print(
        "ordering at 60 nodes: success "
        + " >= ".join(f"{success[s]:.1f}" for s in reversed(mod.schemes()))
        + ", messages "
        + " <= ".join(f"{messages[s]:.0f}" for s in mod.schemes())
    )


def check_ledger(mod):
    out = mod.run(make_config(mod, "n2n-uav-bc", 30, 5))
    assert out.report.delivered_compromised == 0, "ledger scheme let a rogue delivery through"
    for export in (out.public_chain_jsonl, out.private_chain_jsonl):
        ok, detail = mod.verify_chain(export)
        assert ok, detail

    tampered = out.public_chain_jsonl.replace('"hops":', '"hops": 1 +', 1)
    try:
        mod.verify_chain(tampered)
        raise AssertionError("mangled JSON was accepted as a chain export")
    except ValueError:
        pass

    lines = out.public_chain_jsonl.splitlines()
    assert len(lines) > 1, "expected receipts beyond the genesis block"
    doctored = "\n".join(
        line.replace('"timestamp_us":', '"timestamp_us":1', 1) if i == 1 else line
        for i, line in enumerate(lines)
    )
    assert doctored != out.public_chain_jsonl
    ok, detail = mod.verify_chain(doctored)
    assert not ok, "tampered chain passed verification"
    print(f"ledger: exports verify, tampering detected ({detail})")

    bare = mod.run(make_config(mod, "n2n-bs", 30, 5))
    assert bare.public_chain_jsonl is None and bare.private_chain_jsonl is None


def check_sweep(mod):
    cfg = make_config(mod, "n2n-bs", 10, 42)
    runs, success_series, messages_series = mod.sweep_csv(
        cfg, [10, 20], schemes=["n2n-bs"], replicate=2
    )
    assert len(runs.splitlines()) == 1 + 4, runs
    assert success_series.splitlines()[0] == "n_nodes,n2n-bs_mean,n2n-bs_stdev"
    assert len(messages_series.splitlines()) == 1 + 2
    again = mod.sweep_csv(cfg, [10, 20], schemes=["n2n-bs"], replicate=2, workers=1)
    assert again == (runs, success_series, messages_series), "sweep not reproducible"
    print("sweep: grid runs aggregate to stable CSV")


def check_validation(mod):
    cfg = make_config(mod, "n2n-uav-bc", 20, 1)
    cfg.n_uavs = 0
    try:
        mod.run(cfg)
        raise AssertionError("UAV scheme without UAVs should not validate")
    except ValueError:
        pass
    try:
        cfg.scheme = "carrier-pigeon"
        raise AssertionError("unknown scheme name accepted")
    except ValueError:
        pass
    bad = mod.default_config_toml().replace("duration_s = 60.0", "duration_s = -1.0")
    try:
        mod.Config.from_toml(bad)
        raise AssertionError("negative duration accepted")
    except ValueError:
        pass
    print("validation: bad configs are rejected with ValueError")


def main():
    mod = import_module()
    assert mod.schemes() == ["n2n-bs", "n2n-uav-no-bc", "n2n-uav-bc"]
    assert "schema_version" in mod.default_config_toml()
    roundtrip = mod.Config.from_toml(mod.Config().to_toml())
    assert roundtrip.n_nodes == mod.Config().n_nodes

    check_determinism(mod)
    check_conservation(mod)
    check_scheme_ordering(mod)
    check_ledger(mod)
    check_sweep(mod)
    check_validation(mod)
    print("smoke test passed")


if __name__ == "__main__":
    main()
