"""Command line front end.

Four subcommands cover the library surface: codebook (emit codeword
tables), channel (per-slot arrival coefficients), isi (closed-form and
Monte Carlo interference lag profiles) and simulate (character error rates
across codebooks and molecule budgets). All output is CSV with stable
formatting: runs with equal inputs produce byte-identical files. Summary
statistics and progress go to stderr, never into the CSV.

Exit codes: 0 success (including partial simulate results), 2 usage or
configuration problems, 3 an internal invariant failure.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import Sequence

import yaml

from . import channel as channel_mod
from . import codebooks, isi_analysis, mc_sim

__all__ = ["main", "load_config", "DEFAULTS"]

#: Built-in defaults; a config file and command line flags override them.
#: The channel block is the reference link geometry (micrometers and
#: seconds); the simulate budget grid covers the molecule range where the
#: link operates between roughly 2 and 30 percent character errors.
DEFAULTS: dict = {
    "channel": {
        "diffusion": 79.4,        # um^2 / s
        "distance": 4.0,          # um
        "receiver_radius": 2.0,   # um
        "memory": 10,
    },
    "link": {
        "chars_per_second": 2.0,
        "char_duration": None,    # seconds; alternative to chars_per_second
        "msg_len": 10,
    },
    "simulate": {
        "trials": 100_000,
        "seed": 1,
        "budgets": [50, 70, 85, 100, 120],   # molecules per character
        "kinds": ["huffman", "proposed", "ita2"],
    },
    "distribution": None,  # path to a CSV; None means the built-in English letters
}

_BUILDERS = {
    "huffman": codebooks.build_huffman,
    "proposed": codebooks.build_proposed,
    "ita2": lambda dist: codebooks.ita2(),
}

_PLOT_STUB = """\
#!/usr/bin/env python3
\"\"\"Plot character error rate against molecules per character.

Reads the CSV produced by `molcode simulate` (path as the only argument)
and draws one line per codebook on a log-scale error axis.
\"\"\"
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

series = defaultdict(list)
with open(sys.argv[1], newline="") as fh:
    for row in csv.DictReader(fh):
        if row["cer"] and not row["cer"].startswith("error:"):
            series[row["codebook"]].append(
                (float(row["molecules_per_char"]), float(row["cer"]))
            )

for name, points in sorted(series.items()):
    points.sort()
    plt.plot(*zip(*points), marker="o", label=name)
plt.xlabel("molecules per character")
plt.ylabel("character error rate")
plt.yscale("log")
plt.legend()
plt.grid(True, which="both", alpha=0.3)
plt.tight_layout()
plt.savefig(sys.argv[2] if len(sys.argv) > 2 else "cer_vs_budget.png", dpi=150)
"""


def load_config(path: str | None) -> dict:
    """DEFAULTS with the sections of a YAML file merged on top."""
    cfg = {
        "channel": dict(DEFAULTS["channel"]),
        "link": dict(DEFAULTS["link"]),
        "simulate": dict(DEFAULTS["simulate"]),
        "distribution": DEFAULTS["distribution"],
    }
    if path is None:
        return cfg
    raw = yaml.safe_load(Path(path).read_text())
    if raw is None:
        return cfg
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a mapping")
    unknown = set(raw) - {"channel", "link", "simulate", "distribution"}
    if unknown:
        raise ValueError(f"{path}: unknown config sections: {sorted(unknown)}")
    for section in ("channel", "link", "simulate"):
        if section in raw:
            if not isinstance(raw[section], dict):
                raise ValueError(f"{path}: section {section!r} must be a mapping")
            bad = set(raw[section]) - set(cfg[section])
            if bad:
                raise ValueError(f"{path}: unknown keys in {section!r}: {sorted(bad)}")
            cfg[section].update(raw[section])
    link = raw.get("link", {})
    if link.get("chars_per_second") is not None and link.get("char_duration") is not None:
        raise ValueError(f"{path}: give chars_per_second or char_duration, not both")
    if "distribution" in raw:
        cfg["distribution"] = raw["distribution"]
    return cfg


def _char_duration(cfg: dict) -> float:
    link = cfg["link"]
    if link.get("char_duration") is not None:
        duration = float(link["char_duration"])
    else:
        duration = 1.0 / float(link["chars_per_second"])
    if duration <= 0:
        raise ValueError("character duration must be positive")
    return duration


def _distribution(cfg: dict) -> codebooks.CharacterDistribution:
    if cfg["distribution"] is None:
        return codebooks.english_letter_distribution()
    return codebooks.load_distribution(cfg["distribution"])


def _channel_params(cfg: dict) -> channel_mod.ChannelParams:
    c = cfg["channel"]
    return channel_mod.ChannelParams(
        diffusion=float(c["diffusion"]),
        distance=float(c["distance"]),
        receiver_radius=float(c["receiver_radius"]),
    )


def _write_rows(path: str | None, header: list[str], rows: list[list]) -> None:
    if path is None:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_kinds(kinds: list[str]) -> list[str]:
    if kinds == ["all"]:
        return sorted(_BUILDERS)
    for kind in kinds:
        if kind not in _BUILDERS:
            raise ValueError(f"unknown codebook kind {kind!r}")
    return kinds


def _cmd_codebook(args, cfg: dict) -> int:
    dist = _distribution(cfg)
    rows = []
    for kind in _parse_kinds(args.kinds):
        if kind == "ita2" and set(dist.symbols) != set(codebooks.ita2().symbols):
            _note("warning: ita2 skipped, its alphabet is fixed to the 26 English letters")
            continue
        cb = _BUILDERS[kind](dist)
        report = codebooks.validate(cb)
        if not report.ok:
            raise RuntimeError(f"generated {kind} codebook failed validation: {report.issues}")
        for sym in cb.codewords:
            rows.append([kind, sym, cb.codewords[sym], repr(dist.prob(sym))])
        _note(
            f"{kind}: expected length {codebooks.expected_length(cb, dist):.6f}, "
            f"expected ones {codebooks.expected_ones(cb, dist):.6f}, "
            f"Kraft sum {float(cb.kraft_sum()):.6f}"
        )
    _write_rows(args.out, ["codebook", "symbol", "codeword", "probability"], rows)
    return 0


def _cmd_channel(args, cfg: dict) -> int:
    params = _channel_params(cfg)
    memory = int(cfg["channel"]["memory"])
    if args.slot is not None:
        slot = args.slot
    else:
        dist = _distribution(cfg)
        cb = _BUILDERS[args.kind](dist)
        slot = _char_duration(cfg) / codebooks.expected_length(cb, dist)
    coeffs = channel_mod.channel_coefficients(params, slot, memory)
    rows = [[k + 1, repr(a)] for k, a in enumerate(coeffs)]
    _note(
        f"slot {slot:.6f} s, peak time {channel_mod.peak_time(params):.6f} s, "
        f"min usable slot {channel_mod.min_symbol_slot(params, memory):.6f} s, "
        f"window hit probability "
        f"{channel_mod.hit_probability(params, memory * slot):.6f}"
    )
    _write_rows(args.out, ["k", "a_k"], rows)
    return 0


def _cmd_isi(args, cfg: dict) -> int:
    import numpy as np

    dist = _distribution(cfg)
    rows = []
    for kind in _parse_kinds(args.kinds):
        cb = _BUILDERS[kind](dist)
        corrected = kind == "proposed"
        exact = isi_analysis.expected_isi_bit0(
            cb, dist, memory=args.memory, corrected=corrected
        )
        oracle = isi_analysis.isi_oracle(
            cb,
            dist,
            memory=args.memory,
            corrected=corrected,
            samples=args.oracle_samples,
            rng=np.random.default_rng(np.random.SeedSequence((args.seed, 0x151))),
        )
        for j in sorted(exact.coefficients):
            rows.append([
                kind,
                j,
                repr(exact.coefficients[j]),
                repr(exact.p0),
                "corrected" if corrected else "uncorrected",
                repr(oracle.coefficients[j]),
                repr(oracle.stderr[j]),
            ])
    _write_rows(
        args.out,
        ["codebook", "j", "coefficient", "p0", "variant", "oracle", "oracle_stderr"],
        rows,
    )
    return 0


def _cmd_simulate(args, cfg: dict) -> int:
    dist = _distribution(cfg)
    params = _channel_params(cfg)
    sim = cfg["simulate"]
    trials = args.trials if args.trials is not None else int(sim["trials"])
    seed = args.seed if args.seed is not None else int(sim["seed"])
    budgets = args.budgets if args.budgets is not None else [float(b) for b in sim["budgets"]]
    kinds = _parse_kinds(args.kinds if args.kinds is not None else list(sim["kinds"]))
    if any(b < 0 for b in budgets):
        raise ValueError("budgets must be non-negative")

    def progress(row: dict) -> None:
        state = f"cer {row['cer']:.6f}" if row["error"] is None else row["error"]
        _note(f"done {row['codebook']:9s} at {row['molecules_per_char']:g} "
              f"molecules/char: {state}")

    rows = mc_sim.sweep(
        dist,
        params,
        budgets=budgets,
        trials=trials,
        master_seed=seed,
        kinds=kinds,
        chars_per_second=1.0 / _char_duration(cfg),
        msg_len=int(cfg["link"]["msg_len"]),
        memory=int(cfg["channel"]["memory"]),
        threads=args.threads,
        progress=progress,
    )
    out_rows = []
    for row in rows:
        out_rows.append([
            row["codebook"],
            _fmt(row["molecules_per_char"]),
            row["N_bit1"],
            _fmt(row["t_s"]),
            _fmt(row["tau"]),
            _fmt(row["cer"]),
            row["trials"],
            row["seed"],
            row["error"] or "",
        ])
    _write_rows(
        args.out,
        ["codebook", "molecules_per_char", "N_bit1", "t_s", "tau", "cer",
         "trials", "seed", "error"],
        out_rows,
    )
    if args.plot_stub:
        Path(args.plot_stub).write_text(_PLOT_STUB)
        _note(f"wrote plot stub to {args.plot_stub}")
    return 0


def _csv_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _float_list(text: str) -> list[float]:
    return [float(item) for item in _csv_list(text)]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="molcode",
        description="Codebooks, interference analysis and Monte Carlo error "
                    "rates for slotted molecular links.",
    )
    parser.add_argument("--config", help="YAML configuration file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codebook", help="emit codeword tables as CSV")
    p.add_argument("--kinds", type=_csv_list, default=["all"],
                   help="comma separated kinds, or 'all'")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("channel", help="emit per-slot arrival coefficients as CSV")
    p.add_argument("--slot", type=float, help="slot length in seconds")
    p.add_argument("--kind", choices=sorted(_BUILDERS), default="proposed",
                   help="codebook whose character rate sets the slot when --slot is absent")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("isi", help="emit interference lag coefficients as CSV")
    p.add_argument("--memory", type=int, default=3)
    p.add_argument("--kinds", type=_csv_list, default=["huffman", "proposed"])
    p.add_argument("--seed", type=int, default=0, help="seed for the oracle stream")
    p.add_argument("--oracle-samples", type=int, default=1_000_000,
                   help="stream bits for the Monte Carlo cross-check")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("simulate", help="Monte Carlo character error rates as CSV")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--budgets", type=_float_list,
                   help="comma separated molecules per character")
    p.add_argument("--kinds", type=_csv_list)
    p.add_argument("--threads", type=int)
    p.add_argument("--plot-stub", help="also write a matplotlib script to this path")
    p.add_argument("--out", help="output file (default stdout)")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "codebook":
            return _cmd_codebook(args, cfg)
        if args.command == "channel":
            return _cmd_channel(args, cfg)
        if args.command == "isi":
            return _cmd_isi(args, cfg)
        if args.command == "simulate":
            return _cmd_simulate(args, cfg)
        raise AssertionError(f"unreachable command {args.command!r}")
    except (OSError, ValueError, KeyError, TypeError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
