"""Command-line front end.

Human-readable output labels players from 1, matching how tournaments are
usually drawn; ``--i``, ``--j`` and ``--members`` take the same 1-based
labels.  Files (tournaments, gain reports, support files) keep 0-based
indices.  Wall time goes to stderr so stdout is byte-identical between runs.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .coupling import COUPLING_LIMIT, naive_sigma_j, sigma_j, verify_tournament
from .distribution import WinDistribution, format_fraction
from .errors import (
    InvalidParameters,
    LimitExceeded,
    MatchfixError,
    ParseError,
    VerificationFailure,
)
from .manipulation import (
    EXPAND_PAIR_LIMIT,
    RandomizedTournament,
    caterpillar_bound_variants,
    coalition_gain,
    format_gain_report,
    from_match_probabilities,
    pair_gain,
    parse_match_probabilities,
    parse_support,
    randomized_pair_gain,
    sampled_pair_gain,
    scan_alpha,
    scan_limit,
)
from .rules import RULE_NAMES, get_rule, iter_rules
from .tournament import (
    Coalition,
    Tournament,
    enumerate_tournaments,
    format_tournament,
    generate_witness,
    num_pairs,
    parse_tournament,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_LIMIT = 4
EXIT_VERIFY = 5
EXIT_INPUT = 6

# default number of tournaments checked exhaustively by coupling-verify
COUPLING_ENUM_LIMIT = 4


@dataclass
class RunConfig:
    command: str
    rules: list[str] = field(default_factory=list)
    n: int | None = None
    k: int | None = None
    input: str | None = None
    p_matrix: str | None = None
    output: str | None = None
    format: str = "table"
    seed: int | None = None
    samples: int | None = None
    jobs: int = 1
    limit_override: int | None = None
    i: int | None = None
    j: int | None = None
    members: list[int] | None = None
    family: str | None = None
    sigma_j_variant: str = "full"


@dataclass
class Output:
    """What a subcommand produced, in every supported rendering."""

    lines: list[str]
    results: object
    header: list[str] | None = None
    rows: list[list] | None = None
    exit_code: int = EXIT_OK


def _label(p: int, dist_n: int) -> str:
    return f"player {p + 1}" if p < dist_n else f"dummy {p + 1}"


def _player(label: int | None, n: int, flag: str) -> int:
    if label is None:
        raise InvalidParameters(f"{flag} is required")
    if not 1 <= label <= n:
        raise InvalidParameters(f"{flag} must be between 1 and {n}, got {label}")
    return label - 1


def _read_tournament(cfg: RunConfig) -> Tournament:
    if cfg.input:
        return parse_tournament(Path(cfg.input).read_text())
    if cfg.family:
        return generate_witness(cfg.family, cfg.n, cfg.k)
    raise InvalidParameters("give a tournament with --in or generate one with --family/--n")


def _decimal(x: Fraction) -> str:
    return f"{float(x):.6f}"


def cmd_winprob(cfg: RunConfig) -> Output:
    t = _read_tournament(cfg)
    lines, rows, results = [], [], []
    for rule in iter_rules(cfg.rules):
        d: WinDistribution = rule(t)
        lines.append(f"rule {rule.name}")
        entry = []
        for p, x in enumerate(d.probs):
            lines.append(f"  {_label(p, d.n)}: {format_fraction(x)}")
            rows.append([rule.name, p + 1, "dummy" if p >= d.n else "player", format_fraction(x)])
            entry.append(format_fraction(x))
        results.append({"rule": rule.name, "players": d.n, "dummies": d.dummies, "probabilities": entry})
    return Output(lines, results, ["rule", "player", "kind", "probability"], rows)


def _gain_output(reports) -> Output:
    lines, rows, results = [], [], []
    for rep in reports:
        members = [p + 1 for p in rep.coalition.members]
        lines.append(f"rule {rep.rule} coalition {{{', '.join(map(str, members))}}}: gain {format_fraction(rep.total_gain)}")
        for p, d in zip(rep.coalition.members, rep.per_player_delta):
            lines.append(f"  player {p + 1}: {format_fraction(d)}")
        rows.append([rep.rule, " ".join(map(str, members)), format_fraction(rep.total_gain)])
        results.append({
            "rule": rep.rule,
            "coalition": members,
            "total_gain": format_fraction(rep.total_gain),
            "per_player_delta": [format_fraction(d) for d in rep.per_player_delta],
            "manipulated": format_tournament(rep.manipulated),
        })
    return Output(lines, results, ["rule", "coalition", "gain"], rows)


def cmd_gain(cfg: RunConfig) -> Output:
    t = _read_tournament(cfg)
    i, j = _player(cfg.i, t.n, "--i"), _player(cfg.j, t.n, "--j")
    return _gain_output([pair_gain(rule, t, i, j) for rule in iter_rules(cfg.rules)])


def cmd_coalition(cfg: RunConfig) -> Output:
    t = _read_tournament(cfg)
    if not cfg.members:
        raise InvalidParameters("--members is required")
    members = Coalition(tuple(_player(m, t.n, "--members") for m in cfg.members))
    return _gain_output([coalition_gain(rule, t, members) for rule in iter_rules(cfg.rules)])


def _limit(cfg: RunConfig, default: int) -> int:
    return default if cfg.limit_override is None else cfg.limit_override


def cmd_scan(cfg: RunConfig) -> Output:
    if cfg.n is None:
        raise InvalidParameters("--n is required")
    k = cfg.k or 2
    lines, rows, results, witnesses = [], [], [], []
    for rule in iter_rules(cfg.rules):
        res = scan_alpha(rule, cfg.n, k, jobs=cfg.jobs, limit=_limit(cfg, scan_limit(k)))
        w = res.witness
        members = [p + 1 for p in w.coalition.members]
        lines.append(
            f"rule {rule.name} n={cfg.n} k={k}: alpha {format_fraction(res.alpha)} ({_decimal(res.alpha)}) "
            f"over {res.tournaments} tournaments; witness base {w.base.bits} coalition {{{', '.join(map(str, members))}}}"
        )
        rows.append([rule.name, cfg.n, k, format_fraction(res.alpha), _decimal(res.alpha), res.tournaments, w.base.bits,
                     " ".join(map(str, members))])
        results.append({
            "rule": rule.name, "n": cfg.n, "k": k,
            "alpha": format_fraction(res.alpha), "alpha_decimal": _decimal(res.alpha),
            "tournaments": res.tournaments,
            "witness": {"base_bits": w.base.bits, "coalition": members, "report": format_gain_report(w)},
        })
        witnesses.append(format_gain_report(w))
    if cfg.output and cfg.format == "table":
        # the summary goes to stdout; the file gets the witness reports
        Path(cfg.output).write_text("\n".join(witnesses))
    return Output(lines, results, ["rule", "n", "k", "alpha", "alpha_decimal", "tournaments", "witness_bits", "witness_coalition"], rows)


def _seeded_tournament(n: int, seed: int, index: int) -> Tournament:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))
    return Tournament(n, int(rng.integers(0, 1 << num_pairs(n))))


def _verify_one(args):
    t, variant, limit = args
    return verify_tournament(t, naive_sigma_j if variant == "naive" else sigma_j, limit)


def cmd_coupling(cfg: RunConfig) -> Output:
    limit = _limit(cfg, COUPLING_LIMIT)
    if cfg.input:
        tournaments = [parse_tournament(Path(cfg.input).read_text())]
    elif cfg.family:
        tournaments = [generate_witness(cfg.family, cfg.n, cfg.k)]
    elif cfg.n is None:
        raise InvalidParameters("give --in, --family or --n")
    elif cfg.samples is not None:
        if cfg.seed is None:
            raise InvalidParameters("--samples needs --seed")
        tournaments = [_seeded_tournament(cfg.n, cfg.seed, s) for s in range(cfg.samples)]
    else:
        enum_limit = COUPLING_ENUM_LIMIT if cfg.limit_override is None else cfg.n
        if cfg.n > enum_limit:
            raise LimitExceeded(f"exhaustive coupling check at n={cfg.n} exceeds {enum_limit}; use --samples")
        tournaments = list(enumerate_tournaments(cfg.n))
    work = [(t, cfg.sigma_j_variant, limit) for t in tournaments]
    if cfg.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            per_t = list(pool.map(_verify_one, work))
    else:
        per_t = [_verify_one(w) for w in work]
    lines, rows, results = [], [], []
    failed = 0
    for t, records in zip(tournaments, per_t):
        for rec in records:
            status = "pass" if rec.passed else "FAIL"
            failed += not rec.passed
            rows.append([t.n, t.bits, rec.i + 1, rec.j + 1, rec.total, rec.bad, rec.good, rec.shared_images,
                         format_fraction(rec.pair_gain), status])
            d = rec.as_dict()
            d.update(tournament_n=t.n, tournament_bits=t.bits, i=rec.i + 1, j=rec.j + 1)
            results.append(d)
            if not rec.passed:
                lines.append(f"tournament {t.bits} (n={t.n}) pair i={rec.i + 1} j={rec.j + 1}: FAIL "
                             f"[{', '.join(k for k, v in rec.checks.items() if not v)}]")
                lines.extend(f"  {msg}" for msg in rec.failures)
    total = sum(len(r) for r in per_t)
    lines.append(f"{len(tournaments)} tournaments, {total} pairs, {total - failed} passed, {failed} failed")
    out = Output(lines, results, ["n", "bits", "i", "j", "brackets", "bad", "good", "shared_images", "pair_gain", "status"], rows)
    if failed:
        out.exit_code = EXIT_VERIFY
    return out


def cmd_witness(cfg: RunConfig) -> Output:
    if not cfg.family or cfg.n is None:
        raise InvalidParameters("--family and --n are required")
    t = generate_witness(cfg.family, cfg.n, cfg.k)
    text = format_tournament(t)
    return Output(text.rstrip("\n").split("\n"), {"family": cfg.family, "n": t.n, "tournament": text})


def cmd_random_model(cfg: RunConfig) -> Output:
    if cfg.input:
        rt = parse_support(Path(cfg.input).read_text())
        n, p = rt.n, None
    elif cfg.p_matrix:
        p = parse_match_probabilities(Path(cfg.p_matrix).read_text())
        n, rt = len(p), None
        if num_pairs(n) <= EXPAND_PAIR_LIMIT:
            rt = from_match_probabilities(p)
    else:
        raise InvalidParameters("give a support file with --in or a probability matrix with --p-matrix")
    i, j = _player(cfg.i, n, "--i"), _player(cfg.j, n, "--j")
    lines, rows, results = [], [], []
    for rule in iter_rules(cfg.rules):
        if rt is not None:
            g = randomized_pair_gain(rule, rt, i, j)
            value, kind = format_fraction(g), "exact"
        else:
            if cfg.seed is None or cfg.samples is None:
                raise InvalidParameters("sampling needs --seed and --samples")
            value, kind = f"{sampled_pair_gain(rule, p, i, j, cfg.samples, cfg.seed):.6f}", "approximate"
        lines.append(f"rule {rule.name} pair i={i + 1} j={j + 1}: expected gain {value} ({kind})")
        rows.append([rule.name, i + 1, j + 1, value, kind])
        results.append({"rule": rule.name, "i": i + 1, "j": j + 1, "expected_gain": value, "kind": kind})
    return Output(lines, results, ["rule", "i", "j", "expected_gain", "kind"], rows)


COMMANDS = {
    "winprob": cmd_winprob,
    "gain": cmd_gain,
    "coalition": cmd_coalition,
    "scan": cmd_scan,
    "coupling-verify": cmd_coupling,
    "witness": cmd_witness,
    "random-model": cmd_random_model,
}


def _members(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad member list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matchfix", description="Manipulability of tournament rules.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rule", action="append", dest="rules", default=[], choices=RULE_NAMES,
                        help="rule to evaluate (repeatable; default: all)")
    common.add_argument("--n", type=int)
    common.add_argument("--k", type=int)
    common.add_argument("--in", dest="input", help="tournament or support file")
    common.add_argument("--out", dest="output", help="write the rendered output here instead of stdout")
    common.add_argument("--format", choices=("table", "csv", "json"), default="table")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--limit-override", type=int, help="raise an exhaustive-size limit")
    common.add_argument("--i-know-this-is-big", action="store_true", help="required with --limit-override")
    common.add_argument("--i", type=int, help="1-based player label")
    common.add_argument("--j", type=int, help="1-based player label")
    common.add_argument("--members", type=_members, help="1-based labels, e.g. 1,2,3")
    common.add_argument("--family", help="witness family: three-cycle-padded, cyclic-odd, superman-kryptonite")
    common.add_argument("--p-matrix", help="file of independent match probabilities")
    common.add_argument("--sigma-j-variant", choices=("full", "naive"), default="full", help=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def parse_config(argv) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.limit_override is not None and not ns.i_know_this_is_big:
        parser.error("--limit-override requires --i-know-this-is-big")
    if ns.jobs < 1:
        parser.error("--jobs must be at least 1")
    values = vars(ns)
    values.pop("i_know_this_is_big")
    return RunConfig(**values)


def render(out: Output, cfg: RunConfig) -> str:
    if cfg.format == "json":
        doc = {"tool": "matchfix", "version": __version__, "config": asdict(cfg), "results": out.results}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if cfg.format == "csv":
        if out.header is None:
            raise InvalidParameters(f"{cfg.command} output is not a table; use --format table or json")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(out.header)
        writer.writerows(out.rows)
        return buf.getvalue()
    return "\n".join(out.lines) + "\n"


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        out = COMMANDS[cfg.command](cfg)
        text = render(out, cfg)
    except ParseError as exc:
        print(f"parse error: {exc}", file=stderr)
        return EXIT_PARSE
    except LimitExceeded as exc:
        print(f"limit exceeded: {exc} (see --limit-override)", file=stderr)
        return EXIT_LIMIT
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=stderr)
        return EXIT_VERIFY
    except (MatchfixError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    if cfg.output and not (cfg.command == "scan" and cfg.format == "table"):
        Path(cfg.output).write_text(text)
    else:
        stdout.write(text)
    print(f"wall time {time.perf_counter() - start:.3f}s", file=stderr)
    return out.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
