"""Command-line interface.

Exit status: 0 for sat, nonempty or positive; 1 for unsat, empty or
negative; 2 when a search budget ran out; 3 for bad input.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from .formula import ParseError, in_dialect, parse, to_text
from .generate import all_formulas_up_to, random_corpus
from .regex import RegexError, emptiness, parse_regex_file
from .semantics import brute_force_sat
from .solver import (
    Certificate,
    SearchConfig,
    SearchOrder,
    Status,
    TraceError,
    check_certificate,
    reconstruct_compass,
    solve,
)
from .tiling import TilingError, TilingInstance, brute_force_tiling, decode_model, encode, oracle_cap

EXIT_POSITIVE, EXIT_NEGATIVE, EXIT_EXHAUSTED, EXIT_INPUT = 0, 1, 2, 3

STATUS_EXIT = {Status.SAT: EXIT_POSITIVE, Status.UNSAT: EXIT_NEGATIVE, Status.EXHAUSTED: EXIT_EXHAUSTED}


class InputError(click.ClickException):
    exit_code = EXIT_INPUT


def _emit(data: dict, as_json: bool, text: str) -> None:
    click.echo(json.dumps(data, sort_keys=True, indent=2) if as_json else text)


def _read(path: str) -> str:
    try:
        return Path(path).read_text() if path != "-" else sys.stdin.read()
    except OSError as exc:
        raise InputError(str(exc)) from None


def _formula(path: str, dialect: str):
    text = "\n".join(ln for ln in _read(path).splitlines() if not ln.lstrip().startswith("#"))
    try:
        f = parse(text, dialect)
    except ParseError as exc:
        raise InputError(str(exc)) from None
    if not in_dialect(f, dialect):
        raise InputError(f"formula uses operators outside {dialect}")
    return f


def _config(max_states: int, max_queue: int, order: str) -> SearchConfig:
    try:
        return SearchConfig(max_states=max_states, max_queue=max_queue, order=SearchOrder(order))
    except ValueError as exc:
        raise InputError(str(exc)) from None


dialect_opt = click.option("--dialect", type=click.Choice(["bd", "abd"]), default="bd", show_default=True)
json_opt = click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")


def budget_opts(fn):
    fn = click.option("--order", type=click.Choice(["bfs", "dfs"]), default="bfs", show_default=True)(fn)
    fn = click.option("--max-queue", type=int, default=1_000_000, show_default=True)(fn)
    fn = click.option("--max-states", type=int, default=200_000, show_default=True)(fn)
    return fn


@click.group()
def cli() -> None:
    """Satisfiability tools for the BD and ABD interval logics over finite orders."""


@cli.command()
@click.argument("path")
@dialect_opt
@budget_opts
@json_opt
def sat(path: str, dialect: str, max_states: int, max_queue: int, order: str, as_json: bool) -> None:
    """Decide a formula read from PATH ('-' for stdin)."""
    f = _formula(path, dialect)
    v = solve(f, dialect, _config(max_states, max_queue, order))
    data = {"formula": to_text(f), "dialect": dialect, **v.to_dict()}
    text = v.status.value
    if v.certificate is not None:
        text += f" N={v.certificate.height}"
    _emit(data, as_json, text)
    sys.exit(STATUS_EXIT[v.status])


@cli.command()
@click.argument("path")
@dialect_opt
@click.option("--max-n", type=int, default=5, show_default=True)
@json_opt
def oracle(path: str, dialect: str, max_n: int, as_json: bool) -> None:
    """Search models with at most MAX_N + 1 points."""
    f = _formula(path, dialect)
    try:
        m = brute_force_sat(f, max_n, dialect)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    data = {"formula": to_text(f), "dialect": dialect, "max_n": max_n,
            "status": "sat" if m is not None else "none",
            "model": json.loads(m.to_json()) if m is not None else None}
    _emit(data, as_json, f"sat N={m.N}" if m is not None else f"no model up to N={max_n}")
    sys.exit(EXIT_POSITIVE if m is not None else EXIT_NEGATIVE)


def _corpus(spec: str, seed: int, letters: list[str], dialect: str):
    kind, _, rest = spec.partition(":")
    try:
        if kind == "exhaustive":
            return all_formulas_up_to(int(rest), letters, dialect)
        if kind == "random":
            count, size = (int(x) for x in rest.split(":"))
            return random_corpus(seed, count, size, letters, dialect)
    except ValueError:
        pass
    raise InputError(f"corpus must be 'exhaustive:SIZE' or 'random:COUNT:SIZE', got {spec!r}")


def check_one(f, dialect: str, cfg: SearchConfig, max_n: int) -> tuple[str, dict, bool]:
    """Solver and oracle on one formula: outcome, report entry, certificate failure."""
    v = solve(f, dialect, cfg)
    m = brute_force_sat(f, max_n, dialect)
    entry = {"formula": to_text(f), "solver": v.status.value,
             "oracle_n": m.N if m is not None else None}
    bad = False
    if v.certificate is not None:
        entry["solver_n"] = v.certificate.height
        if check_certificate(v.certificate):
            bad = True
            entry["bad_certificate"] = True
    if v.status is Status.EXHAUSTED:
        outcome = "exhausted"
    elif v.sat and m is None and v.certificate.height > max_n:
        outcome = "beyond_cap"
    elif v.sat == (m is not None) and (not v.sat or v.certificate.height == m.N):
        outcome = "agree"
    else:
        outcome = "disagree"
    return outcome, entry, bad


def crosscheck_corpus(formulas, dialect: str, cfg: SearchConfig, max_n: int, jobs: int = 1) -> dict:
    """Compare solver and oracle on each formula; deterministic summary.

    With ``jobs > 1`` items run in worker processes; results are collected
    in corpus order, so the report does not depend on scheduling.
    """
    args = ([dialect] * len(formulas), [cfg] * len(formulas), [max_n] * len(formulas))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(check_one, formulas, *args, chunksize=16))
    else:
        results = list(map(check_one, formulas, *args))
    rows = []
    counts = {"agree": 0, "disagree": 0, "exhausted": 0, "beyond_cap": 0, "bad_certificate": 0}
    for outcome, entry, bad in results:
        counts[outcome] += 1
        counts["bad_certificate"] += bad
        if outcome != "agree":
            entry["outcome"] = outcome
            rows.append(entry)
    return {"total": len(formulas), **counts, "issues": rows}


@cli.command()
@click.option("--corpus", "spec", default="exhaustive:5", show_default=True,
              help="'exhaustive:SIZE' or 'random:COUNT:SIZE'.")
@click.option("--letters", default="p", show_default=True, help="Comma-separated letters.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--budget", type=int, default=200_000, show_default=True, help="Solver state budget.")
@click.option("--max-n", type=int, default=6, show_default=True, help="Oracle model size cap.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes.")
@dialect_opt
@json_opt
def crosscheck(spec: str, letters: str, seed: int, budget: int, max_n: int, jobs: int, dialect: str,
               as_json: bool) -> None:
    """Differential run of the solver against the brute-force oracle."""
    names = [x.strip() for x in letters.split(",") if x.strip()]
    if not names:
        raise InputError("need at least one letter")
    if jobs < 1:
        raise InputError("--jobs must be at least 1")
    formulas = _corpus(spec, seed, names, dialect)
    report = crosscheck_corpus(formulas, dialect, _config(budget, 1_000_000, "bfs"), max_n, jobs)
    report.update({"corpus": spec, "letters": names, "seed": seed, "dialect": dialect, "max_n": max_n})
    text = (f"{report['total']} formulas: {report['agree']} agree, {report['disagree']} disagree, "
            f"{report['exhausted']} exhausted, {report['beyond_cap']} beyond cap, "
            f"{report['bad_certificate']} bad certificates")
    _emit(report, as_json, text)
    if report["disagree"] or report["bad_certificate"]:
        sys.exit(EXIT_NEGATIVE)
    sys.exit(EXIT_EXHAUSTED if report["exhausted"] else EXIT_POSITIVE)


@cli.command("regex-empty")
@click.argument("path")
@budget_opts
@json_opt
def regex_empty(path: str, max_states: int, max_queue: int, order: str, as_json: bool) -> None:
    """Decide whether the expression in PATH has an empty language."""
    try:
        alphabet, e = parse_regex_file(_read(path))
    except RegexError as exc:
        raise InputError(str(exc)) from None
    r = emptiness(e, alphabet, _config(max_states, max_queue, order))
    status = r.verdict.status
    label = {Status.SAT: "nonempty", Status.UNSAT: "empty", Status.EXHAUSTED: "exhausted"}[status]
    data = {"expression": str(e), "alphabet": alphabet, "status": label,
            "witness": "".join(r.witness) if r.witness else None,
            "stats": r.verdict.stats.to_dict()}
    _emit(data, as_json, label + (f" {''.join(r.witness)}" if r.witness else ""))
    sys.exit(STATUS_EXIT[status])


def _instance(path: str) -> TilingInstance:
    try:
        return TilingInstance.parse(_read(path))
    except TilingError as exc:
        raise InputError(str(exc)) from None


@cli.command("tile-encode")
@click.argument("path")
@json_opt
def tile_encode(path: str, as_json: bool) -> None:
    """Print the ABD formula of a tiling instance."""
    inst = _instance(path)
    text = to_text(encode(inst))
    _emit({"formula": text, "dialect": "abd"}, as_json, text)


@cli.command("tile-check")
@click.argument("path")
@click.option("--max-prefix", type=int, default=0, show_default=True)
@click.option("--max-period", type=int, default=1, show_default=True)
@click.option("--oracle/--no-oracle", "use_oracle", default=False,
              help="Also search models of the encoding up to the matching size.")
@json_opt
def tile_check(path: str, max_prefix: int, max_period: int, use_oracle: bool, as_json: bool) -> None:
    """Search a tiling within the bounds; optionally compare with the encoding."""
    inst = _instance(path)
    if max_prefix < 0 or max_period < 1:
        raise InputError("need max-prefix >= 0 and max-period >= 1")
    w = brute_force_tiling(inst, max_prefix, max_period)
    data: dict = {"positive": w is not None, "witness": w.to_dict() if w else None}
    text = "positive" if w else "negative"
    if use_oracle:
        cap = oracle_cap(inst, max_prefix, max_period)
        m = brute_force_sat(encode(inst), cap, "abd")
        data["oracle"] = {"max_n": cap, "sat": m is not None}
        if m is not None:
            decoded = decode_model(m, inst)
            data["oracle"]["decoded"] = decoded.to_dict()
            data["oracle"]["decoded_problems"] = decoded.problems(inst)
        agree = (m is not None) == (w is not None)
        data["agree"] = agree
        text += f"; oracle {'sat' if m is not None else 'none'} up to N={cap}"
    _emit(data, as_json, text)
    sys.exit(EXIT_POSITIVE if w else EXIT_NEGATIVE)


@cli.command("compass-dump")
@click.argument("path")
@click.option("--format", "fmt", type=click.Choice(["text", "dot", "json"]), default="text", show_default=True)
def compass_dump(path: str, fmt: str) -> None:
    """Render the compass of a certificate (as written by 'sat --json')."""
    try:
        data = json.loads(_read(path))
        cert = Certificate.from_dict(data.get("certificate", data))
        compass = reconstruct_compass(cert)
    except (ValueError, KeyError, TypeError, ParseError, TraceError) as exc:
        raise InputError(f"bad certificate: {exc}") from None
    if fmt == "json":
        click.echo(json.dumps(json.loads(compass.to_json()), sort_keys=True, indent=2))
    elif fmt == "dot":
        click.echo(compass.to_dot())
    else:
        click.echo(compass.render())
        for i, a in enumerate(compass.atoms()):
            click.echo(f"{i}: {' '.join(a.member_list())}")


def main(argv: list[str] | None = None) -> None:
    """Entry point; usage errors exit with the input-error status instead of click's 2."""
    try:
        cli.main(args=argv, prog_name="homsat", standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_INPUT)
    except click.Abort:
        sys.exit(EXIT_INPUT)
    sys.exit(EXIT_POSITIVE)


if __name__ == "__main__":
    main()
