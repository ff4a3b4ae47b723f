"""Seeded experiment runner and command-line entry point.

Every random choice comes from stream(seed, *labels): a Philox generator
keyed by the master seed and a tuple of stream labels, so a trial's draws do
not depend on which other trials ran before it.

Output is one key=value record per line with the summary last. Wall-clock
timings are only printed with --timings, which keeps default output
byte-identical across runs with the same seed.
"""
from __future__ import annotations

import argparse
import configparser
import math
import sys
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .codes import (FrsParams, ListWord, MultParams, as_fraction, dump_codeword, dump_listword,
                    frs_encode, frs_params, load_codeword, load_listword, mult_encode, mult_params,
                    plant_channel, random_multipoly, random_poly)
from .errors import ConfigInvalid, ListRecError
from .gf import prime_field
from .poly import MultiPoly, Poly

FAMILIES = ("frs", "mult", "local", "ael")


def _label_word(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label) & 0xFFFFFFFF
    return zlib.crc32(str(label).encode())


def stream(seed: int, *labels) -> np.random.Generator:
    """Counter-based generator for (master seed, labels)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_label_word(x) for x in labels))
    return np.random.Generator(np.random.Philox(ss))


# records -------------------------------------------------------------------

def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt_value(x) for x in v)
    return str(v)


def format_record(kind: str, **kv) -> str:
    return " ".join([f"record={kind}"] + [f"{k}={_fmt_value(v)}" for k, v in kv.items()])


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return math.nan, math.nan
    p = successes / trials
    den = 1 + z * z / trials
    mid = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


@dataclass
class TrialRecord:
    trial: int
    planted: str
    success: bool
    list_size: int
    timings: dict = field(default_factory=dict)
    queries: int | None = None

    def line(self, timings: bool = False) -> str:
        kv = dict(trial=self.trial, planted=self.planted, success=self.success, list_size=self.list_size)
        if self.queries is not None:
            kv["queries"] = self.queries
        if timings:
            kv.update({f"t_{k}": v for k, v in self.timings.items()})
        return format_record("trial", **kv)


def summary_line(records: Sequence[TrialRecord]) -> str:
    n = len(records)
    ok = sum(r.success for r in records)
    if n == 0:
        return format_record("summary", trials=0, successes=0, rate="NA", ci_low="NA", ci_high="NA",
                             mean_list_size="NA")
    lo, hi = wilson_interval(ok, n)
    return format_record("summary", trials=n, successes=ok, rate=ok / n, ci_low=lo, ci_high=hi,
                         mean_list_size=sum(r.list_size for r in records) / n)


# configuration -----------------------------------------------------------------

@dataclass
class ExperimentConfig:
    family: str = "frs"
    q: int = 433
    s: int = 16
    n: int = 27
    d: int = 216
    m: int = 1
    alpha: str = "1/4"
    ell: int = 1
    adversarial: bool = False
    r: int | None = None
    tau: int | None = None
    repetitions: int | None = None
    strict: bool = False
    mode: str = "whole-field"
    trials: int = 10
    seed: int = 0
    out: str | None = None
    # local / ael extras
    alpha_prime: str | None = None
    s_star: int | None = None
    U_size: int | None = None
    K_param: int | None = None
    points: int = 5
    inner_trials: int = 10
    corrupt_blocks: int = 0
    workers: int = 1

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigInvalid(f"family must be one of {FAMILIES}, got {self.family!r}")
        try:
            ctx = prime_field(self.q)
        except ListRecError as e:
            raise ConfigInvalid(f"q={self.q}: {e}") from e
        try:
            a = as_fraction(self.alpha)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigInvalid(f"alpha={self.alpha!r} is not a number") from e
        if not 0 <= a <= 1:
            raise ConfigInvalid(f"alpha={a} outside [0, 1]")
        if self.ell < 1:
            raise ConfigInvalid("ell must be at least 1")
        if self.trials < 0:
            raise ConfigInvalid("trials must be non-negative")
        if self.workers < 1:
            raise ConfigInvalid("workers must be at least 1")
        if self.family in ("frs", "mult", "local"):
            try:
                self.params(ctx)
            except (ValueError, ListRecError) as e:
                raise ConfigInvalid(f"code parameters: {e}") from e
        if self.family == "local" and self.m < 2:
            raise ConfigInvalid("local recovery needs m >= 2")
        if self.family == "mult" and self.m != 1:
            raise ConfigInvalid("the mult family decodes univariate codes (m = 1)")
        if self.mode not in ("whole-field", "small-d"):
            raise ConfigInvalid(f"mode must be whole-field or small-d, got {self.mode!r}")
        for name in ("r", "tau", "repetitions"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigInvalid(f"{name} must be at least 1")

    def params(self, ctx=None) -> FrsParams | MultParams:
        ctx = ctx or prime_field(self.q)
        if self.family == "frs":
            return frs_params(ctx, self.s, self.n, self.d)
        if self.m == 1:
            ev = None if self.n == self.q else range(self.n)
            return mult_params(ctx, self.s, self.d, 1, ev)
        return mult_params(ctx, self.s, self.d, self.m)


_SECTIONS = {
    "code": ("family", "q", "s", "n", "d", "m"),
    "channel": ("alpha", "ell", "adversarial"),
    "decoder": ("r", "tau", "repetitions", "strict", "mode", "alpha_prime", "s_star", "U_size", "K_param"),
    "run": ("trials", "seed", "out", "points", "inner_trials", "corrupt_blocks", "workers"),
}


def _coerce(name: str, raw: str):
    kind = {f.name: f.type for f in fields(ExperimentConfig)}[name]
    if raw.lower() in ("none", ""):
        return None
    if "bool" in str(kind):
        return raw.lower() in ("1", "true", "yes", "on")
    if "int" in str(kind):
        try:
            return int(raw)
        except ValueError as e:
            raise ConfigInvalid(f"{name}={raw!r} is not an integer") from e
    return raw


def load_config(path: str | Path) -> ExperimentConfig:
    """Flat INI file with sections [code], [channel], [decoder], [run]."""
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigInvalid(f"cannot read config {path}")
    kw = {}
    for section in cp.sections():
        allowed = _SECTIONS.get(section)
        if allowed is None:
            raise ConfigInvalid(f"unknown section [{section}]")
        for key, raw in cp.items(section):
            if key not in allowed:
                raise ConfigInvalid(f"unknown key {key!r} in [{section}]")
            kw[key] = _coerce(key, raw)
    return ExperimentConfig(**kw)


# trials ------------------------------------------------------------------------

def _decoys(cfg: ExperimentConfig, params, rng) -> list:
    if not cfg.adversarial:
        return []
    ctx = params.ctx
    enc = frs_encode if isinstance(params, FrsParams) else mult_encode
    return [enc(random_poly(ctx, params.d, rng), params) for _ in range(cfg.ell)]


def _poly_trial(cfg: ExperimentConfig, i: int) -> TrialRecord:
    from .prune import frs_pipeline, mult_pipeline

    params = cfg.params()
    rng = stream(cfg.seed, "trial", i)
    timings = {}
    t0 = time.perf_counter()
    P = random_poly(params.ctx, params.d, rng)
    enc = frs_encode if cfg.family == "frs" else mult_encode
    c = enc(P, params)
    S = plant_channel(c, cfg.alpha, cfg.ell, rng, _decoys(cfg, params, rng))
    timings["plant"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    kw = dict(alpha=cfg.alpha, r=cfg.r, tau=cfg.tau, repetitions=cfg.repetitions, strict=cfg.strict)
    if cfg.family == "frs":
        rec = frs_pipeline(S, params, None, cfg.ell, rng, **kw)
    else:
        rec = mult_pipeline(S, params, None, cfg.ell, rng, cfg.mode, **kw)
    timings["decode"] = time.perf_counter() - t0
    return TrialRecord(i, poly_digest(P), P in rec.candidates, len(rec.candidates), timings)


def _local_cfg(cfg: ExperimentConfig):
    from .local import LocalCfg

    return LocalCfg(cfg.params(), ell=cfg.ell, alpha=as_fraction(cfg.alpha),
                    alpha_prime=as_fraction(cfg.alpha_prime) if cfg.alpha_prime else None,
                    s_star=cfg.s_star, U_size=cfg.U_size, K_param=cfg.K_param, relaxed=not cfg.strict)


def _local_trial(cfg: ExperimentConfig, i: int) -> TrialRecord:
    from .local import QueryCounter, SymbolTable, local_list_recover

    params = cfg.params()
    lcfg = _local_cfg(cfg)
    rng = stream(cfg.seed, "trial", i)
    timings = {}
    t0 = time.perf_counter()
    Q = random_multipoly(params.ctx, params.m, params.d, rng)
    c = mult_encode(Q, params)
    S = plant_channel(c, cfg.alpha, cfg.ell, rng)
    timings["plant"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    counter = QueryCounter()
    decoders = local_list_recover(S, lcfg, stream(cfg.seed, "trial", i, "recover"), counter)
    timings["recover"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    table = SymbolTable(S, params)
    prng = stream(cfg.seed, "trial", i, "points")
    pts = [tuple(int(v) for v in prng.integers(params.q, size=params.m)) for _ in range(cfg.points)]
    best = 0
    queries = counter.count
    for k, dec in enumerate(decoders):
        good = 0
        for x in pts:
            truth = c.symbols[table.index(x)]
            drng = stream(cfg.seed, "trial", i, "decoder", k, *x)
            hits = sum(dec(x, drng) == truth for _ in range(cfg.inner_trials))
            good += 3 * hits >= 2 * cfg.inner_trials
        queries += dec.queries
        best = max(best, good)
    timings["evaluate"] = time.perf_counter() - t0
    success = bool(decoders) and 3 * best >= 2 * len(pts)
    return TrialRecord(i, poly_digest(Q), success, len(decoders), timings, queries)


def _ael_trial(cfg: ExperimentConfig, i: int) -> TrialRecord:
    from .acceptance import ael_fixture, ael_once

    fx = ael_fixture()
    rng = stream(cfg.seed, "trial", i)
    t0 = time.perf_counter()
    ok, size, digest = ael_once(fx, rng, cfg.corrupt_blocks)
    return TrialRecord(i, digest, ok, size, {"decode": time.perf_counter() - t0})


_TRIALS = {"frs": _poly_trial, "mult": _poly_trial, "local": _local_trial, "ael": _ael_trial}


def run_experiment(cfg: ExperimentConfig) -> list[TrialRecord]:
    """Deterministic in (config, seed): trial i only reads stream(seed, 'trial', i, ...).

    With workers > 1 trials run in a process pool; records still come back in trial order.
    """
    cfg.validate()
    fn = _TRIALS[cfg.family]
    if cfg.workers == 1 or cfg.trials < 2:
        return [fn(cfg, i) for i in range(cfg.trials)]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, [cfg] * cfg.trials, range(cfg.trials)))


def poly_digest(P) -> str:
    if isinstance(P, Poly):
        data = ",".join(str(int(c)) for c in P.coeffs)
    else:
        data = ";".join(f"{e}:{int(c)}" for e, c in sorted(P.terms.items()))
    return f"{zlib.crc32(data.encode()):08x}"


# poly files --------------------------------------------------------------------

def dump_poly(P: Poly | MultiPoly) -> str:
    if isinstance(P, Poly):
        return f"kind=poly q={P.ctx.q} m=1\n" + " ".join(str(int(c)) for c in P.coeffs) + "\n"
    body = " ".join(f"{','.join(map(str, e))}:{int(c)}" for e, c in sorted(P.terms.items()))
    return f"kind=poly q={P.ctx.q} m={P.m}\n{body}\n"


def load_poly(text: str) -> Poly | MultiPoly:
    head, _, body = text.partition("\n")
    kv = dict(tok.split("=", 1) for tok in head.split())
    ctx = prime_field(int(kv["q"]))
    m = int(kv["m"])
    toks = body.split()
    if m == 1:
        return Poly(ctx, [int(t) for t in toks])
    terms = {}
    for t in toks:
        e, c = t.split(":")
        terms[tuple(int(v) for v in e.split(","))] = int(c)
    return MultiPoly(ctx, m, terms)


# subcommands -------------------------------------------------------------------

def _emit(text: str, out: str | None, stdout: TextIO) -> None:
    if out:
        Path(out).write_text(text)
    else:
        stdout.write(text)


def _cfg_from_args(args, **over) -> ExperimentConfig:
    base = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    kw = {}
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            kw[f.name] = v
    kw.update(over)
    cfg = replace(base, **kw)
    cfg.validate()
    return cfg


def cmd_encode(args, stdout: TextIO) -> int:
    cfg = _cfg_from_args(args)
    params = cfg.params()
    rng = stream(cfg.seed, "encode")
    if args.message:
        P = load_poly(Path(args.message).read_text())
    elif cfg.m == 1:
        P = random_poly(params.ctx, params.d, rng)
    else:
        P = random_multipoly(params.ctx, cfg.m, params.d, rng)
    if args.message_out:
        Path(args.message_out).write_text(dump_poly(P))
    c = frs_encode(P, params) if cfg.family == "frs" else mult_encode(P, params)
    _emit(dump_codeword(c, params), cfg.out, stdout)
    return 0


def _params_from_header(head: dict, family: str) -> FrsParams | MultParams:
    ctx = prime_field(head["q"])
    if family == "frs":
        return frs_params(ctx, head["s"], head["n"], head["d"])
    if head["m"] == 1:
        ev = None if head["n"] == head["q"] else range(head["n"])
        return mult_params(ctx, head["s"], head["d"], 1, ev)
    return mult_params(ctx, head["s"], head["d"], head["m"])


def cmd_corrupt(args, stdout: TextIO) -> int:
    head, c = load_codeword(Path(args.input).read_text())
    params = _params_from_header(head, args.family)
    rng = stream(args.seed, "corrupt")
    S = plant_channel(c, args.alpha, args.ell, rng)
    _emit(dump_listword(S, params), args.out, stdout)
    return 0


def cmd_list_recover(args, stdout: TextIO) -> int:
    from .prune import frs_pipeline, mult_pipeline

    head, S = load_listword(Path(args.input).read_text())
    params = _params_from_header(head, args.family)
    rng = stream(args.seed, "list-recover")
    kw = dict(alpha=args.alpha, r=args.r, tau=args.tau, repetitions=args.repetitions, strict=args.strict)
    if args.family == "frs":
        rec = frs_pipeline(S, params, None, args.ell, rng, **kw)
    else:
        rec = mult_pipeline(S, params, None, args.ell, rng, args.mode, **kw)
    lines = [format_record("candidate", index=k, coeffs=[int(c) for c in P.coeffs])
             for k, P in enumerate(rec.candidates)]
    lines.append(format_record("summary", candidates=len(rec.candidates), r=rec.r, tau=rec.tau,
                               repetitions=rec.repetitions, dim=rec.space.dim if not rec.space.is_empty else -1))
    _emit("\n".join(lines) + "\n", args.out, stdout)
    return 0


def _run_and_print(cfg: ExperimentConfig, timings: bool, stdout: TextIO) -> int:
    records = run_experiment(cfg)
    lines = [r.line(timings) for r in records] + [summary_line(records)]
    _emit("\n".join(lines) + "\n", cfg.out, stdout)
    return 0


def cmd_local_recover(args, stdout: TextIO) -> int:
    cfg = _cfg_from_args(args, family="local")
    return _run_and_print(cfg, args.timings, stdout)


def cmd_ael(args, stdout: TextIO) -> int:
    cfg = _cfg_from_args(args, family="ael")
    return _run_and_print(cfg, args.timings, stdout)


def cmd_bench(args, stdout: TextIO) -> int:
    cfg = _cfg_from_args(args)
    return _run_and_print(cfg, args.timings, stdout)


def cmd_verify(args, stdout: TextIO) -> int:
    from .acceptance import run_suite

    only = [int(x) for x in args.only.split(",")] if args.only else None
    results = run_suite(only)
    for res in results:
        stdout.write(res.line() + "\n")
    failed = [r.number for r in results if not r.passed]
    stdout.write(format_record("summary", criteria=len(results), failed=len(failed)) + "\n")
    return 1 if failed else 0


# argument parsing ----------------------------------------------------------------

def _code_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", choices=FAMILIES)
    for name in ("q", "s", "n", "d", "m"):
        p.add_argument(f"--{name}", type=int)


def _decoder_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--r", type=int)
    p.add_argument("--tau", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--strict", action="store_true", default=None)
    p.add_argument("--mode", choices=("whole-field", "small-d"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="listrec", description="List-recovery experiments over finite fields.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode a random or given message")
    _code_flags(p)
    p.add_argument("--config")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--message", help="poly file to encode instead of a random message")
    p.add_argument("--message-out", dest="message_out")
    p.add_argument("--out")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("corrupt", help="turn a codeword into a list word")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--family", choices=("frs", "mult"), required=True)
    p.add_argument("--alpha", default="0")
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("list-recover", help="run the global list-recovery pipeline on a list word")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--family", choices=("frs", "mult"), required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--ell", type=int)
    _decoder_flags(p)
    p.set_defaults(mode="whole-field", strict=False)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_list_recover)

    for name, func, hlp in (("local-recover", cmd_local_recover, "plant, then locally list-recover"),
                            ("ael", cmd_ael, "expander-folded concatenated code round trips"),
                            ("bench", cmd_bench, "seeded plant/corrupt/decode trials")):
        p = sub.add_parser(name, help=hlp)
        _code_flags(p)
        _decoder_flags(p)
        p.add_argument("--config")
        p.add_argument("--alpha")
        p.add_argument("--ell", type=int)
        p.add_argument("--adversarial", action="store_true", default=None)
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--alpha-prime", dest="alpha_prime")
        p.add_argument("--s-star", dest="s_star", type=int)
        p.add_argument("--U-size", dest="U_size", type=int)
        p.add_argument("--K-param", dest="K_param", type=int)
        p.add_argument("--points", type=int)
        p.add_argument("--inner-trials", dest="inner_trials", type=int)
        p.add_argument("--corrupt-blocks", dest="corrupt_blocks", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--timings", action="store_true")
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--only", help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Iterable[str] | None = None, stdout: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(list(argv) if argv is not None else None)
    try:
        return args.func(args, stdout)
    except ConfigInvalid as e:
        sys.stderr.write(f"config error: {e}\n")
        return 2
    except ListRecError as e:
        sys.stderr.write(f"error: {type(e).__name__}: {e}\n")
        return 3


if __name__ == "__main__":
    sys.exit(main())
