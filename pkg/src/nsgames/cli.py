"""Command-line front end.

Subcommands: ``value`` (game values), ``sequence`` (asymptotic / inner value
sequences), ``dilate`` (Naimark and joint commuting dilations), ``check``
(no-signalling and locality tests on correlation dumps).

Exit codes: 0 success, 2 parse error, 3 resource cap, 4 precondition
violation, 1 internal error.  Machine-format output is line oriented and
stable across runs for fixed flags and rng seed; floats are printed with
Python's shortest round-trip representation (at most 17 significant digits).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import dilation as dilation_mod
from . import games as games_mod
from .channels import Povm, dump_povm, load_channel, load_povm
from .correlations import is_local, is_no_signalling, load_correlation
from .errors import ParseError, PreconditionError, TooLargeError
from .linalg import max_abs

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_PARSE = 2
EXIT_CAP = 3
EXIT_PRECONDITION = 4


def _fmt(value: float) -> str:
    return repr(float(value))


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


def _load_finite_game(path: str) -> games_mod.FiniteGame:
    game = games_mod.load_game(_read(path))
    if isinstance(game, games_mod.CylinderGame):
        raise ParseError(f"{path}: expected a finite game, found 'window' header")
    return game


def _print(out, line: str) -> None:
    print(line, file=out)


def cmd_value(args, out=None) -> int:
    out = out if out is not None else sys.stdout
    game = _load_finite_game(args.game)
    report = games_mod.value(game, args.type, dim=args.d, seeds=args.seeds,
                             max_sweeps=args.sweeps, rng_seed=args.rng_seed)
    if args.format == "machine":
        _print(out, f"value {report.kind} {_fmt(report.value)}")
        return EXIT_OK
    nX, nY, nA, nB = game.shape
    _print(out, f"game: {args.game} ({nX}x{nY}x{nA}x{nB})")
    if report.kind == "qs-lb":
        _print(out, f"type: qs (lower bound, dimension {args.d}, "
                    f"{args.seeds} seeds, {args.sweeps} sweeps)")
        if nA > 2 or nB > 2:
            _print(out, "note: measurement updates beyond two outcomes use a "
                        "greedy ascent heuristic")
    else:
        _print(out, f"type: {report.kind} (exact)")
    _print(out, f"value: {report.value:.6f}")
    if report.kind == "loc":
        f, g = report.certificate
        _print(out, f"certificate: deterministic strategies f={f} g={g}")
    elif report.kind == "ns":
        _print(out, "certificate: optimal no-signalling correlation (LP vertex)")
    else:
        _print(out, f"certificate: see-saw strategy on C^{args.d} x C^{args.d}")
    return EXIT_OK


def cmd_sequence(args, out=None) -> int:
    out = out if out is not None else sys.stdout
    loaded = games_mod.load_game(_read(args.game))
    if args.mode == "iid":
        if isinstance(loaded, games_mod.CylinderGame):
            raise ParseError(f"{args.game}: mode iid expects a finite game")
        cylinder = games_mod.embed(loaded)
        with_running = False
    elif args.mode == "inner":
        cylinder = (loaded if isinstance(loaded, games_mod.CylinderGame)
                    else games_mod.embed(loaded))
        with_running = True
    else:  # memory
        if isinstance(loaded, games_mod.CylinderGame):
            raise ParseError(f"{args.game}: mode memory expects a finite game")
        cylinder = games_mod.memory_game(loaded)
        with_running = True

    opts = {}
    if args.type == "qs":
        opts = dict(dim=args.d, seeds=args.seeds, max_sweeps=args.sweeps,
                    rng_seed=args.rng_seed)
    entries, truncated = _sequence_parallel(cylinder, args.type, args.n_max,
                                            args.threads, opts)
    if args.format == "machine":
        for e in entries:
            if with_running:
                _print(out, f"entry {e.n} {_fmt(e.value)} {_fmt(e.normalized)} "
                            f"{_fmt(e.running_max)}")
            else:
                _print(out, f"entry {e.n} {_fmt(e.value)} {_fmt(e.normalized)}")
        if truncated:
            _print(out, "truncated 1")
        return EXIT_OK
    tag = "qs lower bound" if args.type == "qs" else args.type
    header = f"{'n':>3}  {'value':>12}  {'value^(1/n)':>12}"
    if with_running:
        header += f"  {'running max':>12}"
    _print(out, f"sequence mode={args.mode} type={tag}")
    if args.type == "qs":
        _print(out, "note: entries are see-saw lower bounds; measurement "
                    "updates beyond two outcomes use a greedy ascent heuristic")
    _print(out, header)
    for e in entries:
        row = f"{e.n:>3}  {e.value:>12.6f}  {e.normalized:>12.6f}"
        if with_running:
            row += f"  {e.running_max:>12.6f}"
        _print(out, row)
    if truncated:
        _print(out, "(truncated: size cap reached)")
    return EXIT_OK


def _sequence_parallel(cylinder, kind, n_max, threads, opts):
    """Sequence entries computed independently per n, merged in order."""
    if threads <= 1 or n_max <= 1:
        return games_mod.inner_value_sequence(cylinder, kind, n_max, **opts)

    def one(n):
        try:
            stage = games_mod.iterate(cylinder, n)
            return n, games_mod.value(stage, kind, **opts).value
        except TooLargeError:
            return n, None

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = dict(pool.map(one, range(1, n_max + 1)))
    entries = []
    truncated = False
    running = None
    previous = None
    for n in range(1, n_max + 1):
        raw = results[n]
        if raw is None:
            truncated = True
            break
        if kind != "qs" and previous is not None and raw > previous + 1e-9:
            raise RuntimeError("iterate values must be non-increasing")
        previous = raw
        normalized = raw ** (1.0 / n) if raw > 0.0 else 0.0
        running = normalized if running is None else max(running, normalized)
        entries.append(games_mod.SequenceEntry(n, raw, normalized, running))
    return entries, truncated


def _pvm_residuals(pvm: Povm) -> tuple[float, float]:
    proj = max(max_abs(e @ e - e) for e in pvm.effects)
    ortho = 0.0
    for i in range(pvm.outcomes):
        for j in range(i + 1, pvm.outcomes):
            ortho = max(ortho, max_abs(pvm.effects[i] @ pvm.effects[j]))
    return proj, ortho


def cmd_dilate(args, out=None) -> int:
    out = out if out is not None else sys.stdout
    if args.joint is not None:
        povm_e = load_povm(_read(args.povm))
        povm_f = load_povm(_read(args.joint))
        result = dilation_mod.joint_commuting_dilation(povm_e, povm_f)
        iso = max_abs(result.isometry.conj().T @ result.isometry
                      - np.eye(result.isometry.shape[1]))
        proj = max(_pvm_residuals(result.pvm_p)[0], _pvm_residuals(result.pvm_q)[0])
        ortho = max(_pvm_residuals(result.pvm_p)[1], _pvm_residuals(result.pvm_q)[1])
        if args.format == "machine":
            _print(out, f"dilation joint K={result.dilation_dim} dim={povm_e.dim}")
            _print(out, f"residual isometry {_fmt(iso)}")
            _print(out, f"residual projectivity {_fmt(proj)}")
            _print(out, f"residual orthogonality {_fmt(ortho)}")
            _print(out, f"residual reconstruction {_fmt(result.residual)}")
            _print(out, f"residual cross-commutation {_fmt(result.cross_residual)}")
            _print(out, dump_povm(result.pvm_p).rstrip("\n"))
            _print(out, dump_povm(result.pvm_q).rstrip("\n"))
        else:
            _print(out, f"joint commuting dilation: K = C^{result.dilation_dim}")
            _print(out, f"  isometry residual:          {iso:.3e}")
            _print(out, f"  projectivity residual:      {proj:.3e}")
            _print(out, f"  orthogonality residual:     {ortho:.3e}")
            _print(out, f"  reconstruction residual:    {result.residual:.3e}")
            _print(out, f"  cross-commutation residual: {result.cross_residual:.3e}")
        return EXIT_OK

    channel = load_channel(_read(args.povm))
    if channel.inputs == 1:
        result = dilation_mod.naimark(channel.povms[0])
        pvms = [result.dilated]
        label = "naimark"
    else:
        result = dilation_mod.simultaneous_naimark(channel.padded())
        pvms = list(result.dilated)
        label = "simultaneous"
    iso = max_abs(result.isometry.conj().T @ result.isometry
                  - np.eye(result.isometry.shape[1]))
    proj = max(_pvm_residuals(p)[0] for p in pvms)
    ortho = max(_pvm_residuals(p)[1] for p in pvms)
    if args.format == "machine":
        _print(out, f"dilation {label} K={result.dilation_dim} dim={result.source_dim}")
        _print(out, f"residual isometry {_fmt(iso)}")
        _print(out, f"residual projectivity {_fmt(proj)}")
        _print(out, f"residual orthogonality {_fmt(ortho)}")
        _print(out, f"residual reconstruction {_fmt(result.residual)}")
        for pvm in pvms:
            _print(out, dump_povm(pvm).rstrip("\n"))
    else:
        _print(out, f"{label} dilation: K = C^{result.dilation_dim}")
        _print(out, f"  isometry residual:       {iso:.3e}")
        _print(out, f"  projectivity residual:   {proj:.3e}")
        _print(out, f"  orthogonality residual:  {ortho:.3e}")
        _print(out, f"  reconstruction residual: {result.residual:.3e}")
    return EXIT_OK


def cmd_check(args, out=None) -> int:
    out = out if out is not None else sys.stdout
    corr = load_correlation(_read(args.corr))
    if args.test == "ns":
        ok, cert = is_no_signalling(corr, tol=args.tol)
        verdict = "pass" if ok else "fail"
        if args.format == "machine":
            _print(out, f"check ns {verdict} {_fmt(cert.worst)}")
        else:
            _print(out, f"no-signalling: {verdict}")
            _print(out, f"  worst Alice defect: {cert.max_alice:.3e}"
                        + (f" at (x,a,y,y')={cert.witness_alice}" if cert.witness_alice else ""))
            _print(out, f"  worst Bob defect:   {cert.max_bob:.3e}"
                        + (f" at (y,b,x,x')={cert.witness_bob}" if cert.witness_bob else ""))
        return EXIT_OK
    local, report = is_local(corr, tol=args.tol)
    verdict = "pass" if local else "fail"
    if args.format == "machine":
        _print(out, f"check local {verdict} {_fmt(report.gap)}")
        for f, g, w in report.weights:
            f_str = ",".join(str(d) for d in f)
            g_str = ",".join(str(d) for d in g)
            _print(out, f"weight f={f_str} g={g_str} w={_fmt(w)}")
    else:
        if local:
            _print(out, f"local: pass (max deviation {report.gap:.3e})")
            _print(out, f"  decomposition over {len(report.weights)} deterministic vertices:")
            for f, g, w in report.weights:
                _print(out, f"    f={f} g={g} weight={w:.6f}")
        else:
            _print(out, f"local: fail (infeasibility gap {report.gap:.6f})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsgames",
        description="Game values, correlation checks, and POVM dilations.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "machine"), default="table",
                        help="output style (default: table)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker cap for parallel stages")
    sub = parser.add_subparsers(dest="command", required=True)

    engine = argparse.ArgumentParser(add_help=False)
    engine.add_argument("--type", choices=("loc", "ns", "qs"), required=True,
                        help="value type: local, no-signalling, or quantum-spatial")
    engine.add_argument("--d", type=int, default=2, help="see-saw local dimension")
    engine.add_argument("--seeds", type=int, default=20, help="see-saw restarts")
    engine.add_argument("--sweeps", type=int, default=200,
                        help="see-saw sweeps per restart")
    engine.add_argument("--rng-seed", type=int, default=0, help="64-bit RNG seed")

    p_value = sub.add_parser("value", parents=[common, engine],
                             help="compute one game value")
    p_value.add_argument("game", help="game file")
    p_value.set_defaults(func=cmd_value)

    p_seq = sub.add_parser("sequence", parents=[common, engine],
                           help="value sequences over parallel repetition")
    p_seq.add_argument("game", help="game file")
    p_seq.add_argument("--mode", choices=("iid", "inner", "memory"), required=True)
    p_seq.add_argument("--n-max", type=int, default=2, dest="n_max")
    p_seq.set_defaults(func=cmd_sequence)

    p_dil = sub.add_parser("dilate", parents=[common],
                           help="Naimark / joint commuting dilation reports")
    p_dil.add_argument("povm", help="POVM or channel file")
    p_dil.add_argument("--joint", default=None,
                       help="second POVM file for the joint commuting dilation")
    p_dil.set_defaults(func=cmd_dilate)

    p_chk = sub.add_parser("check", parents=[common],
                           help="test a correlation dump")
    p_chk.add_argument("corr", help="correlation dump file")
    p_chk.add_argument("--test", choices=("ns", "local"), required=True)
    p_chk.add_argument("--tol", type=float, default=1e-8,
                       help="verdict tolerance")
    p_chk.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
