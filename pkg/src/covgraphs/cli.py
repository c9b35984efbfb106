"""Command-line front end.

Every command reads one JSON bundle, prints a plain-text report to stdout and
optionally writes machine-readable JSON with -o.  Exit codes: 0 success /
property holds, 1 property fails or a round trip misses tolerance, 2 input or
reference errors, 3 internal theorem violation (never expected).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import bundle as bundle_mod
from . import cpmaps, graphs, groups, relations, scc
from .errors import (
    CovGraphsError,
    NotConfusability,
    TheoremViolation,
)

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


def _load(path: str, tol: float):
    try:
        return bundle_mod.load_bundle_file(path, tol=tol)
    except (OSError, ValueError, KeyError, CovGraphsError) as exc:
        raise SystemExit(_fail(f"cannot load bundle: {exc}", EXIT_INPUT))


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _get(table: dict, name: str, what: str):
    if name not in table:
        raise SystemExit(_fail(f"unknown {what} {name!r}", EXIT_INPUT))
    return table[name]


def _system_name(b, sys) -> str:
    for name, s in b.systems.items():
        if s == sys:
            return name
    return "?"


def cmd_analyze_channel(args) -> int:
    b = _load(args.bundle, args.tol)
    f = _get(b.channels, args.channel, "channel")
    rel = relations.support_of(f)
    print(f"channel: {args.channel}")
    print(f"is channel: {'yes' if cpmaps.is_channel(f, args.tol) else 'no'}")
    print("relation block ranks:")
    for (i, j), _ in sorted(rel.blocks.items()):
        print(f"  ({i},{j}): {rel.rank(i, j)}")
    gamma = graphs.confusability_of(f)
    print("confusability block ranks:")
    for (i, j), _ in sorted(gamma.relation.blocks.items()):
        print(f"  ({i},{j}): {gamma.relation.rank(i, j)}")
    if not cpmaps.is_channel(f, args.tol):
        print("reversible: n/a (not a channel)")
        return EXIT_OK
    rev = graphs.is_reversible(f, args.tol)
    print(f"reversible: {'yes' if rev else 'no'}")
    if args.emit_reverse and rev:
        g = graphs.reverse_channel(f, args.tol)
        if args.output:
            doc = bundle_mod.dump_channel(
                g, _system_name(b, f.target), _system_name(b, f.source)
            )
            bundle_mod.dump_json(doc, args.output)
            print(f"reverse channel written to {args.output}")
        else:
            print("reverse channel computed (use -o to write it)")
    return EXIT_OK


def cmd_graph_to_channel(args) -> int:
    b = _load(args.bundle, args.tol)
    g = _get(b.graphs, args.graph, "graph")
    try:
        f, env = graphs.realize_channel(g, tau=args.tau, tol=args.tol)
    except NotConfusability as exc:
        return _fail(str(exc), EXIT_INPUT)
    defect = relations.relation_defect(graphs.confusability_of(f).relation, g.relation)
    print(f"realized channel into environment of dimension {env.dims[0]}")
    print(f"round-trip defect: {defect:.3e}")
    if args.output:
        doc = {
            "environment": bundle_mod.system_to_json(env),
            "channel": bundle_mod.dump_channel(f, _system_name(b, g.system), "environment"),
        }
        bundle_mod.dump_json(doc, args.output)
        print(f"written to {args.output}")
    if defect > 1e-7:
        print("round trip FAILED tolerance")
        return EXIT_FALSE
    return EXIT_OK


def cmd_check_hom(args) -> int:
    b = _load(args.bundle, args.tol)
    f = _get(b.channels, args.channel, "channel")
    ga = _get(b.graphs, args.source_graph, "graph")
    gb = _get(b.graphs, args.target_graph, "graph")
    try:
        verdict = graphs.is_homomorphism(f, ga, gb, args.tol)
    except CovGraphsError as exc:
        return _fail(str(exc), EXIT_INPUT)
    print(f"homomorphism: {'true' if verdict else 'false'}")
    if not verdict:
        rf = relations.support_of(f)
        pull = relations.compose(
            relations.converse(rf), relations.compose(gb.relation, rf)
        )
        for (i, j), blk in sorted(pull.blocks.items()):
            want = ga.relation.blocks[(i, j)]
            defect = float(np.linalg.norm(want @ blk - blk))
            if defect > args.tol:
                print(f"witness block ({i},{j}): containment defect {defect:.3e}")
        return EXIT_FALSE
    return EXIT_OK


def cmd_scc_verify(args) -> int:
    b = _load(args.bundle, args.tol)
    src = _get(b.sources, args.source, "source")
    n_chan = _get(b.channels, args.channel, "channel")
    e_chan = _get(b.channels, args.encoder, "encoder channel")
    try:
        valid = scc.encoding_is_valid(e_chan, src, n_chan, args.tol)
    except TheoremViolation as exc:
        return _fail(str(exc), EXIT_INTERNAL)
    except CovGraphsError as exc:
        return _fail(str(exc), EXIT_INPUT)
    if not valid:
        print("scheme: invalid (encoder is not a homomorphism)")
        return EXIT_FALSE
    if args.decoder is not None:
        d_chan = _get(b.channels, args.decoder, "decoder channel")
    else:
        d_chan = scc.decoder_for(e_chan, src, n_chan, args.tol)
        print("decoder synthesized")
    ok = scc.verify_scheme(src, n_chan, e_chan, d_chan, args.tol)
    print(f"scheme: {'valid' if ok else 'invalid (decoder fails)'}")
    if ok and args.output and args.decoder is None:
        doc = bundle_mod.dump_channel(d_chan, "B averaged with O_B", "S")
        bundle_mod.dump_json(doc, args.output)
        print(f"decoder written to {args.output}")
    return EXIT_OK if ok else EXIT_FALSE


def cmd_twirl(args) -> int:
    b = _load(args.bundle, args.tol)
    f = _get(b.channels, args.channel, "channel")
    t = groups.twirl_cp(f)
    print(f"twirled over group of order {b.group.order}")
    print(f"covariant: {'yes' if groups.is_covariant_cp(t, args.tol) else 'no'}")
    if args.output:
        doc = bundle_mod.dump_channel(
            t, _system_name(b, f.source), _system_name(b, f.target)
        )
        bundle_mod.dump_json(doc, args.output)
        print(f"written to {args.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="covgraphs",
        description="Analyze quantum relations, graphs and zero-error coding schemes.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("bundle", help="JSON bundle path")
        p.add_argument("--tol", type=float, default=1e-8,
                       help="numerical tolerance (default 1e-8 projections, "
                            "1e-9 spectral cutoffs internally)")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized self-checks")
        p.add_argument("-o", "--output", default=None, help="write JSON output here")

    p = sub.add_parser("analyze-channel", help="relation ranks, confusability, reversibility")
    common(p)
    p.add_argument("channel")
    p.add_argument("--emit-reverse", action="store_true",
                   help="compute (and with -o write) the reverse channel when reversible")
    p.set_defaults(func=cmd_analyze_channel)

    p = sub.add_parser("graph-to-channel", help="realize a confusability graph by a channel")
    common(p)
    p.add_argument("graph")
    p.add_argument("--tau", type=float, default=None, help="blend parameter in (0,1]")
    p.set_defaults(func=cmd_graph_to_channel)

    p = sub.add_parser("check-hom", help="graph homomorphism test for a channel")
    common(p)
    p.add_argument("channel")
    p.add_argument("source_graph")
    p.add_argument("target_graph")
    p.set_defaults(func=cmd_check_hom)

    p = sub.add_parser("scc-verify", help="verify a zero-error source-channel coding scheme")
    common(p)
    p.add_argument("source")
    p.add_argument("channel")
    p.add_argument("encoder")
    p.add_argument("decoder", nargs="?", default=None)
    p.set_defaults(func=cmd_scc_verify)

    p = sub.add_parser("twirl", help="group-average a channel")
    common(p)
    p.add_argument("channel")
    p.set_defaults(func=cmd_twirl)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.random.seed(args.seed)
    try:
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_INPUT
    except TheoremViolation as exc:
        return _fail(str(exc), EXIT_INTERNAL)
    except CovGraphsError as exc:
        return _fail(str(exc), EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
