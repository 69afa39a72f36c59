"""Command-line surface: one binary, subcommand style.

Exit codes: 0 success, 1 usage or configuration, 2 domain refusal (bad
reduction, disconnected graph, membership failure), 3 resource cap.

Every command is deterministic: identical invocations produce byte-identical
JSON and CSV.  Work items that are independent, the (level, prime) cells of
``count``, can fan out to a thread pool bounded by TOWERLAB_THREADS; report
order stays (level, prime) regardless of completion order.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import figures
from .algebra import DEFAULT_ENUM_CAP, ProjectivePoint, is_prime
from .bounds import pointcount_gonality_bound, tower_report
from .dynamics import (
    DEFAULT_BIT_CAP,
    canonical_height,
    classify_orbit,
    parse_rational_map,
    periodic_points,
    preimage_chain,
)
from .errors import ConfigError, DomainError, NotPrimeError, ParseError, ResourceCapError
from .pointcount import count_points, image_chain
from .reporting import Report, p1_label, render
from .spectra import (
    DEFAULT_DIM_CAP,
    DEFAULT_EIG_TOL,
    cayley_sl2,
    complete_graph,
    cycle_graph,
    cycle_spectrum,
    dsc_check,
    eigenvalues,
    graph_to_triplets,
    lambda1_volume_trend,
    laplacian,
    schreier_graph,
)
from .towers import resolve_tower, tower_to_dict


class _Parser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so main() owns exit codes."""

    def error(self, message):
        raise ConfigError(message)


# --------------------------------------------------------------------------
# argument parsing helpers


def _parse_levels(text: str) -> list[int]:
    m = re.fullmatch(r"(\d+)(?:\.\.(\d+))?", text.strip())
    if not m:
        raise ParseError(f"bad level range {text!r} (expected N or A..B)")
    a = int(m.group(1))
    b = int(m.group(2)) if m.group(2) else a
    if b < a:
        raise ParseError(f"empty level range {text!r}")
    return list(range(a, b + 1))


def _parse_primes(text: str) -> list[int]:
    primes = []
    for tok in text.split(","):
        try:
            n = int(tok)
        except ValueError:
            raise ParseError(f"bad prime {tok!r}") from None
        if not is_prime(n):
            raise NotPrimeError(n)
        primes.append(n)
    return sorted(set(primes))


def _parse_ints(text: str, what: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError:
        raise ParseError(f"bad {what} {text!r}") from None


def _parse_point(text: str) -> ProjectivePoint:
    t = text.strip()
    if t in ("inf", "oo", "∞"):
        return ProjectivePoint.over_q((1, 0))
    try:
        if t.startswith("[") and t.endswith("]"):
            parts = [Fraction(c.strip()) for c in t[1:-1].split(":")]
            return ProjectivePoint.over_q(parts)
        return ProjectivePoint.over_q((Fraction(t), Fraction(1)))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad point {text!r} (expected a/b, [a:b], or inf)") from None


def _positive(value: int, name: str) -> int:
    if value < 1:
        raise ConfigError(f"{name} must be positive")
    return value


def _thread_count() -> int:
    raw = os.environ.get("TOWERLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"TOWERLAB_THREADS={raw!r} is not an integer") from None
    return _positive(n, "TOWERLAB_THREADS")


def _figures_dir(args) -> Path | None:
    if not getattr(args, "figures", None):
        return None
    path = Path(args.figures)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _note_figure(path: str) -> None:
    print(f"wrote {path}", file=sys.stderr)


# --------------------------------------------------------------------------
# count


def _cmd_count(args) -> Report:
    tower = resolve_tower(args.tower)
    levels = _parse_levels(args.levels)
    primes = _parse_primes(args.primes)
    cap = _positive(args.cap_enum, "--cap-enum")
    figdir = _figures_dir(args)
    if args.chain:
        return _count_chain(args, tower, levels, primes, cap, figdir)

    tasks = [(n, p) for n in levels for p in primes]

    def cell(task):
        n, p = task
        return count_points(tower, n, p, enum_cap=cap)

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(cell, tasks))
    else:
        results = [cell(t) for t in tasks]
    if not args.points:
        results = [replace(r, points=None) for r in results]
    rows = [[r.level, r.prime, r.count,
             pointcount_gonality_bound(r.count, r.prime)] for r in results]
    payload = {"tower": tower_to_dict(tower), "results": []}
    for r in results:
        entry = r.to_json_dict()
        entry["gonality_bound"] = pointcount_gonality_bound(r.count, r.prime)
        payload["results"].append(entry)
    if figdir:
        series = {
            f"p={p}": (
                [r.level for r in results if r.prime == p],
                [r.count for r in results if r.prime == p],
            )
            for p in primes
        }
        _note_figure(
            figures.series_figure(series, figdir / "counts.png", "level",
                                  "rational points", f"{tower.kind} point counts")
        )
    return Report(
        kind="counts",
        payload=payload,
        columns=["level", "prime", "count", "gonality_bound"],
        rows=rows,
        title=f"point counts, {tower.kind} tower",
    )


def _count_chain(args, tower, levels, primes, cap, figdir) -> Report:
    base, top = levels[0], levels[-1]
    window = _positive(args.window, "--window")
    chains = [
        image_chain(tower, base, p, top, window=window, enum_cap=cap)
        for p in primes
    ]
    rows = []
    for chain in chains:
        for i, s in enumerate(chain.sets):
            rows.append([chain.prime, base + i, len(s),
                         chain.stabilized_at if i == len(chain.sets) - 1 else None])
    payload = {
        "tower": tower_to_dict(tower),
        "base_level": base,
        "max_level": top,
        "chains": [c.to_json_dict() for c in chains],
    }
    if figdir:
        series = {
            f"p={c.prime}": (
                list(range(base, base + len(c.sets))),
                [len(s) for s in c.sets],
            )
            for c in chains
        }
        _note_figure(
            figures.series_figure(series, figdir / "image_chain.png",
                                  "source level", "image size",
                                  f"{tower.kind} mod-p image chains")
        )
    return Report(
        kind="image-chain",
        payload=payload,
        columns=["prime", "source_level", "image_size", "stabilized_at"],
        rows=rows,
        title=f"mod-p image chains down to level {base}, {tower.kind} tower",
    )


# --------------------------------------------------------------------------
# bounds


def _cmd_bounds(args) -> Report:
    tower = resolve_tower(args.tower)
    levels = _parse_levels(args.levels)
    primes = _parse_primes(args.primes) if args.primes else []
    cap = _positive(args.cap_enum, "--cap-enum")
    report = tower_report(
        tower, levels, primes,
        level0_has_point=True if args.has_point else None,
        enum_cap=cap,
    )
    columns = ["level", "degrees", "genus", "gamma_lower", "gamma_upper",
               "frey_max_degree"]
    for p in primes:
        columns += [f"count_p{p}", f"count_bound_p{p}"]
    columns.append("provenance")
    rows = []
    notes = []
    payload_rows = []
    for row in report.rows:
        iv = row.interval
        provenance = "; ".join(f"{r.rule}={r.value}" for r in iv.lower_records)
        if iv.upper_records:
            provenance += " | upper: " + "; ".join(
                f"{r.rule}={r.value}" for r in iv.upper_records)
        cells = [row.level, "x".join(str(d) for d in row.degrees), row.genus,
                 iv.lower, iv.upper, row.frey_degree]
        for p in primes:
            cells += [row.counts.get(p), row.count_bounds.get(p)]
        cells.append(provenance)
        rows.append(cells)
        notes += [f"level {row.level}: {note}" for note in iv.notes]
        payload_rows.append({
            "level": row.level,
            "degrees": list(row.degrees),
            "genus": row.genus,
            "gamma_lower": iv.lower,
            "gamma_upper": iv.upper,
            "lower_records": [{"rule": r.rule, "value": r.value}
                              for r in iv.lower_records],
            "upper_records": [{"rule": r.rule, "value": r.value}
                              for r in iv.upper_records],
            "interval_notes": list(iv.notes),
            "counts": {str(p): c for p, c in row.counts.items()},
            "count_bounds": {str(p): c for p, c in row.count_bounds.items()},
            "frey_max_degree": row.frey_degree,
        })
    payload = {
        "tower": tower_to_dict(tower),
        "levels": report.levels,
        "primes": report.primes,
        "diverging_lower_bound": report.diverging,
        "rows": payload_rows,
    }
    figdir = _figures_dir(args)
    if figdir:
        _note_figure(figures.bounds_figure(report, figdir / "bounds.png"))
    return Report(
        kind="bounds",
        payload=payload,
        columns=columns,
        rows=rows,
        title=f"gonality and genus bounds, {tower.kind} tower",
        notes=notes,
    )


# --------------------------------------------------------------------------
# dynamics


def _cmd_dyn_periodic(args) -> Report:
    f = parse_rational_map(args.map)
    cap = _positive(args.cap_bits, "--cap-bits")
    pts = periodic_points(f, _positive(args.max_period, "--max-period"), bit_cap=cap)
    entries = []
    for pt in pts:
        c = classify_orbit(f, pt)
        entries.append((c.period, pt))
    entries.sort(key=lambda e: (e[0], e[1].coords))
    rows = [[p1_label(pt), period] for period, pt in entries]
    payload = {
        "map": str(f),
        "max_period": args.max_period,
        "points": [{"point": p1_label(pt), "coords": list(pt.coords),
                    "period": period} for period, pt in entries],
    }
    return Report("periodic-points", payload, ["point", "period"], rows,
                  title=f"rational periodic points of {f}, period <= {args.max_period}")


def _cmd_dyn_classify(args) -> Report:
    f = parse_rational_map(args.map)
    pt = _parse_point(args.point)
    cap = _positive(args.cap_bits, "--cap-bits")
    c = classify_orbit(f, pt, height_cap=cap * math.log(2))
    rows = [[p1_label(pt), c.tag, c.period, c.tail, c.height_at_cutoff]]
    payload = {
        "map": str(f),
        "point": p1_label(pt),
        "coords": list(pt.coords),
        "tag": c.tag,
        "period": c.period,
        "tail": c.tail,
        "height_at_cutoff": c.height_at_cutoff,
        "orbit_prefix": [p1_label(q) for q in c.orbit_prefix],
    }
    return Report("orbit-classification", payload,
                  ["point", "tag", "period", "tail", "height_at_cutoff"], rows,
                  title=f"orbit of {p1_label(pt)} under {f}")


def _cmd_dyn_height(args) -> Report:
    f = parse_rational_map(args.map)
    pt = _parse_point(args.point)
    cap = _positive(args.cap_bits, "--cap-bits")
    if args.tol <= 0:
        raise ConfigError("--tol must be positive")
    value = canonical_height(f, pt, tol=args.tol, bit_cap=cap)
    payload = {
        "map": str(f),
        "point": p1_label(pt),
        "coords": list(pt.coords),
        "tol": args.tol,
        "canonical_height": value,
    }
    return Report("canonical-height", payload, ["point", "canonical_height"],
                  [[p1_label(pt), value]],
                  title=f"canonical height under {f}")


def _node_dict(node) -> dict:
    return {
        "point": p1_label(node.point),
        "coords": list(node.point.coords),
        "preimages": [_node_dict(c) for c in node.children],
    }


def _cmd_dyn_preimages(args) -> Report:
    if args.maps:
        chain = [parse_rational_map(t) for t in args.maps.split(",")]
    else:
        chain = parse_rational_map(args.map)
    pt = _parse_point(args.point)
    depth = args.depth
    if depth < 0:
        raise ConfigError("--depth must be >= 0")
    tree = preimage_chain(chain, pt, depth)
    rows = []
    frontier = [tree.root]
    level = 0
    while frontier:
        labels = sorted(p1_label(n.point) for n in frontier)
        rows.append([level, len(frontier), " ".join(labels)])
        frontier = [c for n in frontier for c in n.children]
        level += 1
    maps_txt = [str(f) for f in (chain if isinstance(chain, list) else [chain])]
    payload = {
        "maps": maps_txt,
        "point": p1_label(pt),
        "depth": tree.depth,
        "certified_depth": tree.certified_depth,
        "certified": tree.certified,
        "tree": _node_dict(tree.root),
    }
    return Report("preimage-tree", payload, ["depth", "count", "points"], rows,
                  title=f"rational preimages of {p1_label(pt)}, depth {depth}")


# --------------------------------------------------------------------------
# spectra


def _spectrum_report(args, graph, extra: dict | None = None) -> Report:
    tol = args.tol
    if tol <= 0:
        raise ConfigError("--tol must be positive")
    dim_cap = _positive(args.cap_dim, "--cap-dim")
    eigs = eigenvalues(laplacian(graph), tol=tol, dim_cap=dim_cap)
    # sub-tolerance noise around integer eigenvalues is solver dust; the
    # report rounds it away, the library call keeps it
    shown = [round(float(v), 12) + 0.0 for v in eigs]
    payload = {
        "label": graph.label,
        "n_vertices": graph.n_vertices,
        "r": graph.r,
        "eigenvalues": shown,
        "graph": graph_to_triplets(graph),
    }
    if extra:
        payload.update(extra)
    figdir = _figures_dir(args)
    if figdir:
        _note_figure(
            figures.spectrum_figure(eigs, graph.label, figdir / "spectrum.png"))
    rows = [[i, v] for i, v in enumerate(shown)]
    return Report("spectrum", payload, ["index", "eigenvalue"], rows,
                  title=f"Laplacian spectrum of {graph.label} "
                        f"({graph.n_vertices} vertices, r={graph.r})")


def _cmd_spec_cycle(args) -> Report:
    n = _positive(args.n, "--n")
    report = _spectrum_report(args, cycle_graph(n),
                              extra={"closed_form_k_order": cycle_spectrum(n)})
    return report


def _parse_perms(text: str) -> list[tuple[int, ...]]:
    return [tuple(_parse_ints(part, "permutation")) for part in text.split(";")]


def _cmd_spec_schreier(args) -> Report:
    perms = _parse_perms(args.perms)
    graph = schreier_graph(perms, symmetric=args.symmetric)
    return _spectrum_report(args, graph)


def _cmd_spec_cayley(args) -> Report:
    m = args.modulus
    gens = None
    if args.gens:
        gens = [tuple(_parse_ints(part, "generator matrix"))
                for part in args.gens.split(";")]
    return _spectrum_report(args, cayley_sl2(m, gens))


_FAMILIES = {
    "cycle": cycle_graph,
    "complete": complete_graph,
    "sl2": cayley_sl2,
}


def _cmd_spec_trend(args) -> Report:
    build = _FAMILIES.get(args.family)
    if build is None:
        raise ConfigError(f"unknown family {args.family!r} "
                          f"(expected cycle, complete, or sl2)")
    sizes = _parse_ints(args.sizes, "size list")
    graphs = [build(s) for s in sizes]
    trend = lambda1_volume_trend(graphs)
    rows = [[g.n_vertices, value / g.n_vertices, value]
            for g, value in zip(graphs, trend.values)]
    payload = {
        "family": args.family,
        "parameters": sizes,
        "volumes": [g.n_vertices for g in graphs],
        "lambda1_times_volume": list(trend.values),
        "verdict": trend.verdict,
    }
    figdir = _figures_dir(args)
    if figdir:
        series = {"lambda1*|V|": ([g.n_vertices for g in graphs],
                                  list(trend.values))}
        _note_figure(
            figures.series_figure(series, figdir / "trend.png", "|V|",
                                  "lambda1 * |V|",
                                  f"{args.family} family divergence diagnostic",
                                  logy=True))
    return Report("lambda1-volume-trend", payload,
                  ["volume", "lambda1", "lambda1_x_volume"], rows,
                  title=f"lambda1 * |V| trend, {args.family} family "
                        f"(verdict: {trend.verdict})")


def _cmd_spec_dsc(args) -> Report:
    kind, _, raw = args.group.partition(":")
    try:
        param = int(raw)
    except ValueError:
        raise ParseError(f"bad group spec {args.group!r} "
                         f"(expected zmod:n, complete:n, or sl2:m)") from None
    if kind == "zmod":
        graph = cycle_graph(param)
    elif kind == "complete":
        graph = complete_graph(param)
    elif kind == "sl2":
        graph = cayley_sl2(param)
    else:
        raise ParseError(f"unknown group kind {kind!r} "
                         f"(expected zmod, complete, or sl2)")
    if args.tol <= 0:
        raise ConfigError("--tol must be positive")
    res = dsc_check(graph, tol=args.tol)
    rows = [[args.group, graph.n_vertices, res.s_count, res.diameter,
             res.lambda1, res.bound, res.holds]]
    payload = {
        "group": args.group,
        "label": graph.label,
        "n_vertices": graph.n_vertices,
        "s_count": res.s_count,
        "diameter": res.diameter,
        "lambda1": res.lambda1,
        "bound": res.bound,
        "holds": res.holds,
    }
    return Report("dsc-check", payload,
                  ["group", "n_vertices", "s_count", "diameter", "lambda1",
                   "bound", "holds"], rows,
                  title=f"diameter spectral-gap bound for {graph.label}")


# --------------------------------------------------------------------------
# parser assembly


def build_parser() -> _Parser:
    parser = _Parser(prog="towerlab",
                     description="towers of curves: point counts, gonality "
                                 "bounds, exact dynamics, graph spectra")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "table"),
                        default="table", help="output format")
    common.add_argument("--out", help="write the report to this file")

    fig = argparse.ArgumentParser(add_help=False)
    fig.add_argument("--figures", metavar="DIR",
                     help="also render figures as PNG files into DIR")

    sub = parser.add_subparsers(dest="command", required=True)

    count = sub.add_parser("count", parents=[common, fig],
                           help="rational point counts mod p")
    count.add_argument("--tower", required=True,
                       help="fibonacci, fermat:p, or a tower file")
    count.add_argument("--levels", required=True, help="level or range A..B")
    count.add_argument("--primes", required=True, help="comma-separated primes")
    count.add_argument("--points", action="store_true",
                       help="include point coordinates in the report")
    count.add_argument("--chain", action="store_true",
                       help="push counts down to the lowest level instead")
    count.add_argument("--window", type=int, default=3,
                       help="stabilization window for --chain")
    count.add_argument("--cap-enum", type=int, default=DEFAULT_ENUM_CAP,
                       help="refuse enumerations beyond this many candidates")
    count.set_defaults(handler=_cmd_count)

    bounds = sub.add_parser("bounds", parents=[common, fig],
                            help="per-level genus and gonality bound table")
    bounds.add_argument("--tower", required=True)
    bounds.add_argument("--levels", required=True)
    bounds.add_argument("--primes", default="",
                        help="primes for counting bounds (may be empty)")
    bounds.add_argument("--has-point", action="store_true",
                        help="assert a rational point on level 0")
    bounds.add_argument("--cap-enum", type=int, default=DEFAULT_ENUM_CAP)
    bounds.set_defaults(handler=_cmd_bounds)

    dyn = sub.add_parser("dynamics", help="exact arithmetic dynamics on P^1")
    dsub = dyn.add_subparsers(dest="subcommand", required=True)

    per = dsub.add_parser("periodic", parents=[common],
                          help="all rational points of small period")
    per.add_argument("--map", required=True, help="rational map, e.g. x^2-1")
    per.add_argument("--max-period", type=int, required=True)
    per.add_argument("--cap-bits", type=int, default=DEFAULT_BIT_CAP)
    per.set_defaults(handler=_cmd_dyn_periodic)

    cls = dsub.add_parser("classify", parents=[common],
                          help="periodic / preperiodic / escaping verdict")
    cls.add_argument("--map", required=True)
    cls.add_argument("--point", required=True, help="a/b, [a:b], or inf")
    cls.add_argument("--cap-bits", type=int, default=DEFAULT_BIT_CAP)
    cls.set_defaults(handler=_cmd_dyn_classify)

    hgt = dsub.add_parser("height", parents=[common],
                          help="canonical height by exact iteration")
    hgt.add_argument("--map", required=True)
    hgt.add_argument("--point", required=True)
    hgt.add_argument("--tol", type=float, default=1e-9)
    hgt.add_argument("--cap-bits", type=int, default=DEFAULT_BIT_CAP)
    hgt.set_defaults(handler=_cmd_dyn_height)

    pre = dsub.add_parser("preimages", parents=[common],
                          help="rational preimage tree under a map chain")
    pre.add_argument("--map", help="single map used at every level")
    pre.add_argument("--maps", help="comma-separated chain, one map per level")
    pre.add_argument("--point", required=True)
    pre.add_argument("--depth", type=int, required=True)
    pre.set_defaults(handler=_cmd_dyn_preimages)

    spec = sub.add_parser("spectra", help="graph Laplacian spectra and gap tests")
    ssub = spec.add_subparsers(dest="subcommand", required=True)

    def spectral_flags(p):
        p.add_argument("--tol", type=float, default=DEFAULT_EIG_TOL)
        p.add_argument("--cap-dim", type=int, default=DEFAULT_DIM_CAP)

    cyc = ssub.add_parser("cycle", parents=[common, fig],
                          help="cycle graph spectrum")
    cyc.add_argument("--n", type=int, required=True)
    spectral_flags(cyc)
    cyc.set_defaults(handler=_cmd_spec_cycle)

    sch = ssub.add_parser("schreier", parents=[common, fig],
                          help="action graph of a permutation list")
    sch.add_argument("--perms", required=True,
                     help="semicolon-separated permutations, e.g. 1,2,0;1,0,2")
    sch.add_argument("--symmetric", action="store_true",
                     help="input is already closed under inverses")
    spectral_flags(sch)
    sch.set_defaults(handler=_cmd_spec_schreier)

    cay = ssub.add_parser("cayley-sl2", parents=[common, fig],
                          help="Cayley graph of SL2(Z/m)")
    cay.add_argument("--modulus", type=int, required=True)
    cay.add_argument("--gens",
                     help="semicolon-separated a,b,c,d matrices "
                          "(default: the two unipotent shears)")
    spectral_flags(cay)
    cay.set_defaults(handler=_cmd_spec_cayley)

    trd = ssub.add_parser("trend", parents=[common, fig],
                          help="lambda1 * |V| divergence diagnostic")
    trd.add_argument("--family", required=True,
                     help="cycle, complete, or sl2")
    trd.add_argument("--sizes", required=True,
                     help="comma-separated sizes (moduli for sl2)")
    spectral_flags(trd)
    trd.set_defaults(handler=_cmd_spec_trend)

    dsc = ssub.add_parser("dsc", parents=[common],
                          help="diameter spectral-gap bound check")
    dsc.add_argument("--group", required=True,
                     help="zmod:n, complete:n, or sl2:m")
    dsc.add_argument("--tol", type=float, default=1e-9)
    dsc.add_argument("--cap-dim", type=int, default=DEFAULT_DIM_CAP)
    dsc.set_defaults(handler=_cmd_spec_dsc)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "maps", None) and getattr(args, "map", None):
            raise ConfigError("--map and --maps are mutually exclusive")
        if args.handler is _cmd_dyn_preimages and not (args.map or args.maps):
            raise ConfigError("preimages needs --map or --maps")
        report = args.handler(args)
        text = render(report, args.format)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
