"""Command line entry point: ``dphlog {enumerate,census,verify-hlog,verify-identity}``.

Exit status is 0 on success, 1 when a verification fails and 2 on usage or
configuration errors.  JSON output is deterministic for fixed flags and seed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .curves import CONIC_COUNTS, LINE_COUNTS, census_csv, conic_classes, lines, restricted_census, table2, type_census
from .hlog import IdentityError, coefficient_graph, epsilon_sign, hlog_sum, relation_space_dim, tau_family
from .hyperlog import ClearanceError, identity_residual, paths_clear, sample_targets
from .planegeom import (
    DegenerateConfiguration,
    builtin_x4,
    builtin_x5,
    choose_base,
    config_scale,
    p1_str,
    pencil_models,
    random_config,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
GENERATOR = "numpy.random.PCG64"
DEFAULT_TOL = {3: 1e-10, 4: 1e-9, 5: 1e-8, 6: 1e-6, 7: 1e-6, 8: 1e-6}
CONFIG_RETRIES = 20
BASE_RETRIES = 50
TARGET_RADIUS = 0.25


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    r: int
    seed: int
    fmt: str
    out: str | None
    tol: float | None = None
    points: int = 10
    what: str | None = None
    stretch: bool = False
    flip: int | None = None


def provenance(seed: int) -> dict:
    return {
        "seed": seed,
        "generator": {"name": GENERATOR, "numpy": np.__version__},
        "package": {"name": "dphlog", "version": __version__},
    }


def _class_rows(classes) -> list[list[int]]:
    return [list(c.vector) for c in classes]


def cmd_enumerate(cfg: RunConfig) -> tuple[int, dict, str, str]:
    if cfg.what not in ("lines", "conics"):
        raise UsageError("enumerate needs --what lines|conics")
    if cfg.what == "lines":
        classes, expected = lines(cfg.r).lines, LINE_COUNTS[cfg.r]
    else:
        classes, expected = conic_classes(cfg.r).conics, CONIC_COUNTS[cfg.r]
    rows = _class_rows(classes)
    ok = len(rows) == expected
    report = {"command": "enumerate", "r": cfg.r, "what": cfg.what, "count": len(rows),
              "expected": expected, "pass": ok, "classes": rows, **provenance(cfg.seed)}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["d"] + [f"m{i}" for i in range(1, cfg.r + 1)])
    writer.writerows(rows)
    text = "\n".join(str(c) for c in classes) + f"\n{cfg.what} on X_{cfg.r}: {len(rows)} (expected {expected})\n"
    return (EXIT_OK if ok else EXIT_FAIL), report, buf.getvalue(), text


def cmd_census(cfg: RunConfig) -> tuple[int, dict, str, str]:
    kinds = [cfg.what] if cfg.what else ["lines", "conics"]
    report = {"command": "census", "r": cfg.r, **provenance(cfg.seed)}
    ok = True
    csv_parts, text_parts = [], []
    for kind in kinds:
        found = type_census(kind, cfg.r)
        ref = table2(kind) if cfg.r == 8 else restricted_census(kind, cfg.r)
        match = found == ref
        ok &= match
        report[kind] = {
            "rows": [{"type": str(t), "count": n} for t, n in found.items()],
            "total": sum(found.values()),
            "reference": "published table" if cfg.r == 8 else "restriction of X_8",
            "match": match,
        }
        csv_parts.append(census_csv(found))
        text_parts.append(f"{kind} on X_{cfg.r} ({'match' if match else 'MISMATCH'}):")
        text_parts += [f"  {t.pretty():<24}{n:>6}" for t, n in found.items()]
        text_parts.append(f"  {'total':<24}{sum(found.values()):>6}")
    report["pass"] = ok
    # one header; line and conic types never coincide (self-intersection -1 vs 0)
    body = csv_parts[0] + "".join(p.split("\n", 1)[1] for p in csv_parts[1:])
    return (EXIT_OK if ok else EXIT_FAIL), report, body, "\n".join(text_parts) + "\n"


def cmd_verify_hlog(cfg: RunConfig) -> tuple[int, dict, str, str]:
    T = tau_family(cfg.r)
    report = {"command": "verify-hlog", "r": cfg.r, "conics": len(T), "tau_terms": int(T.keys.shape[1]),
              **provenance(cfg.seed)}
    if cfg.flip is not None:
        T = T.with_flipped_sign(cfg.flip % len(T))
        report["injected_fault"] = {"flipped_tau": cfg.flip % len(T)}
    failure = None
    try:
        hlog_sum(cfg.r, T)
        report["hlog_zero"] = True
    except IdentityError as exc:
        report["hlog_zero"] = False
        failure = f"hlog = 0 fails: {exc}"
    if failure is None:
        try:
            g = coefficient_graph(cfg.r, T)
            report["graph"] = {"keys": g.n_keys, "edges": g.n_edges, "components": g.n_components,
                               "pairs_ok": g.pairs_ok, "connected": g.connected}
        except IdentityError as exc:
            failure = f"pair structure fails: {exc}"
    if failure is None:
        dim, method = relation_space_dim(cfg.r, T)
        report["relation_space_dim"] = dim
        report["relation_method"] = method
        if dim != 1:
            failure = f"relation space has dimension {dim}"
    report["pass"] = failure is None
    if failure:
        report["failure"] = failure
    lines_out = [f"X_{cfg.r}: {len(T)} tau vectors of {report['tau_terms']} terms"]
    lines_out.append(f"hlog = 0: {report['hlog_zero']}")
    if "graph" in report:
        g = report["graph"]
        lines_out.append(f"keys {g['keys']}, edges {g['edges']}, components {g['components']}")
    if "relation_space_dim" in report:
        lines_out.append(f"relation space dim {report['relation_space_dim']} ({report['relation_method']})")
    lines_out.append("PASS" if failure is None else f"FAIL: {failure}")
    flat = io.StringIO()
    writer = csv.writer(flat, lineterminator="\n")
    writer.writerow(["r", "hlog_zero", "relation_space_dim", "pass"])
    writer.writerow([cfg.r, report["hlog_zero"], report.get("relation_space_dim", ""), report["pass"]])
    return (EXIT_OK if failure is None else EXIT_FAIL), report, flat.getvalue(), "\n".join(lines_out) + "\n"


def build_models(r: int, rng: np.random.Generator, seed: int):
    """Configuration, models and the seed actually used (bumped on degenerate draws)."""
    if r == 4:
        cfg, models = builtin_x4()
        return cfg, models, seed
    if r == 5:
        cfg, models = builtin_x5()
        return cfg, models, seed
    for k in range(CONFIG_RETRIES):
        sub = np.random.default_rng(seed + k)
        try:
            cfg = random_config(r, sub)
            return cfg, pencil_models(cfg), seed + k
        except DegenerateConfiguration:
            continue
    raise DegenerateConfiguration(f"no usable configuration after {CONFIG_RETRIES} seeds")


def pick_base(cfg, models, rng: np.random.Generator):
    """A base point whose image keeps clearance from every singular value."""
    for _ in range(BASE_RETRIES):
        base = choose_base(cfg, rng)
        base_c = (complex(base[0]), complex(base[1]))
        if paths_clear(models, base_c, base_c):
            return base, base_c
    raise ClearanceError(f"no base point clear of the singular values after {BASE_RETRIES} draws")


def run_identity(r: int, seed: int, points: int, tol: float) -> dict:
    rng = np.random.default_rng(seed)
    cfg, models, used = build_models(r, rng, seed)
    T = tau_family(r)
    signs = [epsilon_sign(m.c, m.fibers, T) for m in models]
    base, base_c = pick_base(cfg, models, rng)
    targets = sample_targets(models, base_c, rng, points, TARGET_RADIUS * config_scale(cfg))
    results = []
    for tgt in targets:
        rep = identity_residual(models, signs, base_c, tgt)
        results.append({"target": [[t.real, t.imag] for t in tgt], "abs_residual": rep.abs,
                        "term_scale": rep.scale})
    worst = max(x["abs_residual"] for x in results)
    return {
        "config_seed": used,
        "points": [[p1_str(x) for x in p] for p in cfg.points],
        "models": [{"label": m.label, "class": str(m.c),
                    "singular_values": [p1_str(v) for v in m.singular_values]} for m in models],
        "signs": signs,
        "base": [p1_str(base[0]), p1_str(base[1])],
        "tolerance": tol,
        "targets": results,
        "max_abs_residual": worst,
        "pass": worst < tol,
    }


def cmd_verify_identity(cfg: RunConfig) -> tuple[int, dict, str, str]:
    if cfg.r not in (3, 4, 5, 6) and not cfg.stretch:
        raise UsageError("verify-identity supports r in {3,4,5,6}; pass --stretch to attempt r = 7, 8")
    if cfg.points < 1:
        raise UsageError("--points must be positive")
    tol = DEFAULT_TOL[cfg.r] if cfg.tol is None else cfg.tol
    try:
        body = run_identity(cfg.r, cfg.seed, cfg.points, tol)
    except (DegenerateConfiguration, ClearanceError) as exc:
        raise UsageError(f"configuration error: {exc}") from exc
    report = {"command": "verify-identity", "r": cfg.r, **provenance(cfg.seed), **body}
    flat = io.StringIO()
    writer = csv.writer(flat, lineterminator="\n")
    writer.writerow(["target", "abs_residual", "term_scale"])
    for i, t in enumerate(body["targets"]):
        writer.writerow([i, repr(t["abs_residual"]), repr(t["term_scale"])])
    sign_str = ",".join("+" if s > 0 else "-" for s in body["signs"])
    scales = [t["term_scale"] for t in body["targets"]]
    text = (f"X_{cfg.r}: {len(body['models'])} fibrations, signs ({sign_str})\n"
            f"max |residual| over {len(body['targets'])} targets: {body['max_abs_residual']:.3e} (tol {tol:g})\n"
            f"largest term per target: {min(scales):.3e} .. {max(scales):.3e}\n"
            f"{'PASS' if body['pass'] else 'FAIL'}\n")
    return (EXIT_OK if body["pass"] else EXIT_FAIL), report, flat.getvalue(), text


COMMANDS = {
    "enumerate": cmd_enumerate,
    "census": cmd_census,
    "verify-hlog": cmd_verify_hlog,
    "verify-identity": cmd_verify_identity,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dphlog", description="Hyperlogarithmic identities of del Pezzo surfaces.")
    parser.add_argument("--version", action="version", version=f"dphlog {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--r", type=int, required=True, help="number of blown-up points, 3..8")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv", "text"), default="text")
        p.add_argument("--out", help="write the report here instead of stdout")
        if name in ("enumerate", "census"):
            p.add_argument("--what", choices=("lines", "conics"), required=(name == "enumerate"))
        if name == "verify-identity":
            p.add_argument("--points", type=int, default=10, help="number of random targets")
            p.add_argument("--tol", type=float, default=None)
            p.add_argument("--stretch", action="store_true", help="allow r = 7, 8 (slow)")
        if name == "verify-hlog":
            # fault injection for harness self-tests
            p.add_argument("--flip-tau", type=int, default=None, help=argparse.SUPPRESS)
    return parser


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    if not 3 <= ns.r <= 8:
        raise UsageError(f"--r must be in 3..8, got {ns.r}")
    return RunConfig(
        command=ns.command, r=ns.r, seed=ns.seed, fmt=ns.format, out=ns.out,
        tol=getattr(ns, "tol", None), points=getattr(ns, "points", 10), what=getattr(ns, "what", None),
        stretch=getattr(ns, "stretch", False), flip=getattr(ns, "flip_tau", None),
    )


def render(report: dict, flat: str, text: str, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    return flat if fmt == "csv" else text


def main(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        code, report, flat, text = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"dphlog: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = render(report, flat, text, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
