"""Command-line interface: ``avsub enumerate|count|fit|verify|ellipsoid``.

Exit codes: 0 success, 2 input error, 3 invariant violation (or a failed
verification / bound), 4 inconclusive slope fit.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__, kernels
from .configfile import REFERENCE_CONFIGS, ConfigError, config_digest, load_config, reference_config_path
from .counting import counting_function, fit_exponent, theorem_bound_exponent
from .engine import Enumerator, HomSpace
from .linalg import StructuralError
from .quadform import ellipsoid_volume_estimate, enumerate_in_ellipsoid
from .torus import InvariantViolation, Provenance, Subvariety, VarietyConfig
from .verify import run_verify

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT, EXIT_INCONCLUSIVE = 0, 2, 3, 4


@dataclass
class RunManifest:
    config_digest: str
    command: str
    parameters: dict
    tool_version: str = __version__
    backend: str = kernels.BACKEND
    elapsed_seconds: float = 0.0
    result_digests: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "config_digest": self.config_digest,
            "command": self.command,
            "parameters": self.parameters,
            "tool_version": self.tool_version,
            "backend": self.backend,
            "elapsed_seconds": round(self.elapsed_seconds, 6),
            "result_digests": self.result_digests,
        }


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def provenance_json(p: Provenance):
    """JSON-safe provenance; nested subvarieties are reduced to their own provenance."""
    out = {"kind": p.kind}
    for key, value in sorted(p.data.items()):
        out[key] = _jsonable(value)
    return out


def _jsonable(value):
    if isinstance(value, Subvariety):
        return {"lattice": [list(r) for r in value.lattice], "chi": value.chi,
                "provenance": provenance_json(value.provenance)}
    if isinstance(value, (tuple, list)):
        return [_jsonable(x) for x in value]
    return value


def _record(s: Subvariety, provenance: bool = True) -> dict:
    rec = {"dim": s.dim, "chi": s.chi, "basis": [list(r) for r in s.lattice]}
    if provenance:
        rec["provenance"] = provenance_json(s.provenance)
    return rec


def _sorted_records(subs) -> list[Subvariety]:
    return sorted(subs, key=Subvariety.sort_key)


def render_enumeration(subs, fmt: str) -> str:
    subs = _sorted_records(subs)
    if fmt == "json":
        return json.dumps([_record(s) for s in subs], sort_keys=True, separators=(",", ":")) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dim", "chi", "basis", "provenance"])
    for s in subs:
        basis = ";".join(" ".join(map(str, r)) for r in s.lattice)
        w.writerow([s.dim, s.chi, basis, json.dumps(provenance_json(s.provenance), sort_keys=True,
                                                   separators=(",", ":"))])
    return buf.getvalue()


def _resolve_config(arg: str) -> VarietyConfig:
    if arg in REFERENCE_CONFIGS and not Path(arg).exists():
        return load_config(reference_config_path(arg))
    return load_config(arg)


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="avsub", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="variety JSON file, or the name of a shipped reference config")
    common.add_argument("--threads", type=_positive, default=1)
    common.add_argument("--manifest", metavar="PATH", help="write a run manifest (JSON) here")
    common.add_argument("-o", "--output", metavar="PATH", help="write the result here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common], help="list subvarieties with chi <= T")
    p.add_argument("--max-chi", type=_positive, required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--exclude-trivial", action="store_true")

    p = sub.add_parser("count", parents=[common], help="CSV table of N(t)")
    p.add_argument("--max-chi", type=_positive, required=True)
    p.add_argument("--step", type=_positive, default=1)
    p.add_argument("--exclude-trivial", action="store_true")

    p = sub.add_parser("fit", parents=[common], help="fit the growth exponent of N(t)")
    p.add_argument("--max-chi", type=_positive, required=True)

    p = sub.add_parser("verify", parents=[common], help="run every invariant suite")
    p.add_argument("--max-chi", type=_positive, required=True)
    p.add_argument("--isogeny-t", type=_positive, default=None,
                   help="range of the isogeny inequalities (default min(50, T))")

    p = sub.add_parser("ellipsoid", parents=[common], help="lattice points vs volume for a degree form")
    p.add_argument("--copy", type=int, default=0, help="copy index i; the form lives on Hom(B_i, other copies)")
    p.add_argument("--max-t", type=_positive, required=True)
    p.add_argument("--step", type=_positive, default=1)
    return ap


def _partner_degrees(v: VarietyConfig, copy: int):
    if not 0 <= copy < v.g:
        raise ConfigError("--copy", f"copy index must be in [0, {v.g - 1}], got {copy}")
    for block, off in zip(v.blocks, v.offsets):
        if off <= copy < off + block.multiplicity:
            rest = block.degrees[:copy - off] + block.degrees[copy - off + 1:]
            if not rest:
                raise ConfigError("--copy", f"copy {copy} is alone in block {block.name}; Hom space is zero")
            return block, rest
    raise AssertionError("unreachable")


def cmd_enumerate(v, args, manifest) -> tuple[int, str]:
    en = Enumerator(threads=args.threads)
    subs = en.variety(v, args.max_chi)
    if args.exclude_trivial:
        subs = [s for s in subs if 0 < s.dim < v.g]
    text = render_enumeration(subs, args.format)
    manifest.result_digests["records"] = _digest(text)
    manifest.result_digests["count"] = len(subs)
    return EXIT_OK, text


def cmd_count(v, args, manifest) -> tuple[int, str]:
    ts = list(range(args.step, args.max_chi + 1, args.step))
    if not ts or ts[-1] != args.max_chi:
        ts.append(args.max_chi)
    table = counting_function(v, ts, Enumerator(threads=args.threads), exclude_trivial=args.exclude_trivial)
    text = table.to_csv()
    manifest.result_digests["table"] = _digest(text)
    return EXIT_OK, text


def cmd_fit(v, args, manifest) -> tuple[int, str]:
    table = counting_function(v, range(1, args.max_chi + 1), Enumerator(threads=args.threads))
    report = fit_exponent(table, theorem_bound_exponent(v))
    text = json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n"
    manifest.result_digests["report"] = _digest(text)
    code = {"pass": EXIT_OK, "fail": EXIT_INVARIANT, "inconclusive": EXIT_INCONCLUSIVE}[report.status]
    return code, text


def cmd_verify(v, args, manifest) -> tuple[int, str]:
    results = run_verify(v, args.max_chi, iso_t=args.isogeny_t, threads=args.threads)
    lines = [r.line() for r in results]
    for r in results:
        lines.extend(f"  - {f}" for f in r.failures)
    ok = all(r.ok for r in results)
    lines.append("verify: " + ("all invariants hold" if ok else "FAILURES"))
    text = "\n".join(lines) + "\n"
    manifest.result_digests["report"] = _digest(text)
    return (EXIT_OK if ok else EXIT_INVARIANT), text


def cmd_ellipsoid(v, args, manifest) -> tuple[int, str]:
    block, rest = _partner_degrees(v, args.copy)
    q = HomSpace(block.ring, rest).form
    values = sorted(q(p) for p in enumerate_in_ellipsoid(q, args.max_t * args.max_t))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "phi", "volume_estimate", "ratio"])
    for t in range(args.step, args.max_t + 1, args.step):
        phi = bisect_right(values, t * t)
        vol = ellipsoid_volume_estimate(q, t)
        w.writerow([t, phi, f"{vol:.6f}", f"{phi / vol:.6f}"])
    text = buf.getvalue()
    manifest.result_digests["table"] = _digest(text)
    return EXIT_OK, text


COMMANDS = {
    "enumerate": cmd_enumerate,
    "count": cmd_count,
    "fit": cmd_fit,
    "verify": cmd_verify,
    "ellipsoid": cmd_ellipsoid,
}


def _parameters(args) -> dict:
    skip = {"command", "config", "manifest", "output", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        v = _resolve_config(args.config)
        manifest = RunManifest(config_digest(v), args.command, _parameters(args))
        code, text = COMMANDS[args.command](v, args, manifest)
    except ConfigError as exc:
        print(f"avsub: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantViolation, StructuralError) as exc:
        print(f"avsub: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    manifest.elapsed_seconds = time.perf_counter() - start
    if args.manifest:
        Path(args.manifest).write_text(json.dumps(manifest.to_json(), sort_keys=True, indent=2) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
