"""`geomlaw` command line interface.

A thin client over the service handler layer: every subcommand builds the
same request model the HTTP endpoints consume and either executes it
in-process (default) or posts it to a running server (--server URL).

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 validation
error. Errors are written to stderr as one JSON object with a stable code.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import __version__, tolerances
from .errors import GeomlawError
from .sampling import write_csv
from .service import handlers, schemas as sch

_EXIT_VERIFY_FAILED = 1
_EXIT_USAGE = 2
_EXIT_VALIDATION = 3


def _read_json(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _parse_at(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError as exc:
        raise GeomlawError("usage", f"--at expects a comma-separated integer list, got {text!r}") from exc


def _seq_doc(raw) -> sch.SequenceDoc:
    if isinstance(raw, list):
        raise GeomlawError("invalid-document", "expected a sequence document with a 'role' field")
    return sch.SequenceDoc(**raw)


def _values_of(raw) -> list[float]:
    if isinstance(raw, list):
        return [float(v) for v in raw]
    if isinstance(raw, dict) and "values" in raw:
        return [float(v) for v in raw["values"]]
    raise GeomlawError("invalid-document", "expected a JSON array or an object with a 'values' field")


def _post(server: str, path: str, payload: dict):
    import httpx

    resp = httpx.post(server.rstrip("/") + path, json=payload, timeout=600.0)
    return resp


def _seed_from(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("GEOMLAW_SEED")
    return int(env) if env else 0


def _law_doc_from_flags(args) -> dict:
    kind = args.law.replace("-", "_")
    if kind == "zero_inf":
        return {"kind": "bernoulli", "q": 1.0 - args.p0, "level": "inf"}
    doc: dict = {"kind": kind}
    fields = {
        "degenerate": ["x0"],
        "gamma": ["shape", "rate"],
        "compound_poisson_exp": ["intensity", "jump_rate"],
        "geometric_killed": ["p", "finite_mass"],
        "bernoulli": ["q", "level"],
    }.get(kind)
    if fields is None:
        raise GeomlawError("usage", f"unknown law {args.law!r}")
    for name in fields:
        value = getattr(args, name)
        if value is None:
            raise GeomlawError("usage", f"law {kind} needs --{name.replace('_', '-')}")
        doc[name] = value
    return doc


def _maybe_inf(text: str) -> float | str:
    return "inf" if text in ("inf", "infinity") else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geomlaw",
        description="Multivariate geometric distributions with the lack-of-memory property.",
    )
    parser.add_argument("--version", action="version", version=f"geomlaw {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False, out=False):
        p.add_argument("--tolerance", type=float, default=None, help="override the numeric tolerances globally")
        p.add_argument("--server", default=None, help="send the request to a running geomlaw service instead")
        if seed:
            p.add_argument("--seed", type=int, default=None, help="RNG seed (falls back to $GEOMLAW_SEED, then 0)")
            p.add_argument("--workers", type=int, default=1, help="deterministic substream count")
        if out:
            p.add_argument("--out", required=True, help="output CSV path (provenance goes to <out>.meta.json)")

    p = sub.add_parser(
        "classify-seq",
        help="class-membership report for a real sequence",
        epilog='example: echo "[1, 0.5, 0.2]" > s.json; geomlaw classify-seq --json s.json  '
        "-> in_M true, hankel_extendible_M false",
    )
    p.add_argument("--json", required=True, help="JSON array of values, or an object with a 'values' field")
    common(p)

    p = sub.add_parser(
        "classify",
        help="family tag (exchangeable Venn region) for a parameter sequence",
        epilog='example: {"role":"beta","values":[1,0.5,0.2]} -> family G^{W,X} (monotone, not extendible)',
    )
    p.add_argument("--json", required=True, help="sequence document with a role")
    common(p)

    p = sub.add_parser(
        "survival",
        help="joint survival probability at a lattice point",
        epilog='example: {"family":"narrow","d":2,"params":{"1":0.5,"2":0.6,"3":0.9}} --at 1,1 -> 0.27',
    )
    p.add_argument("--params", required=True, help="parameter or sequence document (JSON file, - for stdin)")
    p.add_argument("--at", required=True, help="comma-separated point, e.g. 1,2,0")
    p.add_argument("--fill-narrow-ones", "--fill-wide-zeros", dest="fill", action="store_true",
                   help="fill missing subset keys with the family's neutral value")
    common(p)

    p = sub.add_parser(
        "pmf",
        help="probability mass at a point (inclusion-exclusion over the survival)",
        epilog='example: {"family":"narrow","d":1,"params":{"1":0.5}} --at 5 -> 0.03125',
    )
    p.add_argument("--params", required=True)
    p.add_argument("--at", required=True)
    p.add_argument("--fill-narrow-ones", "--fill-wide-zeros", dest="fill", action="store_true")
    common(p)

    p = sub.add_parser(
        "sample",
        help="draw a batch and write CSV plus a provenance sidecar",
        epilog="example: geomlaw sample --model narrow --params narrow.json --n 100000 --seed 42 "
        "--workers 4 --out draws.csv",
    )
    p.add_argument("--model", required=True, choices=["narrow", "wide", "definetti", "sieve"])
    p.add_argument("--params", required=True, help="model document: params/sequence, law + d, or mixing + d")
    p.add_argument("--n", required=True, type=int)
    common(p, seed=True, out=True)

    p = sub.add_parser(
        "dependence",
        help="pairwise correlation matrix and right-tail-increasing verdict",
        epilog='example: {"role":"beta","values":[1,0.5,0.2]} -> corr -0.125, mrti false',
    )
    p.add_argument("--params", required=True, help="parameter or sequence document")
    p.add_argument("--grid-max", type=int, default=3)
    p.add_argument("--fill-narrow-ones", "--fill-wide-zeros", dest="fill", action="store_true")
    common(p)

    p = sub.add_parser(
        "moments",
        help="exponential moment sequence of an increment law",
        epilog="example: geomlaw moments --law gamma --shape 2 --rate 3 --d 5 -> b-sequence (divisible law)",
    )
    p.add_argument("--law", required=True,
                   choices=["degenerate", "gamma", "compound-poisson-exp", "geometric-killed", "bernoulli", "zero-inf"])
    p.add_argument("--d", required=True, type=int)
    p.add_argument("--x0", type=_maybe_inf, default=None)
    p.add_argument("--shape", type=float, default=None)
    p.add_argument("--rate", type=float, default=None)
    p.add_argument("--intensity", type=float, default=None)
    p.add_argument("--jump-rate", dest="jump_rate", type=float, default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--finite-mass", dest="finite_mass", type=float, default=1.0)
    p.add_argument("--q", type=float, default=None)
    p.add_argument("--level", type=_maybe_inf, default=None)
    p.add_argument("--p0", type=float, default=None, help="mass at zero for --law zero-inf")
    common(p)

    p = sub.add_parser(
        "extend",
        help="feasible interval for extending an exchangeable row by one dimension",
        epilog='example: {"role":"p","values":[0.5,0.8]} -> closed feasibility interval for the appended parameter',
    )
    p.add_argument("--json", required=True, help="sequence document")
    common(p)

    p = sub.add_parser(
        "verify",
        help="run the cross-verification harnesses (exit 1 on failure)",
        epilog="example: geomlaw verify --suite quick",
    )
    p.add_argument("--suite", default="quick", choices=["quick", "all"])
    common(p)

    p = sub.add_parser(
        "convert",
        help="convert between parameter documents (refuses lossy directions)",
        epilog='example: geomlaw convert --from p --to beta --json p.json; wide->narrow is refused for d >= 3',
    )
    p.add_argument("--from", dest="from_kind", required=True, help="source role/family (informational)")
    p.add_argument("--to", required=True, help="target role (p,a,b,ptilde,beta) or family (narrow,wide)")
    p.add_argument("--json", required=True)
    p.add_argument("--fill-narrow-ones", "--fill-wide-zeros", dest="fill", action="store_true")
    common(p)

    return parser


def _dispatch(args) -> int:
    if args.tolerance is not None:
        tolerances.VALIDATION = args.tolerance
        tolerances.ORACLE = args.tolerance
        tolerances.HANKEL_EIG = args.tolerance
        tolerances.PMF_CLAMP = args.tolerance

    cmd = args.command
    if cmd == "classify-seq":
        req = sch.ClassifySeqRequest(values=_values_of(_read_json(args.json)), tolerance=args.tolerance)
        if args.server:
            return _remote(args.server, "/classify-seq", req)
        _emit(handlers.handle_classify_seq(req).model_dump())
        return 0
    if cmd == "classify":
        req = sch.ClassifyRequest(sequence=_seq_doc(_read_json(args.json)))
        if args.server:
            return _remote(args.server, "/classify", req)
        _emit(handlers.handle_classify(req).model_dump())
        return 0
    if cmd in ("survival", "pmf"):
        doc = _read_json(args.params)
        kwargs = {"at": _parse_at(args.at), "fill": args.fill}
        if isinstance(doc, dict) and "role" in doc:
            kwargs["sequence"] = sch.SequenceDoc(**doc)
        else:
            kwargs["params"] = sch.ParamsDoc(**doc)
        if cmd == "survival":
            req = sch.SurvivalRequest(**kwargs)
            if args.server:
                return _remote(args.server, "/survival", req)
            _emit(handlers.handle_survival(req).model_dump())
        else:
            req = sch.PmfRequest(**kwargs)
            if args.server:
                return _remote(args.server, "/pmf", req)
            _emit(handlers.handle_pmf(req).model_dump())
        return 0
    if cmd == "sample":
        req = sch.SampleRequest(
            model=args.model,
            spec=_read_json(args.params),
            n=args.n,
            seed=_seed_from(args),
            workers=args.workers,
        )
        if args.server:
            resp = _post(args.server, "/sample", req.model_dump())
            if resp.status_code != 200:
                return _report_http_error(resp)
            with open(args.out, "w") as fh:
                fh.write(resp.text)
            meta = json.loads(resp.headers["X-Geomlaw-Meta"])
            with open(args.out + ".meta.json", "w") as fh:
                json.dump(meta, fh, indent=2, sort_keys=True)
                fh.write("\n")
            _emit(meta)
            return 0
        batch = handlers.handle_sample(req)
        write_csv(batch, args.out)
        _emit(batch.provenance)
        return 0
    if cmd == "dependence":
        doc = _read_json(args.params)
        kwargs = {"grid_max": args.grid_max, "fill": args.fill}
        if isinstance(doc, dict) and "role" in doc:
            kwargs["sequence"] = sch.SequenceDoc(**doc)
        else:
            kwargs["params"] = sch.ParamsDoc(**doc)
        req = sch.DependenceRequest(**kwargs)
        if args.server:
            return _remote(args.server, "/dependence", req)
        _emit(handlers.handle_dependence(req).model_dump())
        return 0
    if cmd == "moments":
        req = sch.MomentsRequest(law=_law_doc_from_flags(args), d=args.d)
        if args.server:
            return _remote(args.server, "/moments", req)
        _emit(handlers.handle_moments(req).model_dump())
        return 0
    if cmd == "extend":
        req = sch.ExtendRequest(sequence=_seq_doc(_read_json(args.json)))
        if args.server:
            return _remote(args.server, "/extend", req)
        _emit(handlers.handle_extend(req).model_dump())
        return 0
    if cmd == "verify":
        req = sch.VerifyRequest(suite=args.suite)
        if args.server:
            resp = _post(args.server, "/verify", req.model_dump())
            if resp.status_code != 200:
                return _report_http_error(resp)
            body = resp.json()
            _emit(body)
            return 0 if body.get("passed") else _EXIT_VERIFY_FAILED
        result = handlers.handle_verify(req)
        _emit(result.model_dump())
        return 0 if result.passed else _EXIT_VERIFY_FAILED
    if cmd == "convert":
        req = sch.ConvertRequest(to=args.to, document=_read_json(args.json), fill=args.fill)
        if args.server:
            return _remote(args.server, "/convert", req)
        _emit(handlers.handle_convert(req).document)
        return 0
    raise GeomlawError("usage", f"unknown command {cmd!r}")


def _report_http_error(resp) -> int:
    try:
        body = resp.json()
    except ValueError:
        body = {"error": {"code": "http-error", "message": resp.text}}
    print(json.dumps(body, sort_keys=True), file=sys.stderr)
    return _EXIT_VALIDATION if resp.status_code == 400 else _EXIT_VERIFY_FAILED


def _remote(server: str, path: str, req) -> int:
    resp = _post(server, path, req.model_dump())
    if resp.status_code != 200:
        return _report_http_error(resp)
    _emit(resp.json())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except GeomlawError as exc:
        print(json.dumps({"error": exc.to_dict()}, sort_keys=True), file=sys.stderr)
        return _EXIT_USAGE if exc.code == "usage" else _EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(json.dumps({"error": {"code": "file-not-found", "message": str(exc)}}, sort_keys=True), file=sys.stderr)
        return _EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
