"""Command-line front end: config loading, on-disk cache, reports and verification suites."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from . import __version__
from .bsmod import bottom_tensor, closed_formula_f2_3
from .catbases import (Workspace, basis_element, basis_report, build_D, build_E, iso_check,
                       q1_crosscheck, summand_chain, tuple_independence_check, unshifted)
from .cores import core_decomposition, f_tuple, gf_tuple
from .coxeter import CoxeterSystem, alternating
from .errors import ConfigError, SoergelError
from .field import NumberField

CACHE_VERSION = f"soergel-bases/{__version__}/1"


@dataclass
class Config:
    bond: list
    generators: list | None = None
    field: dict | None = None
    extra_large: bool = True
    truncation: int | None = None
    cache_dir: str | None = None
    format: str = "json"
    jobs: int = 1
    seed: int = 0
    raw: dict = dc_field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data = dict(data)
        if "dihedral" in data:
            m = int(data.pop("dihedral"))
            data.setdefault("bond", [[1, m], [m, 1]])
            data.setdefault("generators", ["s", "r"])
        if "bond" not in data:
            raise ConfigError("config needs a bond matrix (or 'dihedral': m)")
        fmt = data.get("format", "json")
        if fmt not in ("json", "csv", "dot", "pretty"):
            raise ConfigError(f"unknown format {fmt!r}")
        trunc = data.get("truncation")
        if trunc is not None and int(trunc) < 0:
            raise ConfigError("truncation must be nonnegative")
        cfg = cls(bond=data["bond"], generators=data.get("generators"), field=data.get("field"),
                  extra_large=bool(data.get("extra_large", True)),
                  truncation=None if trunc is None else int(trunc),
                  cache_dir=data.get("cache_dir"), format=fmt, jobs=int(data.get("jobs", 1)),
                  seed=int(data.get("seed", 0)))
        cfg.raw = cfg.to_dict()
        return cfg

    def to_dict(self) -> dict:
        return {"bond": self.bond, "generators": self.generators, "field": self.field,
                "extra_large": self.extra_large, "truncation": self.truncation,
                "format": self.format, "seed": self.seed}

    def system(self) -> CoxeterSystem:
        F = None
        if self.field is not None:
            f = self.field
            F = NumberField(f.get("minpoly"), cos=f.get("cos"), root=f.get("root"))
        return CoxeterSystem(self.bond, names=self.generators, field=F,
                             require_extra_large=self.extra_large)


class Cache:
    """Content-addressed JSON payload store with a version tag."""

    def __init__(self, root: str | None):
        self.root = Path(root) if root else None

    def key(self, cfg: Config, op: str, inputs) -> str:
        blob = json.dumps({"v": CACHE_VERSION, "cfg": cfg.to_dict(), "op": op, "in": inputs},
                          sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def get(self, key: str):
        if self.root is None:
            return None
        path = self.root / f"{key}.json"
        try:
            entry = json.loads(path.read_text())
        except (OSError, ValueError):
            return None
        if not isinstance(entry, dict) or entry.get("version") != CACHE_VERSION:
            return None
        return entry.get("payload")

    def put(self, key: str, payload):
        if self.root is None:
            return
        self.root.mkdir(parents=True, exist_ok=True)
        tmp = self.root / f"{key}.tmp"
        tmp.write_text(json.dumps({"version": CACHE_VERSION, "payload": payload}, sort_keys=True))
        os.replace(tmp, self.root / f"{key}.json")

    def cached(self, cfg, op, inputs, compute):
        k = self.key(cfg, op, inputs)
        hit = self.get(k)
        if hit is not None:
            return hit
        payload = json.loads(json.dumps(compute(), sort_keys=True))
        self.put(k, payload)
        return payload


# commands


def cmd_group_validate(cfg: Config) -> dict:
    W = cfg.system()
    return {"ok": True, "generators": list(W.names), "bond": W.bond, "extra_large": W.extra_large,
            "field": W.field.to_json()}


def cmd_rex(cfg: Config, word: str) -> dict:
    W = cfg.system()
    x = W.element(W.parse_word(word))
    g = W.rex_graph(x)
    return {"element": W.format_word(x.word), "length": x.length,
            "rex": [W.format_word(r) for r in sorted(g.vertices)],
            "edges": [{"from": W.format_word(e.source), "to": W.format_word(e.target), "pos": e.pos}
                      for e in g.edges]}


def rex_dot(data: dict) -> str:
    lines = [f'graph "{data["element"]}" {{']
    for r in data["rex"]:
        lines.append(f'  "{r}";')
    seen = set()
    for e in data["edges"]:
        key = tuple(sorted((e["from"], e["to"])))
        if key in seen:
            continue
        seen.add(key)
        lines.append(f'  "{e["from"]}" -- "{e["to"]}" [label="{e["pos"]}"];')
    lines.append("}")
    return "\n".join(lines)


def cmd_cores(cfg: Config, word: str) -> dict:
    W = cfg.system()
    w = tuple(W.parse_word(word))
    out = core_decomposition(W, w).to_json(W)
    if w:
        out["f_tuple"] = [str(m) for m in f_tuple(W, w).moves]
        if W.extra_large:
            out["gf_tuple"] = [str(m) for m in gf_tuple(W, w).moves]
    return out


def cmd_morphism(cfg: Config, ws: Workspace, kind: str, s: str, r: str, n: int | None = None) -> dict:
    W = ws.system
    a, b = W.parse_word(s)[0], W.parse_word(r)[0]
    if kind == "fsr":
        g = ws.ctx.f_sr(a, b)
    else:
        g = ws.ctx.f2(a, b, n if n is not None else W.m(a, b))
    return {"morphism": g.to_json(), "bimodule": ws.ctx.verify_bimodule(g)}


def cmd_basis(cfg: Config, ws: Workspace, kind: str, up_to: int) -> dict:
    W, H = ws.system, ws.hecke
    rows = {}
    for x in W.elements_up_to(up_to):
        name = W.format_word(x.word) or "e"
        if kind == "kl":
            h = H.kl(x)
        elif kind == "bs":
            h = H.bs_kl(x.word)
        else:
            h = basis_element(ws, x.word, kind.upper()).h
        rows[name] = {W.format_word(y.word) or "e": str(c) for y, c in sorted(h.c.items())}
    return {"kind": kind, "up_to": up_to, "rows": rows,
            "provenance": {"config": cfg.to_dict(), "truncation": ws.truncation, "version": __version__}}


def cmd_compare(cfg: Config, ws: Workspace, word: str) -> dict:
    W, H = ws.system, ws.hecke
    e = basis_element(ws, word, "E")
    d = basis_element(ws, word, "D")
    kl = H.kl(e.w)

    def fmt(h):
        return {W.format_word(y.word) or "e": str(c) for y, c in sorted(h.c.items())}

    return {"w": W.format_word(e.w.word), "e": fmt(e.h), "d": fmt(d.h), "kl": fmt(kl),
            "d_equals_kl": d.h == kl, "e_minus_d_positive": summand_chain(ws, e, d, with_kl=False),
            "d_minus_kl_positive": H.is_positive(unshifted(d) - kl.shift(-e.w.length))}


def table_csv(data: dict) -> str:
    cols = sorted({c for row in data["rows"].values() for c in row}, key=lambda s: (len(s), s))
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["w"] + cols)
    for w, row in data["rows"].items():
        wr.writerow([w] + [row.get(c, "0") for c in cols])
    return buf.getvalue()


# verification suites


@dataclass
class SuiteResult:
    name: str
    passed: bool
    failures: list = dc_field(default_factory=list)

    def to_json(self):
        return {"suite": self.name, "passed": self.passed, "failures": self.failures}


def _pairs(W):
    return [(a, b) for a in range(W.rank) for b in range(W.rank) if a != b]


def suite_fsr(ws: Workspace) -> SuiteResult:
    ctx, W = ws.ctx, ws.system
    fails = []
    for a, b in _pairs(W):
        f, g = ctx.f_sr(a, b), ctx.f_sr(b, a)
        tag = f"f_{W.names[a]}{W.names[b]}"
        top = f.src.size - 1
        checks = {
            "degree": f.degree == 0 and f.is_homogeneous(),
            "bimodule": ctx.verify_bimodule(f),
            "normalized": f.entry(top, top) == ctx.ring.one,
            "fgf": f.compose(g).compose(f) == f,
            "bottom_tensor": all(bottom_tensor(ctx, f.tgt, f.column(j), a) for j in f.src.basis()),
        }
        for k, ok in checks.items():
            if not ok:
                fails.append({"morphism": tag, "check": k, "dump": f.to_json()})
    return SuiteResult("fsr", not fails, fails)


def suite_f2(ws: Workspace) -> SuiteResult:
    ctx, W = ws.ctx, ws.system
    fails = []
    for a, b in _pairs(W):
        m = W.m(a, b)
        tag = f"{W.names[a]}{W.names[b]}"
        if ctx.f2(a, b, 2) != ctx.identity((a, b)):
            fails.append({"pair": tag, "check": "n=2 identity"})
        if m >= 3 and ctx.f2(a, b, 3) != closed_formula_f2_3(ctx, a, b):
            fails.append({"pair": tag, "check": "n=3 closed formula"})
        if m <= 5 and ctx.f2(a, b, m) != ctx.f_sr(b, a).compose(ctx.f_sr(a, b)):
            fails.append({"pair": tag, "check": "n=m composite"})
    return SuiteResult("f2", not fails, fails)


def suite_idem(ws: Workspace, up_to: int = 4) -> SuiteResult:
    W = ws.system
    fails = []
    for x in W.elements_up_to(up_to):
        if not x.word:
            continue
        rex = sorted(W.rex_set(x))
        name = W.format_word(x.word)
        for build in (build_E, build_D):
            try:
                b = build(ws, x.word)
            except SoergelError as exc:
                fails.append({"w": name, "check": build.__name__, "error": str(exc)})
                continue
            if not ws.ctx.verify_bimodule(b.e):
                fails.append({"w": name, "check": f"{build.__name__} bimodule"})
        if not tuple_independence_check(ws, x.word, trials=2):
            fails.append({"w": name, "check": "tuple independence"})
        for r in rex[1:]:
            if not iso_check(ws, rex[0], r):
                fails.append({"w": name, "check": f"iso {W.format_word(r)}"})
    return SuiteResult("idem", not fails, fails)


def suite_bases(ws: Workspace, up_to: int = 4) -> SuiteResult:
    W, H = ws.system, ws.hecke
    fails = []
    elems = {"E": [], "D": []}
    for x in W.elements_up_to(up_to):
        name = W.format_word(x.word) or "e"
        try:
            e = basis_element(ws, x.word, "E")
            d = basis_element(ws, x.word, "D")
        except SoergelError as exc:
            fails.append({"w": name, "error": str(exc)})
            continue
        elems["E"].append(e)
        elems["D"].append(d)
        if not q1_crosscheck(ws, build_E(ws, x.word), e):
            fails.append({"w": name, "check": "q=1 crosscheck"})
        dihedral = len(set(x.word)) <= 2
        if not summand_chain(ws, e, d, with_kl=dihedral):
            fails.append({"w": name, "check": "summand chain"})
        if dihedral and x.length != 3 and d.h != H.kl(x):
            fails.append({"w": name, "check": "d equals C'"})
    for kind, els in elems.items():
        try:
            basis_report(ws, els)
        except SoergelError as exc:
            fails.append({"kind": kind, "error": str(exc)})
    return SuiteResult("bases", not fails, fails)


def suite_oracle(ws: Workspace, up_to: int = 4) -> SuiteResult:
    W, H, ring = ws.system, ws.hecke, ws.ring
    fails = []
    for x in W.elements_up_to(up_to):
        c = H.kl(x)
        if not (H.is_bar_invariant(c) and H.satisfies_kl_condition(c, x)):
            fails.append({"w": W.format_word(x.word), "check": "kl"})
    for a, b in _pairs(W):
        m = W.m(a, b)
        p = ring.mul(ring.y[a], ring.mul(ring.y[b], ring.y[b]))
        if ring.demazure_word(alternating(a, b, m), p) != ring.demazure_word(alternating(b, a, m), p):
            fails.append({"pair": [a, b], "check": "demazure braid"})
    return SuiteResult("oracle", not fails, fails)


SUITES = {"fsr": suite_fsr, "f2": suite_f2, "idem": suite_idem, "bases": suite_bases,
          "oracle": suite_oracle}


def run_verify(ws: Workspace, suite: str = "all", up_to: int = 4) -> list[SuiteResult]:
    names = list(SUITES) if suite == "all" else [suite]
    out = []
    for n in names:
        if n not in SUITES:
            raise ConfigError(f"unknown suite {n!r}")
        fn = SUITES[n]
        try:
            out.append(fn(ws, up_to) if n in ("idem", "bases", "oracle") else fn(ws))
        except SoergelError as exc:
            out.append(SuiteResult(n, False, [{"error": f"{type(exc).__name__}: {exc}"}]))
    return out


# entry point


def load_config(args) -> Config:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    else:
        data = {"dihedral": 4}
    if args.truncation is not None:
        data["truncation"] = args.truncation
    if args.format is not None:
        data["format"] = args.format
    if args.seed is not None:
        data["seed"] = args.seed
    if args.jobs is not None:
        data["jobs"] = args.jobs
    if getattr(args, "cache_dir", None):
        data["cache_dir"] = args.cache_dir
    return Config.from_dict(data)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="soergel-bases", description="Soergel bimodule bases of Hecke algebras")
    p.add_argument("--config", help="JSON config (bond matrix, field, truncation, ...)")
    p.add_argument("--truncation", type=int)
    p.add_argument("--format", choices=["json", "csv", "dot", "pretty"])
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--cache-dir")
    sub = p.add_subparsers(dest="cmd", required=True)
    g = sub.add_parser("group")
    g.add_argument("action", choices=["validate"])
    sub.add_parser("rex").add_argument("word")
    sub.add_parser("cores").add_argument("word")
    m = sub.add_parser("morphism")
    m.add_argument("kind", choices=["fsr", "f2"])
    m.add_argument("s")
    m.add_argument("r")
    m.add_argument("n", type=int, nargs="?")
    b = sub.add_parser("basis")
    b.add_argument("--kind", choices=["e", "d", "kl", "bs"], default="e")
    b.add_argument("--up-to", type=int, default=3)
    sub.add_parser("compare").add_argument("word")
    v = sub.add_parser("verify")
    v.add_argument("--suite", choices=["all", *SUITES], default="all")
    v.add_argument("--up-to", type=int, default=3)
    return p


def _emit(data, fmt: str, out):
    if fmt == "csv" and isinstance(data, dict) and "rows" in data:
        out.write(table_csv(data))
    elif fmt == "dot" and isinstance(data, dict) and "rex" in data:
        out.write(rex_dot(data) + "\n")
    elif fmt == "pretty":
        out.write(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        out.write(json.dumps(data, sort_keys=True, ensure_ascii=False) + "\n")


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        cache = Cache(cfg.cache_dir)
        if args.cmd == "group":
            data = cmd_group_validate(cfg)
        elif args.cmd == "rex":
            data = cmd_rex(cfg, args.word)
        elif args.cmd == "cores":
            data = cmd_cores(cfg, args.word)
        else:
            ws = Workspace(cfg.system(), cfg.truncation, cfg.seed)
            if args.cmd == "morphism":
                data = cache.cached(cfg, "morphism", [args.kind, args.s, args.r, args.n],
                                    lambda: cmd_morphism(cfg, ws, args.kind, args.s, args.r, args.n))
            elif args.cmd == "basis":
                data = cache.cached(cfg, "basis", [args.kind, args.up_to],
                                    lambda: cmd_basis(cfg, ws, args.kind, args.up_to))
            elif args.cmd == "compare":
                data = cache.cached(cfg, "compare", [args.word], lambda: cmd_compare(cfg, ws, args.word))
            else:
                results = run_verify(ws, args.suite, args.up_to)
                data = {"results": [r.to_json() for r in results],
                        "passed": all(r.passed for r in results)}
                _emit(data, cfg.format if cfg.format != "csv" else "json", out)
                return 0 if data["passed"] else 1
        _emit(data, cfg.format, out)
        return 0
    except SoergelError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
