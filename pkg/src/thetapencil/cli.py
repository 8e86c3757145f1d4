"""Command-line workbench: build, verify, export/import and the argument-shift battery."""
from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .degenerate import (Cyclo, DegenerateError, ExactPencil, exact_compatibility_defects, exact_degree_ledger,
                         exact_jacobi_defects, numeric_degree_ledger, rational_structure_constants,
                         trig_structure_constants)
from .heisenberg import HeisenbergError, check_nk
from .lie import LieStructure, compatibility_residual, is_casimir, jacobiator, recover_r_operator
from .serialize import Document, SchemaError, from_json, to_json
from .theta import ThetaError

PROFILE_ENV = "THETAPENCIL_TOLERANCE"

PROFILES = {
    "desk": dict(jacobi=1e-8, compatibility=1e-8, splitting=1e-7, casimir=1e-6, quadratic=1e-8, kernel=1e-10,
                 r_operator=1e-6, vector=1e-7, q83_jacobi=1e-10, q83_casimir=1e-9, admissible=1e-12,
                 shift_compatibility=1e-10, lenard_magri=1e-9),
}
PROFILES["strict"] = {k: v * 1e-2 for k, v in PROFILES["desk"].items()}
PROFILES["loose"] = {k: v * 1e2 for k, v in PROFILES["desk"].items()}


class ConfigError(ValueError):
    pass


def tolerance_profile(name: str | None = None) -> tuple[str, dict]:
    name = name or os.environ.get(PROFILE_ENV, "desk")
    if name not in PROFILES:
        raise ConfigError(f"unknown tolerance profile {name!r}; choose from {sorted(PROFILES)}")
    return name, dict(PROFILES[name])


# ---------------------------------------------------------------------------
# config and reports
# ---------------------------------------------------------------------------

def parse_tau(text: str) -> complex:
    try:
        tau = complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse tau {text!r}; use e.g. 0+1i") from exc
    return tau


@dataclass
class RunConfig:
    n: int = 2
    m: int = 2
    k: int = 1
    l: int = 1
    tau: complex = 1j
    seed: int = 7
    degenerate: str | None = None

    def validate(self) -> None:
        if self.n < 2 or self.m < 1 or self.l < 1:
            raise ConfigError("need n >= 2, m >= 1, l >= 1")
        try:
            check_nk(self.n, self.k)
        except HeisenbergError as exc:
            raise ConfigError(f"{exc} (pick k coprime to n)") from exc
        if self.l > 1 and math.gcd(self.m, self.l) != 1:
            raise ConfigError(f"m={self.m} and l={self.l} must be coprime")
        if self.degenerate is None and not self.tau.imag > 0:
            raise ConfigError(f"tau={self.tau} must have positive imaginary part")
        if self.degenerate not in (None, "rational", "trig"):
            raise ConfigError("--degenerate must be 'rational' or 'trig'")
        if self.degenerate == "trig" and self.k != 1:
            raise ConfigError("the trigonometric degeneration is built for k = 1")
        if self.degenerate and self.l != 1:
            raise ConfigError("degenerations are built for l = 1")

    def meta(self) -> dict:
        return dict(n=self.n, m=self.m, k=self.k, l=self.l, tau=[self.tau.real, self.tau.imag], seed=self.seed,
                    degenerate=self.degenerate)


@dataclass
class Check:
    name: str
    value: object
    tolerance: object
    passed: bool
    seconds: float


@dataclass
class Report:
    profile: str
    tolerances: dict
    checks: list = field(default_factory=list)

    def add(self, name: str, value, tolerance, passed: bool, start: float) -> None:
        self.checks.append(Check(name, value, tolerance, bool(passed), round(time.perf_counter() - start, 3)))

    def below(self, name: str, value: float, key: str, start: float) -> None:
        tol = self.tolerances[key]
        self.add(name, float(value), tol, float(value) < tol, start)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = [f"tolerance profile: {self.profile}",
                 "tolerances: " + ", ".join(f"{k}={v:g}" for k, v in sorted(self.tolerances.items()))]
        for c in self.checks:
            val = f"{c.value:.3e}" if isinstance(c.value, float) else str(c.value)
            lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<44} {val:<22} tol={c.tolerance}  "
                         f"{c.seconds:.2f}s")
        lines.append("ALL CHECKS PASSED" if self.ok else "SOME CHECKS FAILED")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return dict(profile=self.profile, tolerances=self.tolerances, ok=self.ok,
                    checks=[asdict(c) for c in self.checks])


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _default_rational_mus(m: int, seed: int):
    from .degenerate import resultant_m
    rng = random.Random(seed)
    for _ in range(100):
        mus = []
        for _ in range(2):
            c = [Fraction(rng.randint(-4, 4)) for _ in range(m + 1)]
            c[m - 1] = Fraction(0)
            mus.append(c)
        if resultant_m(mus[0], mus[1], m) != 0:
            return mus
    raise ConfigError("could not draw rational mu's without a common zero")


def _default_trig_mus(n: int, m: int, seed: int):
    rng = random.Random(seed)
    for _ in range(100):
        mus = []
        for _ in range(2):
            c = [Fraction(rng.randint(-4, 4)) for _ in range(m + 1)]
            c[m] = c[0] * (-1) ** m
            mus.append(c)
        try:
            trig_structure_constants(n, m, *mus)
        except DegenerateError:
            continue
        return mus
    raise ConfigError("could not draw trigonometric mu's without a common zero")


def build_exact(cfg: RunConfig) -> ExactPencil:
    if cfg.degenerate == "rational":
        return rational_structure_constants(cfg.n, cfg.m, *_default_rational_mus(cfg.m, cfg.seed))
    return trig_structure_constants(cfg.n, cfg.m, *_default_trig_mus(cfg.n, cfg.m, cfg.seed))


def build_document(cfg: RunConfig) -> tuple[Document, object]:
    cfg.validate()
    meta = cfg.meta()
    if cfg.degenerate:
        ep = build_exact(cfg)
        meta["mu1"] = [str(Fraction(v.coeffs[0]) if isinstance(v, Cyclo) else Fraction(v)) for v in ep.mu1]
        meta["mu2"] = [str(Fraction(v.coeffs[0]) if isinstance(v, Cyclo) else Fraction(v)) for v in ep.mu2]
        return Document(ep.dim, True, [("c1", ep.c1), ("c2", ep.c2)], meta), ep
    if cfg.l > 1:
        from .vector_theta import build_multi_pencil
        p = build_multi_pencil(cfg.n, cfg.k, cfg.m, cfg.l, cfg.tau, seed=cfg.seed)
        return Document(p.dim, False, [(f"c{i + 1}", b) for i, b in enumerate(p.brackets)], meta), p
    from .elliptic import build_pencil
    p = build_pencil(cfg.n, cfg.m, cfg.k, cfg.tau, seed=cfg.seed)
    return Document(p.dim, False, [("c1", p.c1), ("c2", p.c2)], meta), p


# ---------------------------------------------------------------------------
# verification batteries
# ---------------------------------------------------------------------------

def _perturb(c: LieStructure, eps: float, seed: int) -> LieStructure:
    rng = np.random.default_rng(seed)
    noise = rng.normal(size=c.c.shape) + 1j * rng.normal(size=c.c.shape)
    return LieStructure(c.c + eps * c.norm() * (noise - noise.transpose(1, 0, 2)) / 2, c.label)


def verify_tensors(report: Report, structures: list) -> None:
    """Jacobi for every tensor and compatibility for every pair."""
    lies = [s.to_lie() if hasattr(s, "to_lie") else s for s in structures]
    for i, c in enumerate(lies):
        t = time.perf_counter()
        report.below(f"jacobi c{i + 1}", jacobiator(c), "jacobi", t)
    for i in range(len(lies)):
        for j in range(i + 1, len(lies)):
            t = time.perf_counter()
            report.below(f"compatibility c{i + 1},c{j + 1}", compatibility_residual(lies[i], lies[j]),
                         "compatibility", t)


def verify_elliptic(report: Report, p, perturb: float = 0.0) -> None:
    from .casimir import casimir_quadratic, degree_ledger
    from .elliptic import random_regular_u, verify_splitting_relations
    c1 = _perturb(p.c1, perturb, 0) if perturb else p.c1
    verify_tensors(report, [c1, p.c2])
    n, m = p.basis.n, p.basis.m
    if m >= 2:
        for u in random_regular_u(p, 3):
            t = time.perf_counter()
            r = verify_splitting_relations(p, u)
            report.below(f"splitting relations (cross_block) u={u:.3f}", r["cross_block"], "splitting", t)
            report.below(f"splitting relations (in_block) u={u:.3f}", r["in_block"], "splitting", t)
            report.below(f"in_block coefficients u={u:.3f}", r["in_block_coefficient_rel"], "splitting", t)
            report.add(f"semisimple ideals u={u:.3f}", r["ideal_dims"], [n * n - 1] * m,
                       r["semisimple"] and r["ideal_dims"] == [n * n - 1] * m, t)
        t = time.perf_counter()
        q = casimir_quadratic(p)
        report.add("quadratic Casimir u-degree", q.degree_u(), 0, q.degree_u() == 0, t)
        poly = q.at(0.0)
        report.below("quadratic Casimir central for c1", is_casimir(poly, p.c1), "quadratic", t)
        report.below("quadratic Casimir central for c2", is_casimir(poly, p.c2), "quadratic", t)
        t = time.perf_counter()
        led = degree_ledger(p)
        report.below("Casimir kernel T(mu2 - u mu1)", max(led.kernel_residuals.values()), "kernel", t)
        report.below("Casimir centrality", max(e.centrality for e in led.entries), "casimir", t)
        report.add("Casimir u-degrees", [e.degree for e in led.entries], [e.expected for e in led.entries],
                   led.degrees_ok, t)
        report.add("Gelfand-Zakharevich sum", led.gz_sum, led.dimension, led.gz_sum == led.dimension, t)
    t = time.perf_counter()
    r = recover_r_operator(p.c1, p.c2)
    report.below("R-operator reconstruction", r.residual, "r_operator", t)


def verify_exact(report: Report, ep: ExactPencil, elliptic_gz: int | None = None) -> None:
    t = time.perf_counter()
    j1, j2 = exact_jacobi_defects(ep.c1), exact_jacobi_defects(ep.c2)
    report.add("exact jacobi defects (c1, c2)", [j1, j2], 0, j1 == 0 and j2 == 0, t)
    t = time.perf_counter()
    comp = exact_compatibility_defects(ep.c1, ep.c2)
    report.add("exact compatibility defects", comp, 0, comp == 0, t)
    t = time.perf_counter()
    expected = ep.m * (ep.n * ep.n - 1)
    report.add("dimension", ep.dim, expected, ep.dim == expected, t)
    t = time.perf_counter()
    if ep.c1.is_rational() and ep.c2.is_rational():
        led = exact_degree_ledger(ep.c1, ep.c2)
    else:
        led = numeric_degree_ledger(ep.c1.to_lie(), ep.c2.to_lie())
    report.add("minimal indices", led.indices, f"corank {led.corank}", led.complete, t)
    report.add("Gelfand-Zakharevich sum", led.gz_sum, led.dimension, led.ok, t)


def verify_vector(report: Report, p) -> None:
    from .vector_theta import reconstruction_residual, verify_multi
    t = time.perf_counter()
    v = verify_multi(p)
    for i, r in enumerate(v["jacobi"]):
        report.add(f"jacobi c{i + 1}", float(r), report.tolerances["vector"], r < report.tolerances["vector"], t)
    for (i, j), r in sorted(v["compatibility"].items()):
        report.add(f"compatibility c{i + 1},c{j + 1}", float(r), report.tolerances["vector"],
                   r < report.tolerances["vector"], t)
    report.below("random combinations jacobi", v["combination_jacobi"], "vector", t)
    t = time.perf_counter()
    report.below("pointwise reconstruction", reconstruction_residual(p), "vector", t)


def shift_battery(report: Report, k1: float, k2: float, family: str, t1: float, t2: float) -> dict:
    from .shift import (admissible_search, build_q83, center_stability, family_grid_check, k_not_casimir,
                        lenard_magri, reduce_and_classify, shift, verify_quartic_casimirs)
    t = time.perf_counter()
    inst = build_q83(k1, k2)
    report.below("quadratic Jacobi", inst.poisson.jacobi_residual(), "q83_jacobi", t)
    t = time.perf_counter()
    cas = verify_quartic_casimirs(inst)
    report.below("Casimirs C_i", max(cas["defects"]), "q83_casimir", t)
    report.add("Casimir Jacobian rank", cas["jacobian_rank"], 4, cas["jacobian_rank"] == 4, t)
    t = time.perf_counter()
    from .shift import FAMILIES
    for name in FAMILIES:
        report.below(f"admissible family {name} (5x5 grid)", family_grid_check(inst, name), "admissible", t)
    t = time.perf_counter()
    res = shift(inst, family, t1, t2)
    report.below("shift u^2 term", res.quadratic_residual, "admissible", t)
    report.below("shifted pair compatibility", res.diagnostics["compatibility"], "shift_compatibility", t)
    report.below("shifted pair jacobi", max(res.diagnostics["jacobi"]), "shift_compatibility", t)
    report.below("quadratic/linear compatibility", res.diagnostics["quadratic_linear"], "shift_compatibility", t)
    t = time.perf_counter()
    stab = center_stability(inst, family)
    report.add("center dimension", stab["dims"], [2], stab["dims"] == [2], t)
    report.add("center independent of (t1, t2)", float(stab["drift"]), 1e-8, stab["drift"] < 1e-8, t)
    t = time.perf_counter()
    red = reduce_and_classify(res)
    report.add("quotient semisimple, ideal dims", red.ideal_dims, [3, 3],
               red.semisimple and red.ideal_dims == [3, 3], t)
    t = time.perf_counter()
    kv = k_not_casimir(inst, red.center)
    report.add("center not Casimir for quadratic bracket", kv, "> 1e-6", kv > 1e-6, t)
    t = time.perf_counter()
    lm = lenard_magri(red.quotient_c1, red.quotient_c2)
    report.below("Lenard-Magri commute under c1", lm.commute_c1, "lenard_magri", t)
    report.below("Lenard-Magri commute under c2", lm.commute_c2, "lenard_magri", t)
    report.add("Lenard-Magri independent integrals", lm.independent, ">= 4", lm.independent >= 4, t)
    t = time.perf_counter()
    ad = admissible_search(inst.poisson)
    report.add("admissible components (dims)", ad.dims, [2, 2, 2, 2],
               sorted(ad.dims) == [2, 2, 2, 2] and ad.direct_sum and all(ad.linear), t)
    return dict(center=[[float(x) for x in col] for col in np.real(red.center).T],
                ideal_dims=red.ideal_dims, p=list(inst.p),
                integrals=[{"terms": [[list(map(int, e)), float(np.real(v))] for e, v in sorted(f.terms.items())]}
                           for f in lm.integrals],
                families_found=ad.matches)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_config(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--tau", default="0+1i")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--degenerate", choices=["rational", "trig"])


def _config(args) -> RunConfig:
    return RunConfig(args.n, args.m, args.k, args.l, parse_tau(args.tau), args.seed, args.degenerate)


def _write(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finish(report: Report, args) -> int:
    print(report.render())
    if getattr(args, "report", None):
        with open(args.report, "w") as fh:
            json.dump(report.to_dict(), fh, indent=1, sort_keys=True, default=str)
    return 0 if report.ok else 1


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thetapencil", description=__doc__)
    ap.add_argument("--profile", help=f"tolerance profile (default from ${PROFILE_ENV} or 'desk')")
    sub = ap.add_subparsers(dest="command", required=True)
    b = sub.add_parser("build", help="build structure constants and write JSON")
    _add_config(b)
    b.add_argument("--out")
    v = sub.add_parser("verify", help="run the residual battery")
    _add_config(v)
    v.add_argument("--input", help="verify tensors from a JSON file instead of building")
    v.add_argument("--perturb", type=float, default=0.0, help="relative noise added to c1 (negative control)")
    v.add_argument("--shift", choices=["q83"], help="run the argument-shift battery instead")
    v.add_argument("--report", help="also write the report as JSON")
    e = sub.add_parser("export", help="re-emit a JSON file in canonical form")
    e.add_argument("--input", required=True)
    e.add_argument("--out")
    i = sub.add_parser("import", help="load a JSON file and check its tensors")
    i.add_argument("--input", required=True)
    i.add_argument("--report")
    s = sub.add_parser("shift", help="argument shift of a quadratic bracket")
    s.add_argument("example", choices=["q83"])
    s.add_argument("--k1", type=float, default=1.0)
    s.add_argument("--k2", type=float, default=1.0)
    s.add_argument("--family", choices=["a+", "a-", "b+", "b-"], default="a+")
    s.add_argument("--t1", type=float, default=1.0)
    s.add_argument("--t2", type=float, default=0.7)
    s.add_argument("--out", help="write the JSON report here")
    return ap


def _read_document(path: str) -> Document:
    with open(path) as fh:
        return from_json(fh.read())


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        profile, tols = tolerance_profile(args.profile)
        report = Report(profile, tols)
        if args.command == "build":
            doc, _ = build_document(_config(args))
            _write(to_json(doc), args.out)
            return 0
        if args.command == "export":
            _write(to_json(_read_document(args.input)), args.out)
            return 0
        if args.command == "import":
            doc = _read_document(args.input)
            print(f"dim={doc.dim} exact={doc.exact} tensors={[lab for lab, _ in doc.tensors]}")
            verify_tensors(report, doc.structures())
            return _finish(report, args)
        if args.command == "shift":
            out = shift_battery(report, args.k1, args.k2, args.family, args.t1, args.t2)
            print(report.render())
            body = dict(report.to_dict(), **out, family=args.family, t=[args.t1, args.t2], k=[args.k1, args.k2])
            if args.out:
                with open(args.out, "w") as fh:
                    json.dump(body, fh, indent=1, sort_keys=True, default=str)
            return 0 if report.ok else 1
        # verify
        if args.shift:
            shift_battery(report, 1.0, 1.0, "a+", 1.0, 0.7)
        elif args.input:
            doc = _read_document(args.input)
            structures = doc.structures()
            if doc.exact:
                j = [exact_jacobi_defects(s) for s in structures]
                t = time.perf_counter()
                report.add("exact jacobi defects", j, 0, not any(j), t)
            if args.perturb:
                lie = structures[0].to_lie() if hasattr(structures[0], "to_lie") else structures[0]
                structures = [_perturb(lie, args.perturb, 0)] + structures[1:]
            verify_tensors(report, structures)
        else:
            cfg = _config(args)
            doc, obj = build_document(cfg)
            if cfg.degenerate:
                verify_exact(report, obj)
            elif cfg.l > 1:
                verify_vector(report, obj)
            else:
                verify_elliptic(report, obj, args.perturb)
        return _finish(report, args)
    except (ConfigError, SchemaError, HeisenbergError, DegenerateError, ThetaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
