"""Acceptance criteria, one PASS/FAIL line each (also runnable as a script)."""
from __future__ import annotations

import time

import numpy as np

from thetapencil.casimir import casimir_quadratic, degree_ledger, kernel_element, casimir_T
from thetapencil.degenerate import (cross_validate, exact_compatibility_defects, exact_jacobi_defects,
                                    rational_structure_constants, trig_structure_constants)
from thetapencil.elliptic import build_pencil, check_pencil_identities, random_regular_u, verify_splitting_relations
from thetapencil.lie import LieStructure, is_casimir, jacobiator, recover_r_operator
from thetapencil.shift import (FAMILIES, build_q83, family_grid_check, family_vector, lenard_magri,
                               reduce_and_classify, same_span, shift, verify_quartic_casimirs)
from thetapencil.theta import branch_value, pencil_roots
from thetapencil.vector_theta import build_multi_pencil, build_vector_theta_basis, vector_section_dimension, verify_multi

RESULTS: list[str] = []
TAU = 1j


def record(criterion: int, checks: dict, seconds: float, limit: float | None = None) -> None:
    """Print and store one line; every entry of ``checks`` is ``(passed, detail)``."""
    if limit is not None:
        checks["runtime"] = (seconds < limit, f"{seconds:.1f}s < {limit:g}s")
    failed = [k for k, (ok, _) in checks.items() if not ok]
    detail = "; ".join(f"{k}: {d}" for k, (_, d) in checks.items())
    line = f"{'PASS' if not failed else 'FAIL'} criterion {criterion}: {detail}"
    if failed:
        line += f"  [failed: {', '.join(failed)}]"
    RESULTS.append(line)
    print(line)
    assert not failed, line


def test_criterion_1_elliptic_brackets():
    t = time.perf_counter()
    p = build_pencil(2, 2, 1, TAU, seed=7)
    r = check_pencil_identities(p)
    record(1, {k: (v < 1e-8, f"{v:.2e}") for k, v in r.items()}, time.perf_counter() - t, 30)


def test_criterion_2_splitting_relations():
    t = time.perf_counter()
    p = build_pencil(2, 2, 1, TAU, seed=7)
    checks = {}
    for i, u in enumerate(random_regular_u(p, 3)):
        r = verify_splitting_relations(p, u)
        checks[f"u{i} cross_block"] = (r["cross_block"] < 1e-7, f"{r['cross_block']:.1e}")
        checks[f"u{i} in_block"] = (r["in_block_coefficient_rel"] < 1e-7 and r["in_block"] < 1e-7,
                                 f"{max(r['in_block'], r['in_block_coefficient_rel']):.1e}")
        checks[f"u{i} ideals"] = (r["semisimple"] and r["ideal_dims"] == [3, 3], str(r["ideal_dims"]))
    record(2, checks, time.perf_counter() - t)


def test_criterion_3_casimir_tower():
    t = time.perf_counter()
    checks = {}
    for m in (2, 3):
        p = build_pencil(2, m, 1, TAU, seed=7)
        ker = kernel_element(p, 2)
        rel = ker.norm() / casimir_T(p, p.mu2, 2).norm()
        checks[f"m={m} T(mu2-u mu1)"] = (rel < 1e-10, f"{rel:.1e}")
        led = degree_ledger(p)
        degs = {e.label.split(" ")[0]: e.degree for e in led.entries}
        checks[f"m={m} T(mu2) deg"] = (degs["T(mu2)/u"] == 0, str(degs["T(mu2)/u"]))
        if m > 2:
            checks[f"m={m} T(g) deg"] = (degs["T(g0)"] == 1, str(degs["T(g0)"]))
        checks[f"m={m} h deg"] = (degs["h"] == 2, str(degs["h"]))
        worst = max(e.centrality for e in led.entries)
        checks[f"m={m} central"] = (worst < 1e-6, f"{worst:.1e}")
        expected = sorted([0] + [1] * (m - 2) + [2])
        checks[f"m={m} multiset"] = (led.multiset(2) == expected, str(led.multiset(2)))
        checks[f"m={m} GZ"] = (led.gz_sum == 3 * m == led.dimension, f"{led.gz_sum}/{3 * m}")
    record(3, checks, time.perf_counter() - t)


def test_criterion_4_quadratic_casimir():
    t = time.perf_counter()
    checks = {}
    for m in (2, 3):
        p = build_pencil(2, m, 1, TAU, seed=7)
        q = casimir_quadratic(p)
        f = q.at(0.0)
        r1, r2 = is_casimir(f, p.c1), is_casimir(f, p.c2)
        checks[f"m={m} u-degree"] = (q.degree_u() == 0, str(q.degree_u()))
        checks[f"m={m} c1"] = (r1 < 1e-8, f"{r1:.1e}")
        checks[f"m={m} c2"] = (r2 < 1e-8, f"{r2:.1e}")
    record(4, checks, time.perf_counter() - t)


def test_criterion_5_exact_degenerations():
    t = time.perf_counter()
    checks = {}
    cases = [("rational", n, m) for n in (2, 3) for m in (2, 3)] + [("trig", 2, 2)]
    for kind, n, m in cases:
        if kind == "rational":
            ep = rational_structure_constants(n, m, [1] + [0] * m, [0] * m + [1])
        else:
            ep = trig_structure_constants(n, m, [1, 0, 1], [0, 1, 0])
        tag = f"{kind} n={n} m={m}"
        j = (exact_jacobi_defects(ep.c1), exact_jacobi_defects(ep.c2))
        comp = exact_compatibility_defects(ep.c1, ep.c2)
        checks[f"{tag} exact identities"] = (j == (0, 0) and comp == 0, f"jacobi {j}, compat {comp}")
        rep = cross_validate(build_pencil(n, m, 1, TAU, seed=7), ep)
        gz_el = sum(2 * e + 1 for e in rep.elliptic_indices)
        gz_ex = sum(2 * e + 1 for e in rep.exact_indices)
        checks[f"{tag} dim"] = (rep.dims_match, str(ep.dim))
        checks[f"{tag} GZ"] = (gz_ex == gz_el == ep.dim, f"exact {gz_ex} vs elliptic {gz_el}")
    record(5, checks, time.perf_counter() - t)


def test_criterion_6_vector_family():
    t = time.perf_counter()
    p = build_multi_pencil(2, 1, 3, 2, TAU, seed=3)
    v = verify_multi(p, draws=10)
    nb = len(build_vector_theta_basis(3, 2, p.space.lattice))
    checks = {
        "basis dim": (nb == 3 == vector_section_dimension(3, 2, 1), str(nb)),
        "jacobi": (len(v["jacobi"]) == 3 and max(v["jacobi"]) < 1e-7, f"{max(v['jacobi']):.1e}"),
        "pairs": (len(v["compatibility"]) == 3 and max(v["compatibility"].values()) < 1e-7,
                  f"{max(v['compatibility'].values()):.1e}"),
        "10 combinations": (v["combination_jacobi"] < 1e-7, f"{v['combination_jacobi']:.1e}"),
    }
    record(6, checks, time.perf_counter() - t, 120)


def test_criterion_7_q83_pipeline():
    t = time.perf_counter()
    inst = build_q83(1.0, 1.0)
    P = inst.poisson
    cas = verify_quartic_casimirs(inst)
    grid = max(family_grid_check(inst, f) for f in FAMILIES)
    res = shift(inst, "a+", 1.0, 0.7)
    red = reduce_and_classify(res)
    centre = reduce_and_classify(shift(inst, "a+", 1.0, 1.0)).center
    expected = np.zeros((8, 2))
    expected[[0, 4], 0] = 1
    expected[[2, 6], 1] = 1
    lm = lenard_magri(red.quotient_c1, red.quotient_c2)
    checks = {
        "quadratic jacobi": (P.jacobi_residual() < 1e-10, f"{P.jacobi_residual():.1e}"),
        "C_i": (max(cas["defects"]) < 1e-9, f"{max(cas['defects']):.1e}"),
        "admissible grid": (grid < 1e-12, f"{grid:.1e}"),
        "u^2 term": (res.quadratic_residual < 1e-12, f"{res.quadratic_residual:.1e}"),
        "compatibility": (res.diagnostics["compatibility"] < 1e-10, f"{res.diagnostics['compatibility']:.1e}"),
        "center": (same_span(centre, expected) < 1e-8, "span{x0+x4, x2+x6}"),
        "quotient": (red.semisimple and red.ideal_dims == [3, 3], str(red.ideal_dims)),
        "Lenard-Magri": (max(lm.commute_c1, lm.commute_c2) < 1e-9,
                         f"{max(lm.commute_c1, lm.commute_c2):.1e} ({lm.independent} integrals)"),
    }
    record(7, checks, time.perf_counter() - t, 60)


def test_criterion_8_r_operator():
    t = time.perf_counter()
    p = build_pencil(2, 2, 1, TAU, seed=7)
    r = recover_r_operator(p.c1, p.c2)
    record(8, {"reconstruction": (r.residual < 1e-6, f"{r.residual:.1e}")}, time.perf_counter() - t)


def test_criterion_9_negative_controls():
    t = time.perf_counter()
    p = build_pencil(2, 2, 1, TAU, seed=7)
    rng = np.random.default_rng(0)
    noise = rng.normal(size=p.c1.c.shape)
    bad = LieStructure.from_tensor(p.c1.c + 1e-3 * p.c1.norm() * noise)
    inst = build_q83(1.0, 1.0)
    a = rng.normal(size=8)
    adm = inst.poisson.admissibility(a)
    near = family_vector("a+", 1.0, 0.7) + 1e-3 * rng.normal(size=8)
    _, u = branch_value(p.mu1, p.mu2, 0.3 + 0.2j)
    _, regular = pencil_roots(p.mu1, p.mu2, u)
    checks = {
        "perturbed jacobi": (jacobiator(bad) > 1e-6, f"{jacobiator(bad):.1e}"),
        "random vector": (adm > 1e-3, f"{adm:.1e}"),
        "near-admissible vector": (inst.poisson.admissibility(near) > 1e-8,
                                   f"{inst.poisson.admissibility(near):.1e}"),
        "branch value flagged": (not regular, f"u={u:.4f}"),
    }
    record(9, checks, time.perf_counter() - t)


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
