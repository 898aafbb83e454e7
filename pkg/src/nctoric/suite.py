"""The full verification battery behind the ``verify-all`` CLI subcommand.

Each criterion function returns a plain dict

    {"id": int, "name": str, "passed": bool, "details": {...}}

with every number it derived, so reports serialize deterministically (no
wall-clock data).  ``run_all`` executes the numbered criteria in order;
the final determinism criterion re-runs the whole battery with the same
seed and compares serialized bytes.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

import numpy as np

from . import groupoid as gp
from . import ncring as nc
from . import quantization as qz
from . import toric_flows as tf
from .polytope import standard, worst_facet_slack
from .rmatrix import ExactComplex, RMatrix, pair_exact

__all__ = ["run_all", "ALL_CRITERIA"]

_CATALOG = ("cp1", "cp2", "cp1xcp1", "hirzebruch1")


def _polytopes():
    return {
        "cp1": standard("cp1"),
        "cp2": standard("cp2"),
        "cp1xcp1": standard("cp1xcp1"),
        "hirzebruch1": standard("hirzebruch", 1),
    }


def _bbox_count(P, n: int) -> int:
    """Independent lattice count: scan a crude integer box, filter facets.

    The box [-c*n - c, c*n + c]^d with c = max(|entries|, |offsets|) + 1
    safely covers every catalog dilate; this deliberately shares nothing
    with polytope.lattice_points (no vertex solve).
    """
    c = 1 + max(
        max(abs(x) for v in P.normals for x in v),
        max(abs(a) for a in P.offsets),
    )
    lo, hi = -c * n - c, c * n + c
    count = 0
    ranges = [range(lo, hi + 1)] * P.dim
    idx = [lo] * P.dim

    def rec(j):
        nonlocal count
        if j == P.dim:
            if all(
                sum(v[k] * idx[k] for k in range(P.dim)) + n * a >= 0
                for v, a in zip(P.normals, P.offsets)
            ):
                count += 1
            return
        for val in ranges[j]:
            idx[j] = val
            rec(j + 1)

    rec(0)
    return count


def criterion_1_graded_dimensions(seed: int) -> dict:
    """hilbert_function and hom_dimension vs brute-force box counts, n = 0..12."""
    nmax = 12
    per_poly = {}
    ok = True
    for name, P in _polytopes().items():
        dims = nc.hilbert_function(P, nmax)
        homs = [qz.hom_dimension(P, n) for n in range(nmax + 1)]
        brute = [_bbox_count(P, n) for n in range(nmax + 1)]
        agree = dims == brute and homs == brute
        if name == "cp2":
            agree = agree and all(
                dims[n] == (n + 1) * (n + 2) // 2 for n in range(nmax + 1)
            )
        ok = ok and agree
        per_poly[name] = {"dims": dims, "brute": brute, "agree": agree}
    return {
        "id": 1,
        "name": "graded dimensions vs brute-force lattice counts",
        "passed": ok,
        "details": per_poly,
    }


def criterion_2_nc_product(seed: int) -> dict:
    """e_{1,(1,0)} * e_{1,(0,1)} = i e_{2,(1,1)} and commutation -1 for C12 = 1/2 on cp2."""
    P = standard("cp2")
    C = RMatrix.from_upper(2, {(0, 1): "1/2"})
    a = nc.RingElement.basis_element(P, 1, (1, 0))
    b = nc.RingElement.basis_element(P, 1, (0, 1))
    prod = nc.star(C, P, a, b)
    coeff = prod.coefficient(2, (1, 1))
    comm = nc.commutation_factor(C, (1, 0), (0, 1))
    passed = (
        set(prod.terms) == {nc.WeightedSection(2, (1, 1))}
        and coeff == 1j
        and comm == -1
    )
    return {
        "id": 2,
        "name": "noncommutative product and commutation factor (exact)",
        "passed": passed,
        "details": {
            "product_coeff": [coeff.real, coeff.imag],
            "commutation": [comm.real, comm.imag],
        },
    }


def criterion_3_associativity(seed: int) -> dict:
    """Exact exponent associativity plus float-mode residual on random triples."""
    trials = 10_000
    rng = np.random.default_rng([seed, 3])
    results = {}
    ok = True
    for pname in ("cp2", "cp1xcp1"):
        P = standard(pname)
        C = RMatrix.from_upper(
            2, {(0, 1): Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 8)))}
        )
        labels = [(n, m) for n in range(4) for m in nc.basis(P, n)]
        exact_fail = 0
        float_res = 0.0
        for _ in range(trials):
            picks = rng.integers(0, len(labels), size=3)
            (n1, k1), (n2, k2), (n3, k3) = (labels[i] for i in picks)
            m1, m2, m3 = k1.weight, k2.weight, k3.weight
            m12 = tuple(a + b for a, b in zip(m1, m2))
            m23 = tuple(a + b for a, b in zip(m2, m3))
            lhs = pair_exact(C, m1, m2) + pair_exact(C, m12, m3)
            rhs = pair_exact(C, m2, m3) + pair_exact(C, m1, m23)
            if lhs != rhs:
                exact_fail += 1
            p_lhs = nc.phase(C, m1, m2) * nc.phase(C, m12, m3)
            p_rhs = nc.phase(C, m2, m3) * nc.phase(C, m1, m23)
            float_res = max(float_res, abs(p_lhs - p_rhs) / max(1.0, abs(p_lhs)))
        ok = ok and exact_fail == 0 and float_res < 1e-12
        results[pname] = {
            "trials": trials,
            "exact_failures": exact_fail,
            "float_residual": float_res,
        }
    return {
        "id": 3,
        "name": "star associativity (exact exponents and float mode)",
        "passed": ok,
        "details": results,
    }


def criterion_4_classical_limit(seed: int) -> dict:
    """Structure constants at C = 0 equal the commutative semigroup table."""
    P = standard("cp2")
    C0 = RMatrix.zero(2)
    ok = True
    checked = 0
    for n1, n2 in ((1, 1), (1, 2), (2, 2), (0, 3)):
        table = nc.structure_constants(C0, P, n1, n2)
        for entry in table.entries:
            checked += 1
            expected_target = tuple(a + b for a, b in zip(entry.m1, entry.m2))
            if entry.factor != 1 or entry.target != expected_target:
                ok = False
    return {
        "id": 4,
        "name": "classical limit: C = 0 reproduces the semigroup table",
        "passed": ok,
        "details": {"entries_checked": checked},
    }


def _random_rmatrix(d: int, rng: np.random.Generator) -> RMatrix:
    re = rng.uniform(-1, 1, (d, d))
    im = rng.uniform(-1, 1, (d, d))
    M = (re - re.T) / 2 + 1j * (im - im.T) / 2  # entries bounded by 1
    return RMatrix(M.real.tolist(), M.imag.tolist())


def criterion_5_groupoid_axioms(seed: int) -> dict:
    """fuzz_verify at 1e4 trials for d = 2, 3 with random complex C."""
    tol = 1e-9
    details = {}
    ok = True
    for d in (2, 3):
        C = _random_rmatrix(d, np.random.default_rng([seed, 5, d]))
        report = gp.fuzz_verify(C, 10_000, seed=seed, tol=tol)
        details[f"d{d}"] = report.to_dict()
        ok = ok and report.passed
    return {
        "id": 5,
        "name": "groupoid axioms under fuzzing (1e4 trials, d = 2, 3)",
        "passed": ok,
        "details": details,
    }


def criterion_6_cocycle_consistency(seed: int) -> dict:
    """theta0 vs thetaC on 1e4 composable pairs; identical by bilinearity."""
    trials = 10_000
    worst = 0.0
    for d in (2, 3):
        C = _random_rmatrix(d, np.random.default_rng([seed, 6, d]))
        for trial in range(trials // 2):
            rng = np.random.default_rng([seed, 6, d, trial])
            g, h = gp.composable_chain(C, rng, 2)
            t0 = gp.cocycle(C, g, h, "theta0", tol=1e-6)
            tC = gp.cocycle(C, g, h, "thetaC", tol=1e-6)
            worst = max(worst, abs(t0 - tC))
    passed = worst < 1e-12
    return {
        "id": 6,
        "name": "cocycle forms theta0 and thetaC agree",
        "passed": passed,
        "details": {"pairs": trials, "max_difference": worst},
    }


def criterion_7_chart_agreement(seed: int) -> dict:
    """chart_multiply vs multiply under the torus-chart identification, 1e3 pairs."""
    trials = 1_000
    worst = 0.0
    C = _random_rmatrix(2, np.random.default_rng([seed, 7]))
    for trial in range(trials):
        rng = np.random.default_rng([seed, 7, trial])
        g, h = gp.composable_chain(C, rng, 2)
        abstract = gp.multiply(C, g, h, tol=1e-6)
        chart = gp.chart_multiply(
            C, gp.element_to_chart(g), gp.element_to_chart(h), tol=1e-6
        )
        back = gp.chart_to_element(chart)
        worst = max(
            worst,
            float(np.max(np.abs(back.alpha - abstract.alpha))),
            float(np.max(np.abs(back.w - abstract.w))),
        )
    passed = worst < 1e-9
    return {
        "id": 7,
        "name": "chart and abstract groupoid products agree",
        "passed": passed,
        "details": {"pairs": trials, "max_residual": worst},
    }


def criterion_8_real_c_collapse(seed: int) -> dict:
    """Real C: moment map constant along the flow and R_n vanishes."""
    chart = tf.standard_chart("cp2")
    C = RMatrix.from_upper(2, {(0, 1): "1/2"})
    z0 = np.array([1.0 + 0j, 1.0 + 0j])
    cfg = tf.FlowConfig(step=1e-3)
    traj = tf.flow(C, chart, z0, 5.0, cfg)
    mu0 = chart.moment(z0)
    drift = max(
        float(np.max(np.abs(chart.moment(p) - mu0))) for p in traj.points[:: 50]
    )
    r_n = abs(tf.r_integral(C, chart, z0, 1.0, cfg))
    passed = drift < 1e-6 and r_n < 1e-12
    return {
        "id": 8,
        "name": "real-C collapse: flow preserves mu and R_n = 0",
        "passed": passed,
        "details": {"mu_drift": drift, "r_abs": r_n},
    }


def criterion_9_r_additivity(seed: int) -> dict:
    """Additivity of R under flow shift: tight residual plus step-halving gain."""
    chart = tf.standard_chart("cp2")
    C = RMatrix.from_upper(2, {(0, 1): 1j})
    z0 = np.array([1.0 + 0j, 1.0 + 0j])
    res_fine = tf.verify_r_additivity(C, chart, z0, 1.0, 1.0, tf.FlowConfig(step=1e-3))
    res_h = tf.verify_r_additivity(C, chart, z0, 1.0, 1.0, tf.FlowConfig(step=0.2))
    res_h2 = tf.verify_r_additivity(C, chart, z0, 1.0, 1.0, tf.FlowConfig(step=0.1))
    ratio = res_h / res_h2 if res_h2 > 0 else math.inf
    passed = res_fine < 1e-4 and ratio >= 8.0
    return {
        "id": 9,
        "name": "R-additivity under flow shift with step-halving convergence",
        "passed": passed,
        "details": {
            "residual_step_1e-3": res_fine,
            "residual_step_0.2": res_h,
            "residual_step_0.1": res_h2,
            "halving_ratio": ratio,
        },
    }


def criterion_10_polytope_image(seed: int) -> dict:
    """Averaged moment of 100 random interior points lies in n*Delta (slack >= -1e-6)."""
    chart = tf.standard_chart("cp2")
    cs = [RMatrix.from_upper(2, {(0, 1): 1j}), RMatrix.from_upper(2, {(0, 1): 1 + 1j})]
    cfg = tf.FlowConfig(step=1e-2, quad_points=8)
    rng = np.random.default_rng([seed, 10])
    worst = math.inf
    samples = 100
    for k in range(samples):
        z0 = rng.uniform(0.15, 1.5, 2) * np.exp(2j * np.pi * rng.uniform(0, 1, 2))
        n = int(1 + k % 3)
        C = cs[k % 2]
        slack = tf.verify_polytope_image(C, chart, z0, n, cfg)
        worst = min(worst, slack)
    passed = worst >= -1e-6
    return {
        "id": 10,
        "name": "averaged moment image lies in the dilated polytope",
        "passed": passed,
        "details": {"samples": samples, "worst_slack": worst},
    }


def criterion_11_star_equation(seed: int) -> dict:
    """Space-filling brane equation for F_t, undeformed and deformed."""
    chart = tf.standard_chart("cp2")
    z0 = np.array([1.0 + 0j, 1.0 + 0j])
    res0 = tf.verify_star_equation(
        RMatrix.zero(2), chart, z0, 1.0, tf.FlowConfig(step=1e-2)
    )
    resi = tf.verify_star_equation(
        RMatrix.from_upper(2, {(0, 1): 1j}), chart, z0, 1.0, tf.FlowConfig(step=1e-3)
    )
    passed = res0 < 1e-8 and resi < 1e-3
    return {
        "id": 11,
        "name": "space-filling brane equation F I + I* F + F Q F = 0",
        "passed": passed,
        "details": {"residual_c0": res0, "residual_ci": resi},
    }


def criterion_12_courant_symmetry(seed: int) -> dict:
    """L_W(I) = Q omega at sampled chart points for C12 in {1, i}."""
    chart = tf.standard_chart("cp2")
    points = [
        np.array([1.0 + 0j, 1.0 + 0j]),
        np.array([0.7 + 0.2j, -0.4 + 1.1j]),
        np.array([0.3 - 0.9j, 0.8 + 0.5j]),
    ]
    worst = 0.0
    for cval in (1.0, 1j):
        C = RMatrix.from_upper(2, {(0, 1): cval})
        for z in points:
            worst = max(worst, tf.verify_courant_symmetry(C, chart, z))
    passed = worst < 1e-5
    return {
        "id": 12,
        "name": "Courant symmetry L_W(I) = Q omega",
        "passed": passed,
        "details": {"points": len(points), "max_residual": worst},
    }


_NUMBERED = (
    criterion_1_graded_dimensions,
    criterion_2_nc_product,
    criterion_3_associativity,
    criterion_4_classical_limit,
    criterion_5_groupoid_axioms,
    criterion_6_cocycle_consistency,
    criterion_7_chart_agreement,
    criterion_8_real_c_collapse,
    criterion_9_r_additivity,
    criterion_10_polytope_image,
    criterion_11_star_equation,
    criterion_12_courant_symmetry,
)

ALL_CRITERIA = tuple(fn.__name__ for fn in _NUMBERED) + ("criterion_13_determinism",)


def _plain(obj):
    """Coerce numpy scalars to plain Python types so reports serialize."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _run_numbered(seed: int) -> list[dict]:
    return [_plain(fn(seed)) for fn in _NUMBERED]


def serialize_report(results: list[dict]) -> str:
    return json.dumps(results, sort_keys=True, separators=(",", ":"))


def run_all(seed: int = 0, with_determinism: bool = True) -> list[dict]:
    """Run the full battery; the determinism criterion re-runs everything."""
    results = _run_numbered(seed)
    if with_determinism:
        rerun = _run_numbered(seed)
        identical = serialize_report(results) == serialize_report(rerun)
        results.append(
            {
                "id": 13,
                "name": "byte-identical reports for a fixed seed",
                "passed": identical,
                "details": {"seed": seed, "identical": identical},
            }
        )
    return results
