"""The twelve acceptance criteria as plain functions.

Each returns ``(passed, detail)``. ``tests/test_acceptance.py`` runs them
under pytest; ``python tests/acceptance_checks.py`` runs them standalone and
prints one line per criterion.
"""

from __future__ import annotations

import numpy as np

from nullknot import construct as C
from nullknot import diagnostics as D
from nullknot import fieldlines as FL
from nullknot import flow
from nullknot import spectral as S
from nullknot.bateman import knotted_family, knotted_family_pair, magnitude_parallel_relative
from nullknot.core import GridSpec, eval_many, plane_wave, sample, time_derivative_many
from nullknot.errors import NoConvergenceError

SEED = 20240531
FAMILIES = [(1, 1), (2, 3)]
TIMES = [0.0, 0.7, 1.3]


def rng(offset=0):
    return np.random.Generator(np.random.PCG64(SEED + offset))


def probe(n, R=3.0, offset=0):
    return rng(offset).uniform(-R, R, size=(n, 3))


def healthy_points(field, n, t=0.0, frac=1e-3, R=3.0, offset=0, pool=4000):
    """First ``n`` points of a seeded pool with W / max_pool(W) >= frac."""
    P = probe(pool, R, offset)
    F = field.value(t, *P.T)
    W = D.energy_density(F)
    keep = W >= frac * W.max()
    return P[keep][:n], W.max()


def c1_null_persistence():
    P = probe(200, offset=1)
    worst_null = worst_shear = 0.0
    for mn in FAMILIES:
        f = knotted_family(mn)
        for t in TIMES:
            F, J = eval_many(f, t, *P.T)
            worst_null = max(worst_null, float(D.null_residuals(F).relative(F).max()))
            worst_shear = max(worst_shear, float(D.shear_relative(F, J).max()))
    ok = worst_null <= 1e-9 and worst_shear <= 1e-8
    return ok, f"max |F.F|/|F|^2 = {worst_null:.2e} (<= 1e-9), max shear = {worst_shear:.2e} (<= 1e-8)"


def c2_maxwell():
    P = probe(100, offset=2)
    worst = 0.0
    for mn in FAMILIES:
        f = knotted_family(mn)
        for t in TIMES:
            F, J = eval_many(f, t, *P.T)
            dF = time_derivative_many(f.value, t, *P.T, h=1e-4)
            res = np.linalg.norm(dF + 1j * D.curl(J), axis=-1) / np.linalg.norm(F, axis=-1)
            worst = max(worst, float(res.max()))
    return worst <= 1e-6, f"max |dF/dt + i curl F| / |F| = {worst:.2e} (<= 1e-6)"


def c3_transport():
    f = knotted_family((1, 1))
    P, wmax = healthy_points(f, 50, offset=3)
    rep = flow.transport_residuals(f, 0.0, *P.T, w_ref=wmax)
    worst = {k: float(rep.rel[k].max()) for k in rep.NAMES}
    ok = len(P) == 50 and max(worst.values()) <= 1e-6
    return ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (<= 1e-6)"


def c4_geodesic():
    f = knotted_family((1, 1))
    P, wmax = healthy_points(f, 50, offset=4)
    worst = {tau: float(flow.geodesic_invariance_many(f, P, tau, w_ref=wmax).max()) for tau in (0.25, 0.5, 1.0)}
    ok = len(P) == 50 and max(worst.values()) <= 1e-8
    return ok, ", ".join(f"tau={k}: {v:.1e}" for k, v in worst.items()) + " (<= 1e-8)"


def c5_spectral():
    f = knotted_family((1, 1))
    spec = GridSpec(6.0, 64, 0.0)
    g0 = S.project_divergence_free(sample(f, spec))
    g1 = S.propagate(g0, 0.5)
    ref = sample(f, spec.with_time(0.5)).data
    sl = S.interior_slice(spec, 0.5)
    err = float(np.linalg.norm(g1.data[sl] - ref[sl]) / np.linalg.norm(ref[sl]))
    e0, e1 = S.spectral_energy(g0), S.spectral_energy(g1)
    energy = abs(e1 - e0) / e0
    g2 = S.propagate(S.propagate(g0, 0.2), 0.3)
    group = float(np.linalg.norm(g2.data - g1.data) / np.linalg.norm(g1.data))
    ok = err <= 1e-2 and energy <= 1e-12 and group <= 1e-12
    return ok, f"interior L2 error {err:.2e} (<= 1e-2), energy drift {energy:.1e}, group {group:.1e} (<= 1e-12)"


def hopf_grid(spec):
    """Hopf-map triple with default profiles, centre offset by half a cell in x and y
    so that no node sits on the z-axis where V is undefined."""
    off = spec.dx / 2
    return C.rational_map_field(C.hopf_map((off, off, 0.0)), C.ProfileFunctions())


def c6_converse():
    spec = GridSpec(6.0, 64, 0.0)
    fld = hopf_grid(spec)
    raw = sample(fld, spec)
    null_raw = S.grid_null_residual(raw)
    P = probe(50, R=2.0, offset=6) + np.array([spec.dx / 2, spec.dx / 2, 0.0])
    r = C.initial_condition_residuals(C.hopf_map((spec.dx / 2, spec.dx / 2, 0.0)), C.ProfileFunctions(), P)
    g0 = S.project_divergence_free(raw)
    null0 = S.grid_null_residual(g0)
    g1 = S.propagate(g0, 0.25)
    null1 = S.grid_null_residual(g1)
    ratio = null1 / null0
    ok = null_raw <= 1e-12 and r[:, 1].min() > 1e-3 and r[:, 2].max() > 1e-3 and ratio >= 100
    return ok, (
        f"sampled null {null_raw:.1e}; min |E.curlE - B.curlB| rel {r[:, 1].min():.2e}, "
        f"max |B.curlE + E.curlB| rel {r[:, 2].max():.2e}; "
        f"propagated grid null {null0:.3e} -> {null1:.3e}, ratio {ratio:.1f} (>= 100); "
        f"ratio against the unprojected samples {null1 / max(null_raw, 1e-300):.1e}"
    )


def _verdict_fields():
    return [
        ("family(1,1)", knotted_family((1, 1)), 0.0),
        ("family(2,3)", knotted_family((2, 3)), 0.7),
        ("plane_wave", plane_wave(), 0.3),
        ("helical", C.rational_map_field(C.helical_map(), C.helical_profiles()), 0.0),
        ("hopf", C.rational_map_field(C.hopf_map(), C.ProfileFunctions()), 0.0),
    ]


def c7_equivalence():
    fields = _verdict_fields()
    per = 100
    agree = total = 0
    counts = {}
    for k, (name, f, t) in enumerate(fields):
        P = probe(per, R=2.0, offset=70 + k)
        F, J = eval_many(f, t, *P.T)
        st = flow.flow_state_many(f, t, *P.T)
        sh = D.shear_residuals(F, J, st.V, st.JV)
        v = sh.verdicts(D.VERDICT_TOL)
        same = np.all(v == v[:, :1], axis=1)
        agree += int(same.sum())
        total += len(P)
        counts[name] = int(v[:, 0].sum())
    ok = agree == total
    return ok, f"verdict agreement {agree}/{total}; shear-present counts {counts}"


def c8_first_integrals():
    pair = knotted_family_pair((1, 1))
    f = knotted_family((1, 1))
    P = probe(100, offset=8)
    mp = float(magnitude_parallel_relative(pair, (0.0, *P.T)).max())
    lb = FL.trace(f, "B", (0.5, 0.0, 0.0), 0.0, FL.TracerConfig(selector="B", max_length=20.0))
    le = FL.trace(f, "E", (0.4, 0.3, 0.2), 0.0, FL.TracerConfig(selector="E", max_length=20.0))
    db, sb = FL.first_integral_drift(lb, pair, "Re"), FL.first_integral_scale(lb, pair, "Re")
    de, se = FL.first_integral_drift(le, pair, "Im"), FL.first_integral_scale(le, pair, "Im")
    ok = mp <= 1e-9 and db <= 1e-6 * sb and de <= 1e-6 * se
    return ok, f"magnitude-parallel {mp:.1e} (<= 1e-9); B-line Re drift {db:.1e} vs bound {1e-6 * sb:.1e}; E-line Im drift {de:.1e} vs bound {1e-6 * se:.1e}"


def c9_helicity():
    f = knotted_family((1, 1))
    spec = GridSpec(8.0, 64)
    r0 = S.helicities(sample(f, spec.with_time(0.0)), clean=True)
    r1 = S.helicities(sample(f, spec.with_time(1.0)), clean=True)
    drift = {}
    for k in ("H_m", "H_e", "H_Omega"):
        a, b = getattr(r0, k), getattr(r1, k)
        drift[k] = abs(b - a) / max(abs(a), abs(b))
    full = abs(r1.H_Omega_full - r0.H_Omega_full) / abs(r0.H_Omega_full)
    ok = max(drift.values()) <= 1e-2
    return ok, (
        ", ".join(f"{k} drift {v:.1e}" for k, v in drift.items())
        + f" (<= 1e-2); masked fraction {r0.masked_fraction:.2f} -> {r1.masked_fraction:.2f}; unmasked H_Omega drift {full:.1e}"
    )


def c10_conjugate():
    pair = C.known_family_pair()
    P = probe(200, offset=10)
    r1, r2 = C.conjugacy_residuals(pair, P)
    F, _ = C.field_from_conjugate_pair(pair, C.known_family_prefactor(1, 1), P[:100])
    Fk = knotted_family((1, 1)).value(0.0, *P[:100].T)
    rel = float(np.max(np.linalg.norm(F - Fk, axis=-1) / np.linalg.norm(Fk, axis=-1)))
    ok = r1.max() <= 1e-10 and r2.max() <= 1e-10 and rel <= 1e-10
    return ok, f"conjugacy {r1.max():.1e}, {r2.max():.1e} (<= 1e-10); p grad(f+ig) vs family {rel:.1e} (<= 1e-10)"


def c11_transport_line():
    f = knotted_family((1, 1))
    d, l0, _, _ = FL.transported_line_mismatch(f, (0.5, 0.0, 0.0), 0.25, return_lines=True)
    ok = d <= 1e-3 * l0.length
    return ok, f"Hausdorff mismatch {d:.2e} vs bound {1e-3 * l0.length:.2e} (line length {l0.length:.4f})"


def c12_nurowski():
    reg = C.Region((0.5, 0.5, 0.5), (1.5, 1.5, 1.5), (9, 9, 9))
    zp = C.conjugate_pair_from_seed(C.zero_seed(), reg, (0.1, 0.1))
    const = bool(np.all(zp.grid["fg"] == 0) and np.all(zp.grid["grad"] == 0))
    seed = C.HolomorphicSeed.from_json({"terms": [[0.2, 0, 3, 0], [0.5, 0.2, 1, 1], [0.1, 0, 0, 3], [1, 0, 1, 0]]})
    qp = C.conjugate_pair_from_seed(seed, reg, (0.5, 0.3))
    lp = C.conjugate_pair_from_seed(C.linear_seed(1.0), reg, (0.5, 0.3))
    worst = max(qp.stats["max_newton_rel_residual"], lp.stats["max_newton_rel_residual"])
    reported = False
    try:
        C.conjugate_pair_from_seed(seed, reg, (0.5, 0.3), maxit=1)
    except NoConvergenceError as exc:
        reported = exc.residual is not None and exc.line is not None
    ok = const and worst <= 1e-12 and reported
    return ok, f"zero seed constant pair: {const}; max accepted Newton residual {worst:.3e} (<= 1e-12); failure reported with line and residual: {reported}"


CRITERIA = [
    (1, "null persistence", c1_null_persistence),
    (2, "Maxwell residual", c2_maxwell),
    (3, "transport suite", c3_transport),
    (4, "geodesic invariance", c4_geodesic),
    (5, "spectral propagator", c5_spectral),
    (6, "converse: non-shear-free data loses nullness", c6_converse),
    (7, "shear formulation equivalence", c7_equivalence),
    (8, "first integrals", c8_first_integrals),
    (9, "helicity conservation", c9_helicity),
    (10, "conjugate functions", c10_conjugate),
    (11, "transported field line", c11_transport_line),
    (12, "Nurowski pipeline", c12_nurowski),
]


def line(num, name, ok, detail):
    return f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'}  {name}: {detail}"


if __name__ == "__main__":
    for num, name, fn in CRITERIA:
        ok, detail = fn()
        print(line(num, name, ok, detail), flush=True)
