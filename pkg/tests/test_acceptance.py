"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import time

import numpy as np

from netred.cluster import (
    dissimilarity_position,
    hierarchical_clustering,
    linkage,
    random_clustering,
)
from netred.gramian import (
    coupling_gramian,
    h2_output_norm,
    network_gramian,
    spd_stiffness_gramian,
)
from netred.matrixeq import solve_standard_lyapunov
from netred.network import BenchmarkConfig, ClusteringPartition, benchmark_system
from netred.network import graph_from_laplacian
from netred.reduce import approximation_error_h2, error_system, project
from netred.sys2 import (
    convergence_matrix,
    first_order,
    gramian_quadrature,
    h2_quadrature,
    simulate,
    validate,
)

from conftest import (
    EX1_D_HAT,
    EX1_F_HAT,
    EX1_L_HAT,
    EX1_M_HAT,
    EX1_PARTITION,
    random_network,
)


def report(num, ok, detail):
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def seeded_benchmark(n, seed, m=3):
    cfg = BenchmarkConfig(m=m, k=2 if n < 5 else 4)
    return benchmark_system(n, cfg, seed)


def identity_partition(n):
    return ClusteringPartition(tuple((i,) for i in range(1, n + 1)))


def test_criterion_01_worked_example_exactness(ex1):
    part = ClusteringPartition(EX1_PARTITION)
    red = project(ex1, part)  # warm-up, also the correctness object
    deviation = max(
        np.abs(red.m_hat - EX1_M_HAT).max(),
        np.abs(red.d_hat - EX1_D_HAT).max(),
        np.abs(red.l_hat - EX1_L_HAT).max(),
        np.abs(red.f_hat - EX1_F_HAT).max(),
    )
    best = min(
        (lambda t0: (project(ex1, part), time.perf_counter() - t0))(time.perf_counter())[1]
        for _ in range(5)
    )
    ok = deviation <= 1e-12 and best < 1e-3
    report(1, ok, f"max deviation {deviation:.2e}, best runtime {1e3 * best:.3f} ms")


def test_criterion_02_gramian_residuals():
    sizes = np.linspace(3, 50, 20).round().astype(int)
    worst_res, worst_ann = 0.0, 0.0
    for idx, n in enumerate(sizes):
        sys = seeded_benchmark(int(n), seed=1000 + idx)
        g = network_gramian(sys)
        real = first_order(sys)
        conv = convergence_matrix(sys)
        w = real.b - conv.j @ real.b
        rhs = w @ w.T
        residual = np.linalg.norm(real.a @ g.p + g.p @ real.a.T + rhs)
        worst_res = max(worst_res, residual / np.linalg.norm(rhs))
        ann = np.linalg.norm(g.nu @ g.p) / (
            np.linalg.norm(g.p, 2) * np.linalg.norm(g.nu)
        )
        worst_ann = max(worst_ann, ann)
    ok = worst_res <= 1e-8 and worst_ann <= 1e-8
    report(
        2,
        ok,
        f"20 systems n in [3, 50]: worst residual {worst_res:.2e}, "
        f"worst annihilation {worst_ann:.2e} (tol 1e-8)",
    )


def test_criterion_03_quadrature_oracle_agreement():
    worst_gram, worst_h2, worst_coupling = 0.0, 0.0, 0.0
    for n, seed in ((2, 0), (3, 1), (4, 2), (5, 3)):
        sys = random_network(n, seed=seed)
        g = network_gramian(sys)
        real = first_order(sys)
        conv = convergence_matrix(sys)
        oracle = gramian_quadrature(real.a, real.b, conv.j, steps=40000)
        worst_gram = max(
            worst_gram, np.linalg.norm(g.p - oracle) / np.linalg.norm(oracle)
        )

    sys = random_network(4, seed=7)
    g = network_gramian(sys)
    rng = np.random.default_rng(0)
    hs = rng.normal(size=(2, 4))
    hs -= hs.mean(axis=1, keepdims=True)
    hv = rng.normal(size=(2, 4))
    value = h2_output_norm(g, hs, hv)
    oracle = h2_quadrature(sys, hs, hv, steps=40000)
    worst_h2 = abs(value - oracle) / oracle

    sys = random_network(3, seed=9)
    red = project(sys, ClusteringPartition(((1, 2), (3,))))
    gx = coupling_gramian(sys, red)
    es = error_system(sys, red)
    big = gramian_quadrature(es.a_e, es.b_e, es.j_e, steps=40000)
    cross = big[:6, 6:]
    worst_coupling = np.linalg.norm(gx.px - cross) / np.linalg.norm(cross)

    ok = worst_gram <= 1e-5 and worst_h2 <= 1e-5 and worst_coupling <= 1e-5
    report(
        3,
        ok,
        f"gramian {worst_gram:.2e}, h2 {worst_h2:.2e}, "
        f"coupling {worst_coupling:.2e} (tol 1e-5)",
    )


def test_criterion_04_spd_stiffness_degeneration():
    rng = np.random.default_rng(42)
    worst = 0.0
    for n in (3, 4, 6):
        m_diag = rng.uniform(0.5, 2.0, n)
        q1 = rng.normal(size=(n, n))
        d = q1 @ q1.T + n * np.eye(n)
        q2 = rng.normal(size=(n, n))
        k = q2 @ q2.T + n * np.eye(n)
        f = rng.uniform(-1.0, 1.0, (n, 2))
        p, _ = spd_stiffness_gramian(m_diag, d, k, f)

        minv = 1.0 / m_diag
        a = np.zeros((2 * n, 2 * n))
        a[:n, n:] = np.eye(n)
        a[n:, :n] = -(minv[:, None] * k)
        a[n:, n:] = -(minv[:, None] * d)
        b = np.zeros((2 * n, 2))
        b[n:] = minv[:, None] * f
        classic = solve_standard_lyapunov(a, b @ b.T)
        worst = max(worst, np.linalg.norm(p - classic) / np.linalg.norm(classic))
    ok = worst <= 1e-8
    report(4, ok, f"worst deviation from the classical Gramian {worst:.2e} (tol 1e-8)")


def test_criterion_05_error_matches_quadrature():
    rng = np.random.default_rng(3)
    worst = 0.0
    for trial in range(3):
        n = int(rng.integers(4, 11))
        sys = random_network(n, seed=200 + trial)
        r = int(rng.integers(2, n))
        part = random_clustering(n, r, seed=trial)
        red = project(sys, part)
        es = error_system(sys, red)
        half = es.a_e.shape[0] // 2
        for variant, ce in (("position", es.c_e), ("velocity", es.c_e_velocity)):
            value = approximation_error_h2(sys, red, variant)
            oracle = h2_quadrature(
                (es.a_e, es.b_e, es.j_e), ce[:, :half], ce[:, half:], steps=50000
            )
            worst = max(worst, abs(value - oracle) / max(oracle, 1e-12))

    worst_identity = 0.0
    for n, seed in ((4, 0), (8, 1), (10, 2)):
        sys = random_network(n, seed=seed)
        red = project(sys, identity_partition(n))
        for variant in ("position", "velocity"):
            worst_identity = max(
                worst_identity, approximation_error_h2(sys, red, variant)
            )
    ok = worst <= 1e-4 and worst_identity <= 1e-8
    report(
        5,
        ok,
        f"worst oracle mismatch {worst:.2e} (tol 1e-4), worst identity error "
        f"{worst_identity:.2e} (tol 1e-8)",
    )


def test_criterion_06_canonical_gramian_uniqueness():
    sys = seeded_benchmark(12, seed=77)
    conv = convergence_matrix(sys)
    g = network_gramian(sys)
    n = sys.n
    pi = np.zeros((2 * n, 2 * n))
    pi[:n, :n] = 1.0
    rng = np.random.default_rng(5)
    worst = 0.0
    for c in rng.uniform(-100.0, 100.0, 5):
        shifted = g.p + c * pi  # another particular solution
        beta = -(conv.nu @ shifted @ conv.nu) / conv.sigma_d**2
        recanonical = shifted + beta * pi
        worst = max(
            worst, np.linalg.norm(recanonical - g.p) / np.linalg.norm(g.p)
        )
    ok = worst <= 1e-9
    report(6, ok, f"worst re-canonicalization drift {worst:.2e} (tol 1e-9)")


def test_criterion_07_synchronization_limits(ex1):
    red = project(ex1, ClusteringPartition(EX1_PARTITION))
    conv = convergence_matrix(ex1)
    a = first_order(ex1).a
    eigs = np.linalg.eigvals(a)
    stable = eigs[eigs.real < -1e-9 * np.linalg.norm(a, 2)]
    horizon = 40.0 / abs(stable.real.max())
    grid = np.linspace(0.0, horizon, 25)

    rng = np.random.default_rng(1)
    z0, dz0 = rng.normal(size=3), rng.normal(size=3)
    p = red.p.p
    x0, v0 = p @ z0, p @ dz0
    limit = np.ones(4) * (
        np.ones(4) @ (ex1.d @ x0 + np.diag(ex1.m_diag) @ v0) / conv.sigma_d
    )
    full = simulate(ex1, x0, v0, t_grid=grid)
    reduced = simulate(red.network, z0, dz0, t_grid=grid)
    free_dev = max(
        np.abs(full[-1, :4] - limit).max(),
        np.abs(p @ reduced[-1, :3] - limit).max(),
        np.abs(full[-1, 4:]).max(),
        np.abs(p @ reduced[-1, 3:]).max(),
    )

    impulse_limit = np.outer(np.ones(4), np.ones(4) @ ex1.f) / conv.sigma_d
    full_imp = simulate(ex1, u="impulse", t_grid=grid)
    red_imp = simulate(red.network, u="impulse", t_grid=grid)
    impulse_dev = max(
        np.abs(full_imp[-1, :4, :] - impulse_limit).max(),
        np.abs(p @ red_imp[-1, :3, :] - impulse_limit).max(),
    )
    ok = free_dev <= 1e-6 and impulse_dev <= 1e-6
    report(
        7,
        ok,
        f"free-response deviation {free_dev:.2e}, impulse deviation "
        f"{impulse_dev:.2e} at T = 40/decay (tol 1e-6)",
    )


def test_criterion_08_metric_property():
    worst_violation = -np.inf
    for idx, n in enumerate((5, 7, 9, 10, 12, 14, 16, 18, 19, 20)):
        sys = seeded_benchmark(n, seed=300 + idx)
        g = network_gramian(sys)
        dis = dissimilarity_position(sys, g)
        d = dis.d
        assert np.all(d == d.T) and np.all(np.diag(d) == 0.0)
        sums = d[:, :, None] + d[None, :, :]  # sums[i, k, j] = d_ik + d_kj
        violation = (d - sums.min(axis=1)).max() / d.max()
        worst_violation = max(worst_violation, violation)
    ok = worst_violation <= 1e-9
    report(
        8,
        ok,
        f"10 systems n <= 20: worst triangle violation {worst_violation:.2e} "
        "of the max entry (tol 1e-9)",
    )


def test_criterion_09_strategy_comparison_qualitative():
    sys = benchmark_system(70, BenchmarkConfig(m=5), seed=2024)
    gram = network_gramian(sys)
    dis = dissimilarity_position(sys, gram)

    failures = []
    hier_at_5 = None
    for r in (5, 10, 20, 30):
        part, _ = hierarchical_clustering(dis, r)
        hier_error = approximation_error_h2(sys, project(sys, part), gramian=gram)
        if r == 5:
            hier_at_5 = hier_error
        seed_rng = np.random.default_rng(900 + r)
        random_errors = []
        for _ in range(50):
            rp = random_clustering(70, r, seed=int(seed_rng.integers(0, 2**63 - 1)))
            random_errors.append(
                approximation_error_h2(sys, project(sys, rp), gramian=gram)
            )
        mean_random = float(np.mean(random_errors))
        if not hier_error <= mean_random:
            failures.append((r, hier_error, mean_random))

    full_order = approximation_error_h2(
        sys, project(sys, identity_partition(70)), gramian=gram
    )
    ok = (
        not failures
        and full_order <= 1e-8
        and np.isfinite(hier_at_5)
        and hier_at_5 > 0.0
    )
    report(
        9,
        ok,
        f"hierarchical <= mean(random) at r in {{5,10,20,30}} "
        f"({'no failures' if not failures else failures}), r=70 error "
        f"{full_order:.2e}, r=5 error {hier_at_5:.4f}",
    )


def test_criterion_10_runtime_budget():
    sys = benchmark_system(70, BenchmarkConfig(m=5), seed=2024)
    timings = {}
    start = time.perf_counter()
    gram = network_gramian(sys)
    timings["gramian"] = time.perf_counter() - start
    start = time.perf_counter()
    dis = dissimilarity_position(sys, gram)
    timings["dissimilarity"] = time.perf_counter() - start
    start = time.perf_counter()
    part, _ = hierarchical_clustering(dis, 5)
    timings["clustering"] = time.perf_counter() - start
    start = time.perf_counter()
    red = project(sys, part)
    timings["projection"] = time.perf_counter() - start
    start = time.perf_counter()
    approximation_error_h2(sys, red, gramian=gram)
    timings["error"] = time.perf_counter() - start

    total = sum(timings.values())
    others = {k: v for k, v in timings.items() if k != "gramian"}
    ok = total <= 5.0 and all(timings["gramian"] >= v for v in others.values())
    pretty = ", ".join(f"{k} {1e3 * v:.1f} ms" for k, v in timings.items())
    report(
        10,
        ok,
        f"pipeline total {total:.3f} s (budget 5 s); Gramian dominates: {pretty}",
    )


def test_criterion_11_structure_preservation():
    rng = np.random.default_rng(8)
    checked = 0
    for trial in range(50):
        n = int(rng.integers(3, 12))
        sys = random_network(n, seed=400 + trial)
        r = int(rng.integers(1, n + 1))
        part = random_clustering(n, r, seed=trial)
        red = project(sys, part)  # validates internally
        graph_from_laplacian(red.l_hat)  # must succeed
        a_hat = first_order(red.network).a
        eigs = np.linalg.eigvals(a_hat)
        scale = max(np.linalg.norm(a_hat, 2), 1e-300)
        near_zero = np.abs(eigs) <= 1e-9 * scale
        assert near_zero.sum() == 1
        assert np.all(eigs.real[~near_zero] < 0)
        checked += 1
    report(11, checked == 50, f"{checked}/50 reduced models structurally valid")


def test_criterion_12_lance_williams_equivalence():
    worst = 0.0
    for seed in range(10):
        sys = seeded_benchmark(10, seed=500 + seed)
        g = network_gramian(sys)
        dis = dissimilarity_position(sys, g)
        _, dend = hierarchical_clustering(dis, 1)
        members = {i: (i,) for i in range(1, 11)}
        for merge in dend.merges:
            ca = members.pop(merge.a)
            cb = members.pop(merge.b)
            direct = linkage(dis, ca, cb)
            worst = max(worst, abs(merge.height - direct) / max(1.0, direct))
            members[merge.new_id] = ca + cb
    ok = worst <= 1e-12
    report(
        12,
        ok,
        f"10 runs: worst update-vs-direct linkage gap {worst:.2e} (tol 1e-12)",
    )
