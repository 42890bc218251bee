"""Acceptance criteria, one test per criterion, each logging a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from qpopov.certificate import certify, synthesize_P, verify_certificate
from qpopov.errors import CertificateInfeasibleError
from qpopov.model import doubled_residual, make_structure, random_admissible_delta
from qpopov.oracle import consistency_sweep, covariance_trajectory, noise_matrix, sample_deltas
from qpopov.plant import build_state_space, closed_loop_A, commutator_zL, eval_G, reduce_annihilation_only
from qpopov.popov import (FrequencyResponse, default_grid, popov_plot, small_gain_margin, spr_margin,
                          spr_matrix)
from qpopov.systems import OPA_DELTA, opa_plant, random_plant

pytestmark = pytest.mark.acceptance


def _random_shape(rng):
    return int(rng.integers(1, 4)), int(rng.integers(1, 3)), int(rng.integers(1, 3))


def test_criterion_1_popov_success(acceptance_log):
    start = time.perf_counter()
    plant = opa_plant(2.1, 2.0)
    grid = default_grid(plant)
    an = spr_margin(plant, 0.2, 2.0, grid)
    plot = popov_plot(reduce_annihilation_only(plant), grid, 0.2, 2.0)
    elapsed = time.perf_counter() - start
    ok = an.certified and an.margin > 1e-3 and plot.inside and elapsed < 1.0
    acceptance_log(1, ok, f"verdict={an.verdict} margin={an.margin:.4g} inside={plot.inside} "
                          f"runtime={elapsed:.3f}s")
    assert ok


def test_criterion_2_small_gain_gap(acceptance_log):
    theta0 = {k: spr_margin(opa_plant(k), 0.0, 2.0).certified for k in (2.1, 3.0, 3.9, 4.0 - 1e-6)}
    certified_41 = spr_margin(opa_plant(4.1), 0.0, 2.0).certified
    # SISO threshold: sup |G1(iw)| = 2/kappa, against gamma/4
    red = reduce_annihilation_only(opa_plant(2.1))
    w = default_grid(opa_plant(2.1)).omegas
    sup_g1 = float(np.max(np.abs(red.G1_grid(w))))
    threshold_ok = abs(sup_g1 - 1 / 1.05) <= 1e-9
    sg = {k: small_gain_margin(opa_plant(k), 2.0).certified for k in (2.1, 3.0, 3.9, 4.0 - 1e-6, 4.1)}
    sg_ok = not any(sg[k] for k in (2.1, 3.0, 3.9, 4.0 - 1e-6)) and sg[4.1]
    wrongly = [k for k, v in theta0.items() if v]
    ok = not wrongly and certified_41 and threshold_ok
    acceptance_log(2, ok, f"theta=0 certified at kappa={wrongly} (expected none), kappa=4.1 "
                          f"certified={certified_41}, sup|G1|=2/kappa within 1e-9: {threshold_ok}, "
                          f"small-gain boundary kappa>4: {sg_ok}")
    assert ok


def test_criterion_3_closed_loop_golden(acceptance_log):
    good = True
    for kappa in (1.9, 2.1, 5.0):
        A = closed_loop_A(opa_plant(kappa), OPA_DELTA)
        ev = np.sort(np.linalg.eigvals(A).real)
        good &= bool(np.all(np.abs(ev - [-kappa / 2 - 1, -kappa / 2 + 1]) <= 1e-12))
        good &= bool(np.all(np.abs(np.linalg.eigvals(A).imag) <= 1e-12))
        good &= (ev.max() < 0) == (kappa > 2)
    acceptance_log(3, good, "eig(A_cl) = -kappa/2 -+ 1 for kappa in {1.9, 2.1, 5}; Hurwitz iff kappa > 2")
    assert good


def test_criterion_4_certificate_validity(acceptance_log):
    plant = opa_plant(2.1, 2.0)
    ss = build_state_space(plant)
    v = verify_certificate(synthesize_P(ss, 0.2, 2.0), ss, 0.2, 2.0)
    cert = certify(plant, 0.2)
    ok = (v.pos_def_min_eig > 0 and v.structure_residual <= 1e-10 and v.lmi_margin < -1e-8
          and v.mtilde_max_eig < 0 and cert.c1 >= 1 and cert.c2 > 0 and cert.c3 >= 0
          and all(math.isfinite(x) for x in (cert.c1, cert.c2, cert.c3)))
    acceptance_log(4, ok, f"min eig P={v.pos_def_min_eig:.3g} residual={v.structure_residual:.1e} "
                          f"lmi={v.lmi_margin:.3g} mtilde={v.mtilde_max_eig:.3g} c1={cert.c1:.3g} "
                          f"c2={cert.c2:.3g} c3={cert.c3:.3g}")
    assert ok


def test_criterion_5_chain(acceptance_log):
    rng = np.random.default_rng(5)
    start = time.perf_counter()
    ok_count = ladder_failures = bad = violations = 0
    for i in range(200):
        plant = random_plant(rng, *_random_shape(rng))
        resp = FrequencyResponse.compute(plant, default_grid(plant))
        theta = 0.0 if i % 3 == 0 else float(rng.uniform(0.01, 1.0))
        m0 = float(np.min(resp.min_eigs(theta)))
        gamma = 1.2 * max(-m0, 0.0) + 0.05
        plant = plant.replace(gamma=gamma)
        an = resp.analysis(theta, gamma)
        assert an.certified and an.margin > 0
        try:
            cert = certify(plant, theta)
        except CertificateInfeasibleError:
            ladder_failures += 1
        else:
            ss = build_state_space(plant)
            if verify_certificate(cert.P, ss, theta, gamma).valid:
                ok_count += 1
            else:
                bad += 1
        rep = consistency_sweep(plant, theta, gamma, n_samples=50, seed=i, analysis=an)
        kinds = {s.strategy for s in rep.samples}
        assert {"zero", "extreme"} <= kinds
        violations += int(rep.violation)
    elapsed = time.perf_counter() - start
    ok = ok_count >= 198 and bad == 0 and violations == 0 and elapsed < 60
    acceptance_log(5, ok, f"{ok_count}/200 certificates, {ladder_failures} ladder exhausted, "
                          f"{bad} invalid P, {violations} Hurwitz violations, runtime={elapsed:.1f}s")
    assert ok


def _ccr_commutator(E, Nt, n):
    T = np.zeros((2 * n, 2 * n))
    T[:n, n:] = np.eye(n)
    T[n:, :n] = -np.eye(n)
    out = np.zeros((E.shape[0], Nt.shape[0]), dtype=complex)
    for i in range(E.shape[0]):
        for j in range(Nt.shape[0]):
            out[i, j] = sum(E[i, k] * Nt[j, l] * T[k, l] for k in range(2 * n) for l in range(2 * n))
    return out


def test_criterion_6_matrix_identities(acceptance_log):
    rng = np.random.default_rng(6)
    worst = dict(cb=0.0, zl=0.0, sym=0.0)
    inf_exact = True
    for _ in range(100):
        plant = random_plant(rng, *_random_shape(rng), gamma=float(rng.uniform(0.1, 5)))
        ss = build_state_space(plant)
        CB = ss.C @ ss.B
        worst["cb"] = max(worst["cb"], float(np.max(np.abs(CB + CB.conj().T))))
        zl = commutator_zL(plant)[:, :plant.c]
        worst["zl"] = max(worst["zl"], float(np.max(np.abs(zl - _ccr_commutator(plant.E, plant.Ntilde, plant.n)))))
        Sg = make_structure(plant.n).Sigma
        worst["sym"] = max(worst["sym"], float(np.max(np.abs(Sg @ ss.A.conj() @ Sg - ss.A))))
        G = eval_G(ss, float(rng.uniform(-5, 5)))
        S = spr_matrix(G, math.inf, float(rng.uniform(0, 3)), plant.gamma)
        inf_exact &= bool(np.array_equal(S, plant.gamma * np.eye(2 * plant.m)))
    ok = worst["cb"] <= 1e-12 and worst["zl"] <= 1e-12 and worst["sym"] <= 1e-10 and inf_exact
    acceptance_log(6, ok, f"max|CB+B^dag C^dag|={worst['cb']:.1e} max|zL-def|={worst['zl']:.1e} "
                          f"max|Sigma A# Sigma - A|={worst['sym']:.1e} SPR(inf)=gamma I exactly: {inf_exact}")
    assert ok


def test_criterion_7_moment_consistency(acceptance_log):
    rng = np.random.default_rng(7)
    worst = 0.0
    for i in range(20):
        plant = random_plant(rng, *_random_shape(rng))
        resp = FrequencyResponse.compute(plant, default_grid(plant, 128))
        gamma = 1.2 * max(-float(np.min(resp.min_eigs(0.0))), 0.0) + 0.05
        assert resp.analysis(0.0, gamma).certified
        delta = random_admissible_delta(plant.m, gamma, i, ("extreme", "interior", "boundary")[i % 3])
        A = closed_loop_A(plant, delta)
        D = noise_matrix(plant)
        k = 2 * plant.n
        X = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        P = X @ X.conj().T + 0.1 * np.eye(k)
        # central differences are O((||A|| dt)^2) accurate, so the step follows the fastest mode
        dt = min(1e-3, 1e-2 / np.linalg.norm(A, 2))
        traj = covariance_trajectory(plant, delta, t_final=1.6, dt=dt)
        for t in (0.1, 0.7, 1.5):
            j = int(round(t / dt))
            S = traj.sigmas[j]
            h = traj.times[j + 1] - traj.times[j - 1]
            fd = (np.trace(P @ traj.sigmas[j + 1]) - np.trace(P @ traj.sigmas[j - 1])).real / h
            q = np.trace((P @ A + A.conj().T @ P) @ S).real
            d = np.trace(P @ D).real
            worst = max(worst, abs(fd - q - d) / (abs(q) + abs(d)))
    ok = worst <= 1e-4
    acceptance_log(7, ok, f"max relative mismatch {worst:.2e} over 20 plants x 3 times")
    assert ok


def test_criterion_8_envelope(acceptance_log):
    plant = opa_plant(2.1, 2.0)
    cert = certify(plant, 0.2)
    t = None
    worst_slack = math.inf
    for _, delta in sample_deltas(1, 2.0, 50, seed=8):
        traj = covariance_trajectory(plant, delta, t_final=20.0, store_sigmas=False)
        assert not traj.diverged
        t = traj.times
        bound = cert.c1 * 2.0 * np.exp(-cert.c2 * t) + 10 * cert.c3 * 2 * plant.n
        worst_slack = min(worst_slack, float(np.min(bound - traj.traces)))
    ok = worst_slack >= 0 and t[-1] == 20.0
    acceptance_log(8, ok, f"50 trajectories on [0, 20], smallest bound - tr(Sigma) = {worst_slack:.4g}")
    assert ok


def test_criterion_9_siso_matrix_equivalence(acceptance_log):
    rng = np.random.default_rng(9)
    mismatches = mismatches0 = certified = 0
    for _ in range(50):
        plant = random_plant(rng, int(rng.integers(1, 4)), 1, int(rng.integers(1, 3)), annihilation_only=True)
        red = reduce_annihilation_only(plant)
        grid = default_grid(plant, 256)
        resp = FrequencyResponse.compute(plant, grid)
        theta = float(rng.uniform(0.01, 2.0))
        m0 = float(np.min(resp.min_eigs(theta)))
        gamma = max(-m0, 1e-3) * float(rng.uniform(0.5, 1.5))
        matrix = resp.analysis(theta, gamma).certified
        siso = resp.hurwitz and popov_plot(red, grid, theta, gamma).inside
        mismatches += int(matrix != siso)
        certified += int(matrix)
        g0 = max(-float(np.min(resp.min_eigs(0.0))), 1e-3) * float(rng.uniform(0.5, 1.5))
        mismatches0 += int(resp.analysis(0.0, g0).certified
                           != (resp.hurwitz and popov_plot(red, grid, 0.0, g0).inside))
    ok = mismatches == 0 and mismatches0 == 0
    acceptance_log(9, ok, f"{mismatches} theta>0 mismatches ({certified}/50 certified), "
                          f"{mismatches0} theta=0 mismatches")
    assert ok
