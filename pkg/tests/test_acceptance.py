"""Acceptance gate: the twelve numbered verification criteria.

Each test runs one criterion at its stated tolerance through the shared
verification module and prints a PASS/FAIL line with the measured
residual (run with -s to see them).
"""
import numpy as np
import pytest

from elliptica import verification as V


def report(rec):
    status = "PASS" if rec["passed"] else "FAIL"
    print(f"[{status}] {rec['name']:<26} residual {rec['residual']:.3e} "
          f"tolerance {rec['tolerance']:.0e}")
    return rec


def test_criterion_01_symmetric_normalization():
    rec = report(V.suite_symmetric_normalization())
    assert rec["passed"], rec


def test_criterion_02_eq3_identity():
    rec = report(V.suite_eq3_identity())
    assert rec["passed"], rec


def test_criterion_03_eq4_residual_and_c_routes():
    rec = report(V.suite_eq4_residual())
    assert rec["passed"], rec
    assert rec["c_routes_rel_diff"] <= rec["c_routes_tolerance"]


def test_criterion_04_induced_involutions():
    rec = report(V.suite_induced_involutions())
    assert rec["passed"], rec
    # every shape-appropriate reflection plus the half turn was certified
    seen = {(r["torus"], r["kind"]) for r in rec["rows"]}
    assert {("square", "H"), ("square", "I1"), ("square", "I4"),
            ("rectangular", "I3"), ("rhombic", "I5"), ("rhombic", "I6")} <= seen


def test_criterion_05_gamma_suite():
    rec = report(V.suite_gamma())
    assert rec["passed"], rec
    for details in rec["details"].values():
        assert details["angle_sum_err"] == 0.0
        assert details["c0_after_rescale"] < 1e-8


def test_criterion_06_catenoid_oracle():
    rec = report(V.suite_catenoid_oracle())
    assert rec["passed"], rec


def test_criterion_07_conformality(field):
    rec = report(V.suite_conformality(field))
    assert rec["passed"], rec


def test_criterion_08_period_problem(field):
    rec = report(V.suite_period_problem(field))
    assert rec["passed"], rec
    assert rec["one_d_rel_diff"] <= 1e-6
    for label in ("TC", "BC"):
        assert rec["end_closure"][label] <= 1e-6


def test_criterion_09_total_curvature(field):
    rec = report(V.suite_total_curvature(field, n=128, end_cutoff=50.0))
    assert rec["passed"], rec
    assert abs(rec["value"] + 8 * np.pi) <= 0.02 * 8 * np.pi


def test_criterion_10_symmetry_lines(field, mesh_r):
    rec = report(V.suite_symmetry_lines(field, mesh_r))
    assert rec["passed"], rec
    assert rec["beta_type"] == "asymptotic"
    assert rec["rho_type"] == "principal"


def test_criterion_11_embedding_probe(field, mesh_r):
    rec = report(V.suite_embedding(field, mesh_r))
    assert rec["passed"], rec
    assert rec["intersections"] == 0
    assert rec["negative_control_intersections"] > 0


def test_criterion_12_degree_counts(field):
    rec = report(V.suite_degree_counts(field))
    assert rec["passed"], rec
    for row in rec["rows"]:
        assert row["wp"] == 2 and row["wp_prime"] == 3 and row["g"] == 2
