"""Randomised verification sweeps, one per acceptance criterion.

Every criterion returns a ``CriterionResult`` holding the worst residual seen
and the tolerance it is held to.  ``scale`` shrinks the trial counts for quick
runs; ``tol_override`` replaces every tolerance (used to check that failures
are reported).
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .angles import (isoclinic_cos2_trace, isoclinicity, principal_angles, subspace_angle, cluster)
from .decompose import full_decompose, kaehler_multiangle
from .hqspace import HQSpace, adapted_basis, canonical_sign
from .lab import (act_sp1, make_complex4, make_complex_even, make_quaternionic, make_rhps, make_sigma,
                  make_two_plane, oracle_principal_angles, oracle_subspace_angle, random_frame,
                  random_quaternion, random_so3, random_sp_n, random_structure, spawn, complex_slots)
from .orbit import (associated_plane, associated_plane_checks, build_chains, characteristic_deviation,
                    i_perp_kaehler_angle, ic4_invariants, orbit_invariant, same_orbit, sp_n_witness)
from .subspace import orthonormalize

# literal canonical matrices of a 4-dim complex subspace that is not totally complex
C_IJ_COMPLEX = np.array([[1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=float)
C_IK_COMPLEX = np.array([[1, 0, 0, 0], [0, 0, 0, -1], [0, 1, 0, 0], [0, 0, -1, 0]], dtype=float)

MIN_SIZE = 4


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    residual: float
    tolerance: float
    trials: int
    seconds: float
    detail: str = ""
    checks: dict = None   # check name -> (worst residual, tolerance)

    def line(self):
        verdict = "PASS" if self.passed else "FAIL"
        return (f"[{verdict}] {self.number:2d} {self.name:<32s} residual={self.residual:.3e} "
                f"tol={self.tolerance:.1e} trials={self.trials} ({self.seconds:.1f}s){' ' + self.detail if self.detail else ''}")

    def to_json(self):
        return {"criterion": self.number, "name": self.name, "passed": self.passed,
                "residual": self.residual, "tolerance": self.tolerance, "trials": self.trials,
                "seconds": self.seconds, "detail": self.detail,
                "checks": {k: {"residual": r, "tolerance": t} for k, (r, t) in (self.checks or {}).items()}}


class _Tracker:
    """Worst residual per named check, each against its own tolerance."""

    def __init__(self, tol_override):
        self.override = tol_override
        self.worst = {}
        self.failures = []
        self.counts = {}

    def check(self, name, residual, tol):
        tol = self.override if self.override is not None else tol
        residual = float(residual)
        if tol > 0:
            ratio = residual / tol if np.isfinite(residual) else np.inf
        else:
            ratio = 0.0 if residual <= 0 else np.inf
        if name not in self.worst or ratio > self.worst[name][0]:
            self.worst[name] = (ratio, residual, tol)
        if not residual <= tol:
            self.failures.append(name)

    def flag(self, name, ok):
        """A boolean check; its residual is the number of failures so far, held to 0."""
        self.counts[name] = self.counts.get(name, 0) + (not ok)
        self.check(name, self.counts[name], 0.0)

    def summary(self):
        if not self.worst:
            return 0.0, 0.0, ""
        name, (_, res, tol) = max(self.worst.items(), key=lambda kv: kv[1][0])
        detail = f"worst={name}"
        if self.failures:
            detail += f" failed={sorted(set(self.failures))}"
        return res, tol, detail


def _trials(base, scale):
    return max(1, int(round(base * scale)))


def _wrap(number, name, fn, space, rng, scale, tol_override):
    t0 = time.perf_counter()
    tr = _Tracker(tol_override)
    trials = fn(space, rng, scale, tr)
    res, tol, detail = tr.summary()
    checks = {k: (r, t) for k, (_, r, t) in tr.worst.items()}
    return CriterionResult(number, name, not tr.failures, res, tol, trials, time.perf_counter() - t0, detail, checks)


# ------------------------------------------------------------------ criteria


def structure_algebra(space, rng, scale, tr):
    N = _trials(200, scale)
    Id = np.eye(space.dim)
    for _ in range(N):
        A = space.matrix(random_structure(rng))
        tr.check("A^2+Id", np.linalg.norm(A @ A + Id), 1e-12)
        tr.check("A^T A-Id", np.linalg.norm(A.T @ A - Id), 1e-12)
        rotated = space.with_basis(random_so3(rng))
        I, J, K = (rotated.matrix(e) for e in np.eye(3))
        tr.check("IJ-K", np.linalg.norm(I @ J - K), 1e-12)
    return N


def hermitian_product(space, rng, scale, tr):
    N = _trials(1000, scale)
    for _ in range(N):
        L, M = rng.normal(size=(2, space.dim))
        h, c = space.hermitian_product(L, M), space.coordinate_product(L, M)
        tr.check("coordinate formula", np.abs(h.as_array() - c.as_array()).max(), 1e-12)
    B = _trials(50, scale)
    for _ in range(B):
        C = random_so3(rng)
        rotated = space.with_basis(C)
        L, M = rng.normal(size=(2, space.dim))
        h, h2 = space.hermitian_product(L, M), rotated.hermitian_product(L, M)
        tr.check("Re preserved", abs(h.real - h2.real), 1e-12)
        tr.check("|Im| preserved", abs(np.linalg.norm(h.imag) - np.linalg.norm(h2.imag)), 1e-12)
        tr.check("Im rotates by C^T", np.abs(h2.imag - C.T @ h.imag).max(), 1e-12)
    return N + B


def principal_angle_engine(space, rng, scale, tr):
    N = _trials(500, scale)
    for _ in range(N):
        p, q = sorted(rng.integers(1, 9, size=2))
        U, W = random_frame(rng, space.dim, p), random_frame(rng, space.dim, q)
        pa, oracle = principal_angles(U, W), oracle_principal_angles(U, W)
        tr.check("SVD vs eigen oracle", np.abs(pa.thetas - oracle.thetas).max(), 1e-9)
        cos_prod = np.cos(subspace_angle(U, W))
        tr.check("product of cosines", abs(cos_prod - np.cos(oracle_subspace_angle(U, W))), 1e-9)
    return N


def isoclinic_formulas(space, rng, scale, tr):
    N, M = _trials(100, scale), _trials(500, scale)
    for _ in range(N):
        I, theta = random_structure(rng), rng.uniform(0, np.pi / 2)
        U = random_sp_n(space, rng) @ make_complex4(space, I, theta)
        _, (xi, chi, eta), c, _ = build_chains(space, U, U[:, 0])
        As = np.array([random_structure(rng) for _ in range(M)])
        G = np.stack([U.T @ space.apply(A, U) for A in As])
        svd = np.linalg.svd(G, compute_uv=False)
        trace = np.sqrt(np.clip([isoclinic_cos2_trace(space, A, U) for A in As], 0, None))
        expand = As ** 2 @ c ** 2 + 2 * (xi * As[:, 0] * As[:, 1] * c[0] * c[1]
                                         + chi * As[:, 0] * As[:, 2] * c[0] * c[2]
                                         + eta * As[:, 1] * As[:, 2] * c[1] * c[2])
        expand = np.sqrt(np.clip(expand, 0, None))
        alpha = As @ I
        closed = np.sqrt(alpha ** 2 + (1 - alpha ** 2) * np.cos(theta) ** 2)
        svd_mean = svd.mean(axis=1)
        tr.check("SVD isoclinic spread", (svd.max(axis=1) - svd.min(axis=1)).max(), 1e-8)
        for name, v in (("trace", trace), ("xi-chi-eta", expand), ("closed form", closed)):
            tr.check(f"{name} vs SVD", np.abs(v - svd_mean).max(), 1e-8)
        tr.check("trace vs closed form", np.abs(trace - closed).max(), 1e-8)
        tr.check("xi-chi-eta vs closed form", np.abs(expand - closed).max(), 1e-8)
        tr.check("trace vs xi-chi-eta", np.abs(trace - expand).max(), 1e-8)
    return N * M


def complex4_invariants(space, rng, scale, tr):
    N = _trials(100, scale)
    for _ in range(N):
        theta = rng.uniform(1e-3, np.pi / 2 - 1e-3)
        U = random_sp_n(space, rng) @ make_complex4(space, [1, 0, 0], theta)
        inv = ic4_invariants(space, U, X1=U @ random_frame(rng, 4, 1)[:, 0])
        got = np.array([inv.xi, inv.chi, inv.eta, inv.Gamma, inv.Delta])
        tr.check("(xi,chi,eta,Gamma,Delta)", np.abs(got - [0, 0, 0, 0, -1]).max(), 1e-8)
        tr.check("C_IJ literal", np.abs(inv.C_IJ - C_IJ_COMPLEX).max(), 1e-8)
        tr.check("C_IK literal", np.abs(inv.C_IK - C_IK_COMPLEX).max(), 1e-8)
        tr.check("chain Gram vs C", max(inv.residuals["C_IJ"], inv.residuals["C_IK"]), 1e-8)
    T = _trials(20, scale)
    for _ in range(T):
        U = random_sp_n(space, rng) @ make_complex4(space, [1, 0, 0], np.pi / 2)
        inv = ic4_invariants(space, U)
        tr.check("totally complex C=Id", max(np.abs(inv.C_IJ - np.eye(4)).max(),
                                            np.abs(inv.C_IK - np.eye(4)).max()), 1e-8)
    return N + T


def _theta(rng, lo=0.01):
    return rng.uniform(lo, np.pi / 2)


def _class_samples(space, rng):
    """One generated subspace per class, on the first coordinates of ``space``."""
    n = space.n
    multi = np.sort([_theta(rng) for _ in range(min(2, (n - 1) // 2))])
    items = [(random_structure(rng), [_theta(rng)], False), (random_structure(rng), [], True)]
    return {
        "TwoPlane": make_two_plane(space, rng.uniform(-0.6, 0.6, size=3)),
        "Complex4": make_complex4(space, random_structure(rng), _theta(rng)),
        "ComplexEven": make_complex_even(space, random_structure(rng), multi, tail=True),
        "SigmaComplex": make_sigma(space, items),
        "Quaternionic": make_quaternionic(space, 8),
        "TotallyRealRhps": make_rhps(space, 3),
    }


def sp_n_invariance(space, rng, scale, tr):
    N = _trials(200, scale)
    for name, U in _class_samples(space, rng).items():
        base = orbit_invariant(space, U)
        for _ in range(N):
            gU = random_sp_n(space, rng) @ U
            tr.check(f"{name} invariant", base.distance(orbit_invariant(space, gU)), 1e-6)
            tr.flag(f"{name} same_orbit", same_orbit(space, U, gU))
    return 6 * N


def orbit_separation(space, rng, scale, tr):
    N = _trials(500, scale)
    for t in range(N):
        if t % 2 == 0:
            I = random_structure(rng)
            theta = _theta(rng, 0.01)
            step = 1e-3 if t % 4 == 0 else rng.uniform(1e-3, 0.5)
            other = theta + step if theta + step <= np.pi / 2 else theta - step
            U, W = make_complex4(space, I, theta), make_complex4(space, I, other)
        else:
            I, I2 = random_structure(rng), random_structure(rng)
            while min(np.linalg.norm(I - I2), np.linalg.norm(I + I2)) < 1e-3:
                I2 = random_structure(rng)
            theta = _theta(rng, 0.01)
            U, W = make_complex4(space, I, theta), make_complex4(space, I2, theta)
        W = random_sp_n(space, rng) @ W
        tr.flag("false positive", not same_orbit(space, U, W))
    return N


def witness_soundness(space, rng, scale, tr):
    N = _trials(100, scale)
    classes = None
    for t in range(N):
        if t % 6 == 0:
            classes = list(_class_samples(space, rng).items())
        name, U = classes[t % 6]
        W = random_sp_n(space, rng) @ U
        w = sp_n_witness(space, U, W)
        if w is None:
            tr.flag(f"{name} witness found", False)
            continue
        h = w.g
        tr.check("max principal angle", principal_angles(h @ U, W).thetas.max(), 1e-7)
        tr.check("|h^T h - Id|", np.linalg.norm(h.T @ h - np.eye(space.dim)), 1e-9)
        tr.check("commutators", max(np.linalg.norm(h @ space.matrix(e) - space.matrix(e) @ h)
                                    for e in np.eye(3)), 1e-9)
    return N


def _random_sigma_items(rng, slots):
    """2-3 distinct structures with multiangles in [0.01, pi/2] fitting in ``slots`` coordinates."""
    while True:
        k = int(rng.integers(2, 4))
        items, used = [], 0
        for _ in range(k):
            tail = bool(rng.integers(0, 2))
            m = int(rng.integers(0 if tail else 1, 3))
            multi = list(np.sort([_theta(rng) for _ in range(m)]))
            items.append((random_structure(rng), multi, tail))
            used += complex_slots(multi, tail)
        signs = [canonical_sign(I) for I, _, _ in items]
        separated = all(np.linalg.norm(a - b) > 1e-2 for i, a in enumerate(signs) for b in signs[i + 1:])
        if used <= slots and separated:
            return items


def decomposition_round_trip(space, rng, scale, tr):
    N = _trials(100, scale)
    for _ in range(N):
        items = _random_sigma_items(rng, space.n)
        U = random_sp_n(space, rng) @ make_sigma(space, items)
        dec = full_decompose(space, U)
        tr.flag("no quaternionic or real part", dec.quaternionic.shape[1] == 0 and dec.real.shape[1] == 0)
        expected = sorted(((canonical_sign(np.asarray(I, dtype=float)), np.r_[multi, [np.pi / 2] * tail])
                           for I, multi, tail in items), key=lambda p: tuple(np.round(p[0], 9)))
        if len(dec.sigma) != len(expected):
            tr.flag("structure count", False)
            continue
        for (I, multi), (A, W) in zip(expected, dec.sigma):
            tr.check("structure", np.abs(canonical_sign(A) - I).max(), 1e-9)
            got = kaehler_multiangle(space, A, W)
            if got.shape != multi.shape:
                tr.flag("multiangle length", False)
                continue
            tr.check("multiangle", np.abs(got - multi).max(), 1e-6)
    return N


def multiplicity_law(space, rng, scale, tr):
    N = _trials(100, scale)
    for _ in range(N):
        while True:
            k, tail = int(rng.integers(0, 3)), bool(rng.integers(0, 2))
            if 0 < 2 * k + tail and 2 * k + tail <= 4 and complex_slots([0] * k, tail) <= space.n:
                break
        pool = [_theta(rng), _theta(rng), np.pi / 2]
        multi = np.sort(rng.choice(pool, size=k))
        I = random_structure(rng)
        U = random_sp_n(space, rng) @ make_complex_even(space, I, multi, tail)
        _, _, K = adapted_basis(I)
        thetas = principal_angles(U, space.apply(K, U)).thetas[::-1]
        sizes = sorted(len(g) for g in cluster(thetas, 1e-7))
        vals, counts = np.unique(multi, return_counts=True)
        expected = [4 * c for v, c in zip(vals, counts) if v < np.pi / 2]
        right = 4 * int(np.sum(multi == np.pi / 2)) + 2 * tail
        expected = sorted(expected + ([right] if right else []))
        tr.flag("cluster sizes 4k / 2k", sizes == expected)
    return N


def characteristic_deviation_checks(space, rng, scale, tr):
    N = _trials(50, scale)
    for _ in range(N):
        I, theta = random_structure(rng), rng.uniform(0, np.pi / 2)
        U = random_sp_n(space, rng) @ make_complex4(space, I, theta)
        d = characteristic_deviation(space, U)
        tr.check("closed form (2cos^2+1)/3", abs(d - (2 * np.cos(theta) ** 2 + 1) / 3), 1e-9)
        m = int(rng.integers(2, 7))
        V = random_frame(rng, space.dim, m)
        dv = characteristic_deviation(space, V)
        tr.check("orthonormal basis", abs(characteristic_deviation(space, V @ random_frame(rng, m, m)) - dv), 1e-9)
        tr.check("admissible basis", abs(characteristic_deviation(space.with_basis(random_so3(rng)), V) - dv), 1e-9)
        gV = act_sp1(space, random_sp_n(space, rng) @ V, random_quaternion(rng))
        tr.check("Sp(n).Sp(1)", abs(characteristic_deviation(space, gV) - dv), 1e-8)
    return N


def associated_planes(space, rng, scale, tr):
    N = _trials(100, scale)
    for _ in range(N):
        I, theta = random_structure(rng), rng.uniform(0.01, np.pi / 2 - 0.01)
        U = random_sp_n(space, rng) @ make_complex4(space, I, theta)
        _, J, K0 = adapted_basis(I)
        phi = rng.uniform(0, 2 * np.pi)
        K = np.cos(phi) * K0 + np.sin(phi) * J
        X = U @ random_frame(rng, 4, 1)[:, 0]
        P = associated_plane(space, I, U, X, K)
        for name, r in associated_plane_checks(space, I, U, P, K).items():
            tr.check(name, r, 1e-8)
    e1, Ip, Kp = np.array([1.0, 0, 0]), np.array([1.0, 2, 2]) / 3, np.array([0.0, -1, 1]) / np.sqrt(2)
    for theta in np.linspace(0.1, 1.4, 5):
        U = make_complex4(space, e1, theta)
        P = associated_plane(space, e1, U, U[:, 0], Kp)
        Ubar = orthonormalize(np.hstack([P, space.apply(Ip, P)]))
        got = np.cos(i_perp_kaehler_angle(space, Ip, Ubar))
        tr.check("worked example (1/3,2/3,2/3)", abs(got - np.cos(theta)), 1e-10)
    return N + 5


CRITERIA = [
    (1, "structure algebra", structure_algebra),
    (2, "hermitian product", hermitian_product),
    (3, "principal-angle engine", principal_angle_engine),
    (4, "isoclinic formulas", isoclinic_formulas),
    (5, "4-dim complex invariants", complex4_invariants),
    (6, "Sp(n)-invariance", sp_n_invariance),
    (7, "orbit separation", orbit_separation),
    (8, "witness soundness", witness_soundness),
    (9, "decomposition round-trip", decomposition_round_trip),
    (10, "multiplicity law", multiplicity_law),
    (11, "characteristic deviation", characteristic_deviation_checks),
    (12, "associated planes", associated_planes),
]


def run_criterion(number, n=8, seed=0, scale=1.0, tol_override=None):
    if n < MIN_SIZE:
        raise ValueError(f"self-test needs n >= {MIN_SIZE}")
    num, name, fn = CRITERIA[number - 1]
    rng = spawn(seed, len(CRITERIA))[number - 1]
    return _wrap(num, name, fn, HQSpace(n), rng, scale, tol_override)


def run_all(n=8, seed=0, scale=1.0, tol_override=None, only=None):
    numbers = only or [c[0] for c in CRITERIA]
    return [run_criterion(k, n, seed, scale, tol_override) for k in numbers]
