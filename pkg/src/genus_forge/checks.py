"""Verification suites run by ``genus-forge verify``.

Every check is deterministic given the seed; reports list checks in
declaration order.
"""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

import numpy as np

from . import anomaly, charclass, modular, superalg, zeta_det
from .algebra import Grass, parse_form, random_form
from .series import sinh_over_z, TruncSeries


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    residual: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.suite}.{self.name} residual={self.residual}"


@dataclass
class Config:
    seed: int = 0
    tol: float = 1e-8
    cap: int = 8
    modes: int = 100000
    cutoff: int = 2000
    samples: int = 10


Check = Callable[[Config], Tuple[bool, str]]


def _exact(ok: bool) -> Tuple[bool, str]:
    return ok, "0" if ok else "nonzero"


def _num(res: float, tol: float) -> Tuple[bool, str]:
    return res < tol, f"{res:.3e}"


def sample_taus(n: int, seed: int) -> List[complex]:
    rng = random.Random(seed)
    return [complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 3.0)) for _ in range(n)]


# --------------------------------------------------------------------------
# series
def ahat_identity(cfg: Config) -> Tuple[bool, str]:
    cs = charclass.ahat_series(13)
    half = TruncSeries({1: Fraction(1, 2)}, 13, var="z")
    return _exact(cs.series() == sinh_over_z(13).inverse().compose(half))


def exp_log_roundtrip(cfg: Config) -> Tuple[bool, str]:
    rng = random.Random(cfg.seed)
    ok = True
    for _ in range(10):
        f = TruncSeries({k: Fraction(rng.randint(-9, 9), rng.randint(1, 9))
                         for k in range(1, 8)}, 8)
        ok = ok and f.exp().log() == f
    return _exact(ok)


# --------------------------------------------------------------------------
# modular
def e2_transformation(cfg: Config) -> Tuple[bool, str]:
    res = max(modular.e2_transform_residual(t, 60) for t in sample_taus(cfg.samples, cfg.seed))
    return _num(res, cfg.tol)


def e2_star_equivariance(cfg: Config) -> Tuple[bool, str]:
    res = 0.0
    for tau in sample_taus(cfg.samples, cfg.seed + 1):
        lat = modular.Lattice.from_tau(tau)
        v = modular.e2_star(lat)
        w = modular.e2_star(anomaly.sl2_act(anomaly.S, lat))
        res = max(res, abs(w - v))
    return _num(res, cfg.tol)


def eta_pentagonal(cfg: Config) -> Tuple[bool, str]:
    prod = modular.eta_product(201)
    pent = {}
    for j in range(-12, 13):
        pent[j * (3 * j - 1) // 2] = (-1) ** j
    ok = all(prod[n] == pent.get(n, 0) for n in range(201))
    return _exact(ok)


def eta_modulus(cfg: Config) -> Tuple[bool, str]:
    res = 0.0
    for tau in sample_taus(cfg.samples, cfg.seed + 2):
        lhs = abs(modular.eta_numeric(-1 / tau))
        rhs = abs(tau) ** 0.5 * abs(modular.eta_numeric(tau))
        res = max(res, abs(lhs - rhs))
    return _num(res, 1e-10)


def kronecker_invariance(cfg: Config) -> Tuple[bool, str]:
    res = 0.0
    for tau in sample_taus(cfg.samples, cfg.seed + 3):
        lat = modular.Lattice.from_tau(tau, 0.9 + 0.3j)
        k0 = zeta_det.kronecker_det(lat, 2)
        for w in (anomaly.S, anomaly.T):
            res = max(res, abs(zeta_det.kronecker_det(anomaly.sl2_act(w, lat), 2) - k0) / k0)
    return _num(res, cfg.tol)


# --------------------------------------------------------------------------
# charclass
def zagier(cfg: Config) -> Tuple[bool, str]:
    rep = charclass.zagier_identity_check(8, 10)
    return rep.max_discrepancy == 0, f"{rep.max_discrepancy} ({rep.resolved_convention})"


K3 = {"name": "K3-type", "dim": 4, "pontryagin_numbers": {"p1": -48}}
STRING4 = {"name": "string-4", "dim": 4, "pontryagin_numbers": {"p1": 0},
           "rational_string": True}


def ahat_k3(cfg: Config) -> Tuple[bool, str]:
    m = charclass.ManifoldData.from_dict(K3)
    v = charclass.genus_evaluate(charclass.genus_class("ahat", 4), m)
    return v == 2, str(v - 2)


def string_witten_deg4(cfg: Config) -> Tuple[bool, str]:
    m = charclass.ManifoldData.from_dict(STRING4)
    v = charclass.genus_evaluate(charclass.genus_class("witten-string", 4, 6), m)
    return _exact(v == 0)


# --------------------------------------------------------------------------
# susy
def _lemma(model: str) -> Check:
    def run(cfg: Config) -> Tuple[bool, str]:
        rng = random.Random(cfg.seed)
        n = max(1, cfg.samples // 2)
        ok = all(superalg.lemma_residual(model, superalg.random_lemma_input(rng, model, ["x1", "x2"]),
                                         ["x1", "x2"]).is_zero() for _ in range(n))
        return _exact(ok)
    return run


def proj_invariance(cfg: Config) -> Tuple[bool, str]:
    ok = all(r.is_zero() for m in ("1|1", "2|1") for r in superalg.proj_invariance_residual(m))
    return _exact(ok)


def d_squared(cfg: Config) -> Tuple[bool, str]:
    reps = [superalg.vector_field_check(m, max(1, cfg.samples // 2), cfg.seed)
            for m in ("1|1", "2|1")]
    return _exact(all(r.d_squared_ok and r.composition_ok for r in reps))


def connection_lemma(cfg: Config) -> Tuple[bool, str]:
    rng = random.Random(cfg.seed)
    coords = ["x1", "x2", "x3"]
    ok = True
    for _ in range(3):
        A = [[random_form(rng, coords, 1, 2).filter(lambda k: len(k) == 1) for _ in range(2)]
             for _ in range(2)]
        ok = ok and superalg.superconnection_expand(A, coords).ok
    return _exact(ok)


def concordance_identity(cfg: Config) -> Tuple[bool, str]:
    rng = random.Random(cfg.seed)
    coords = ["x1", "x2", "x3"]
    ok = all(superalg.concordance_residual(random_form(rng, coords + ["t"], 3, 3, 2),
                                           coords).is_zero() for _ in range(cfg.samples))
    return _exact(ok)


# --------------------------------------------------------------------------
# zeta
def _skew(rng: np.random.Generator, n: int, norm: float) -> np.ndarray:
    M = rng.normal(size=(n, n))
    M = M - M.T
    return M * (norm / np.linalg.norm(M, 2))


def fredholm_vs_closed(cfg: Config) -> Tuple[bool, str]:
    rng = np.random.default_rng(cfg.seed)
    res = 0.0
    for n in (2, 4, 6, 4, 2):
        r = float(rng.uniform(0.5, 1.5))
        op = zeta_det.KineticOperator("1|1", r, zeta_det.CurvatureModel(_skew(rng, n, 1.0 / r)))
        a = zeta_det.fredholm_oracle_11(op, cfg.modes)
        b = zeta_det.sdet_zeta_11(op).value
        res = max(res, abs(a - b) / abs(b))
    return _num(res, 1e-6)


def formal_ahat(cfg: Config) -> Tuple[bool, str]:
    curv = random_formal_curvature(random.Random(cfg.seed), 4, 8)
    op = zeta_det.KineticOperator("1|1", 1, curv)
    lhs = zeta_det.sdet_zeta_11(op).value
    rhs = zeta_det.evaluate_on_forms(charclass.genus_class("ahat", 8),
                                     zeta_det.pontryagin_forms(curv))
    return _exact(lhs == rhs)


def lattice_vs_tokens(cfg: Config) -> Tuple[bool, str]:
    rng = np.random.default_rng(cfg.seed)
    res = 0.0
    for tau, ell in ((0.3 + 1.1j, 0.8 + 0.2j), (-0.2 + 0.9j, 1.0), (0.1 + 1.6j, 0.6 - 0.5j)):
        lat = modular.Lattice.from_tau(tau, ell)
        op = zeta_det.KineticOperator("2|1", lat, zeta_det.CurvatureModel(_skew(rng, 4, 0.3)))
        a = zeta_det.lattice_oracle_21(op, cfg.cutoff).value
        terms = zeta_det.sdet_zeta_21_terms(op)
        b = complex(np.exp(sum(v for k, v in terms.items() if k >= 2)))
        res = max(res, abs(a - b) / abs(b))
    return _num(res, 1e-6)


def detline_norms(cfg: Config) -> Tuple[bool, str]:
    ok = (zeta_det.detline_norm_check("1|1", 8).factorized
          and zeta_det.detline_norm_check("2|1", 8).factorized)
    return _exact(ok)


def random_formal_curvature(rng: random.Random, n: int, m: int,
                            terms: int = 6) -> zeta_det.CurvatureModel:
    """Skew n x n matrix of random integral 2-forms in de1..dem."""
    gens = [f"de{i}" for i in range(1, m + 1)]
    R = [[Grass() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            a = Grass()
            for _ in range(terms):
                a = a + Grass.mono(rng.sample(gens, 2), rng.randint(-3, 3))
            R[i][j], R[j][i] = a, -a
    return zeta_det.CurvatureModel(R, cap=m)


# --------------------------------------------------------------------------
# anomaly
def relations(cfg: Config) -> Tuple[bool, str]:
    try:
        return _exact(all(anomaly.relation_check(cfg.cap).values()))
    except ArithmeticError as e:
        return False, str(e)


def cocycle_law(cfg: Config) -> Tuple[bool, str]:
    rng = random.Random(cfg.seed)
    ok = all(anomaly.cocycle_law_holds(anomaly.random_word(rng), anomaly.random_word(rng), cfg.cap)
             for _ in range(20))
    return _exact(ok)


def section_equivariance(cfg: Config) -> Tuple[bool, str]:
    rep = anomaly.witten_section_equivariance(cap=max(cfg.cap, 4), tol=cfg.tol,
                                              samples=cfg.samples, seed=cfg.seed)
    return rep.ok, f"{rep.max_residual:.3e}"


def string_endpoints(cfg: Config) -> Tuple[bool, str]:
    H = parse_form("x1*dx2*dx3*dx4")
    p1 = parse_form("dx1*dx2*dx3*dx4")
    ok = anomaly.string_trivialization_endpoints(H, p1).ok
    try:
        anomaly.string_trivialization(H, p1 * 2)
        ok = False
    except ValueError:
        pass
    return _exact(ok)


SUITES: Dict[str, List[Tuple[str, Check]]] = {
    "series": [("ahat_exponential_identity", ahat_identity),
               ("exp_log_roundtrip", exp_log_roundtrip)],
    "modular": [("e2_transformation", e2_transformation),
                ("e2_star_equivariance", e2_star_equivariance),
                ("eta_pentagonal_sparsity", eta_pentagonal),
                ("eta_modulus_law", eta_modulus),
                ("kronecker_det_invariance", kronecker_invariance)],
    "charclass": [("zagier_product_identity", zagier),
                  ("ahat_genus_k3", ahat_k3),
                  ("string_witten_degree4", string_witten_deg4)],
    "susy": [("generator_lemma_1|1", _lemma("1|1")),
             ("generator_lemma_2|1", _lemma("2|1")),
             ("proj_invariance", proj_invariance),
             ("d_squared_and_group_law", d_squared),
             ("connection_expansion", connection_lemma),
             ("concordance_homotopy", concordance_identity)],
    "zeta": [("fredholm_vs_closed_form", fredholm_vs_closed),
             ("formal_ahat_consistency", formal_ahat),
             ("lattice_sums_vs_tokens", lattice_vs_tokens),
             ("determinant_line_norms", detline_norms)],
    "anomaly": [("sl2_relations", relations),
                ("cocycle_law", cocycle_law),
                ("witten_section_s_equivariance", section_equivariance),
                ("string_trivialization_endpoints", string_endpoints)],
}


def run_suite(name: str, cfg: Config, threads: int = 1) -> List[CheckResult]:
    names = list(SUITES) if name == "all" else [name]
    jobs = [(s, n, f) for s in names for n, f in SUITES[s]]

    def one(job):
        s, n, f = job
        try:
            ok, res = f(cfg)
        except Exception as e:  # a crashing check is a failing check
            ok, res = False, f"error: {type(e).__name__}: {e}"
        return CheckResult(s, n, bool(ok), res)

    if threads <= 1:
        return [one(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, jobs))
