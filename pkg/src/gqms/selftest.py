"""
Built-in consistency suites: closed forms against the Lyapunov solver,
quadrature against the solver, analytic predicates against eigenvalues
and the PPT test, and the coefficient inequalities.

Each suite returns a :class:`SuiteResult`; :func:`run_selftest` collects
them and :func:`format_table` renders the summary.
"""

from dataclasses import dataclass, field
import itertools
import math
import time
import warnings

import numpy as np

from . import numkit
from .core import stability_check, stationary_covariance, weyl_evolution_factor
from .entanglement import det_indicates_entanglement, det_witness, partial_trace, s_tilde
from .models.common import analyse_system
from .models import single_noise as sn
from .models import two_noise as tn

__all__ = ["SuiteResult", "SUITES", "run_selftest", "format_table"]

CLOSED_FORM_RTOL = 1e-9
FAULT_SIZE = 1e-3
PARAM_DEAD_BAND = 1e-3
STABILITY_DEAD_BAND = 1e-10
MAX_REPORTED = 5


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self):
        return not self.failures and self.checked > 0

    def fail(self, message):
        self.failures.append(message)


def _sizes(quick, small, large):
    return small if quick else large


def _stable_single_grid(n):
    """``n x n`` grid of stable (kappa, g) kept away from the stability boundary."""
    out = []
    for k in np.linspace(-0.95, 0.95, n):
        for g in np.linspace(0.1, 2.5, n):
            if sn.single_noise_stability(k, g) and sn.single_noise_stability_margin(k, g) > 0.05:
                out.append((float(k), float(g)))
    return out


def suite_closed_form(quick=False, fault=None, **_):
    """6x6 closed form against the solver; ``fault=(row, col)`` perturbs one entry."""
    res = SuiteResult("closed form 6x6")
    n = _sizes(quick, 6, 20)
    betas = _sizes(quick, (1.3,), (1.05, 1.5, 3.0))
    for (k, g), bt in itertools.product(_stable_single_grid(n), betas):
        p = sn.SingleNoiseParams(k, g, bt)
        M = np.array(sn.single_noise_closed_form(p).S)
        if fault is not None:
            M[fault] += FAULT_SIZE
        S = stationary_covariance(sn.single_noise_system(p)).S
        scale = max(1.0, float(np.abs(S).max()))
        bad = np.argwhere(np.abs(M - S) > CLOSED_FORM_RTOL * scale)
        res.checked += 1
        if len(bad) and len(res.failures) < MAX_REPORTED:
            where = ", ".join(f"({i},{j}) diff {M[i, j] - S[i, j]:+.3e}" for i, j in bad)
            res.fail(f"kappa={k:.4g} g={g:.4g} bt={bt}: {where}")
    return res


def suite_reduced_forms(quick=False, seed=0, **_):
    """Reduced closed forms and printed characteristic polynomials."""
    res = SuiteResult("reduced closed forms")
    rng = np.random.default_rng(seed)
    for _ in range(_sizes(quick, 10, 100)):
        k, g, bt = rng.uniform(-0.9, 0.9), rng.uniform(0.1, 2.0), rng.uniform(1.01, 3.0)
        if not sn.single_noise_stability(k, g) or sn.single_noise_stability_margin(k, g) < 0.05:
            continue
        p = sn.SingleNoiseParams(k, g, bt)
        R = partial_trace(stationary_covariance(sn.single_noise_system(p)), sn.KEEP).S
        _compare(res, "single reduced", sn.single_noise_reduced_closed_form(p).S, R)
        cp = np.real(np.poly(np.linalg.eigvalsh(s_tilde(R))))
        _compare(res, "single char poly", sn.reduced_s_tilde_char_poly(p), cp, rtol=1e-8)

        g, b0, b3 = rng.uniform(0.1, 3.0), rng.uniform(1.01, 3.0), rng.uniform(1.01, 3.0)
        R0 = partial_trace(stationary_covariance(
            tn.two_noise_system(tn.TwoNoiseParams(0.0, g, b0, b3))), tn.KEEP).S
        _compare(res, "kappa=0 reduced", tn.two_noise_k0_closed_form(g, b0, b3).S, R0)
        cp = np.real(np.poly(np.linalg.eigvalsh(s_tilde(R0))))
        _compare(res, "kappa=0 char poly", tn.two_noise_k0_char_poly(g, b0, b3), cp, rtol=1e-8)
        p1 = tn.TwoNoiseParams(1.0, g, b0, b3)
        R1 = partial_trace(stationary_covariance(tn.two_noise_system(p1)), tn.KEEP).S
        _compare(res, "kappa=1 reduced", tn.two_noise_k1_closed_form(p1).S, R1)
        cp = np.real(np.poly(np.linalg.eigvalsh(s_tilde(R1))))
        _compare(res, "kappa=1 char poly", tn.two_noise_k1_char_poly(g, b0, b3), cp, rtol=1e-8)
    return res


def _compare(res, label, A, B, rtol=CLOSED_FORM_RTOL):
    A, B = np.asarray(A), np.asarray(B)
    err = float(np.abs(A - B).max()) / max(1.0, float(np.abs(B).max()))
    res.checked += 1
    if err > rtol and len(res.failures) < MAX_REPORTED:
        res.fail(f"{label}: relative error {err:.2e}")


def _random_stable_system(rng, two_noise, min_decay=0.02):
    while True:
        if two_noise:
            p = tn.TwoNoiseParams(rng.uniform(-1.4, 1.4), rng.uniform(0.2, 2.0),
                                  rng.uniform(1.01, 3.0), rng.uniform(1.01, 3.0))
            dd = tn.two_noise_system(p)
        else:
            p = sn.SingleNoiseParams(rng.uniform(-0.8, 0.8), rng.uniform(0.2, 2.0),
                                     rng.uniform(1.01, 3.0))
            dd = sn.single_noise_system(p)
        if stability_check(dd.Z).max_real_part < -min_decay:
            return p, dd


def suite_quadrature(quick=False, seed=1, **_):
    """Lyapunov solve against the quadrature oracle (relative 1e-6)."""
    res = SuiteResult("quadrature vs Lyapunov")
    rng = np.random.default_rng(seed)
    for two, count in ((False, _sizes(quick, 4, 100)), (True, _sizes(quick, 2, 50))):
        for _ in range(count):
            p, dd = _random_stable_system(rng, two)
            S = numkit.solve_lyapunov(dd.Z, dd.C)
            Q = numkit.stationary_integral_oracle(dd.Z, dd.C)
            err = float(np.linalg.norm(S - Q) / np.linalg.norm(S))
            res.checked += 1
            if err > 1e-6:
                res.fail(f"{p}: relative error {err:.2e}")
    return res


def suite_stability(quick=False, **_):
    """Stability lemmas against the eigenvalue oracle, boundary band excluded."""
    res = SuiteResult("stability lemmas")
    n = _sizes(quick, 30, 100)
    cases = (
        ("single", sn.single_noise_stability, sn._drift,
         np.linspace(-1.2, 1.2, n), np.linspace(0.05, 3.0, n)),
        ("two", tn.two_noise_stability, tn._drift,
         np.linspace(-1.8, 1.8, n), np.linspace(0.05, 2.0, n)),
    )
    for label, predicate, drift, ks, gs in cases:
        for k, g in itertools.product(ks, gs):
            alpha = numkit.eigenvalues_general(drift(k, g)).max_real_part
            if abs(alpha) < STABILITY_DEAD_BAND:
                continue
            if _near_flip(lambda q: predicate(*q), (k, g)):
                continue
            res.checked += 1
            if predicate(k, g) != (alpha < 0) and len(res.failures) < MAX_REPORTED:
                res.fail(f"{label} kappa={k:.6g} g={g:.6g}: lemma {predicate(k, g)}, "
                         f"max Re {alpha:.3e}")
    return res


def _near_flip(predicate, point, width=PARAM_DEAD_BAND):
    """True if the predicate changes anywhere in the box of half-width ``width``."""
    ref = predicate(point)
    for shift in itertools.product((-width, 0.0, width), repeat=len(point)):
        q = tuple(x + s for x, s in zip(point, shift))
        try:
            if predicate(q) != ref:
                return True
        except ValueError:
            return True
    return False


def suite_single_theorem(quick=False, **_):
    """Single-noise entanglement predicate against the PPT pipeline."""
    res = SuiteResult("single-noise theorem vs PPT")
    n = _sizes(quick, 8, 20)
    ks = np.linspace(-0.85, 0.85, n)
    gs = np.linspace(0.05, 2.0, n)
    bts = np.linspace(1.0005, 2.0, n)
    for k, g, bt in itertools.product(ks, gs, bts):
        if k == 0 or not sn.single_noise_stability(k, g):
            continue
        if _near_flip(lambda q: _single_pred(*q), (k, g, bt)):
            continue
        v, ok_witness = _pipeline_single(k, g, bt)
        res.checked += 1
        if v.entangled != v.analytic_entangled or not ok_witness:
            if len(res.failures) < MAX_REPORTED:
                res.fail(f"kappa={k:.4g} g={g:.4g} bt={bt:.4g}: PPT {v.entangled}, "
                         f"theorem {v.analytic_entangled}, witnesses agree {ok_witness}")
    return res


def _single_pred(k, g, bt):
    if bt < 1 or g == 0 or not sn.single_noise_stability(k, g):
        return None
    return sn.single_noise_entangled(k, g, bt)


def _witnesses_consistent(S_red, w):
    by_det = det_indicates_entanglement(w.det_tilde, S_red)
    return w.entangled == by_det == (w.log_negativity > 0)


def _pipeline_single(k, g, bt):
    p = sn.SingleNoiseParams(k, g, bt)
    dd = sn.single_noise_system(p)
    v = analyse_system(dd, keep=sn.KEEP, analytic=sn.single_noise_entangled(k, g, bt))
    S_red = partial_trace(stationary_covariance(dd), sn.KEEP)
    return v, _witnesses_consistent(S_red, v.witnesses)


def _pipeline_two(k, g, b0, b3, analytic=None):
    dd = tn.two_noise_system(tn.TwoNoiseParams(k, g, b0, b3))
    v = analyse_system(dd, keep=tn.KEEP, analytic=analytic)
    S_red = partial_trace(stationary_covariance(dd), tn.KEEP)
    return v, _witnesses_consistent(S_red, v.witnesses)


def _equal_pred(b, g):
    if b <= 1 or g == 0:
        return None
    return tn.two_noise_equal_temp_region(b, g)


def suite_equal_temp_theorem(quick=False, **_):
    """Equal-temperature predicate against the PPT pipeline."""
    res = SuiteResult("equal-temperature theorem vs PPT")
    n = _sizes(quick, 12, 60)
    for b, g in itertools.product(np.linspace(1.002, 2.6, n), np.geomspace(0.05, 4.0, n)):
        if _near_flip(lambda q: _equal_pred(*q), (b, g)):
            continue
        v, ok = _pipeline_two(1.0, g, b, b, analytic=tn.two_noise_equal_temp_region(b, g))
        res.checked += 1
        if v.entangled != v.analytic_entangled or not ok:
            if len(res.failures) < MAX_REPORTED:
                res.fail(f"b={b:.4g} g={g:.4g}: PPT {v.entangled}, theorem "
                         f"{v.analytic_entangled}, witnesses agree {ok}")
    return res


def suite_k0_separable(quick=False, **_):
    """Zero squeezing with two baths never entangles."""
    res = SuiteResult("two-noise kappa=0 separable")
    n = _sizes(quick, 4, 10)
    for g, b0, b3 in itertools.product(np.geomspace(0.1, 5, n), np.linspace(1.01, 3, n),
                                       np.linspace(1.01, 3, n)):
        v, ok = _pipeline_two(0.0, g, b0, b3)
        res.checked += 1
        if v.entangled or not v.witnesses.det_tilde > 0 or not ok:
            if len(res.failures) < MAX_REPORTED:
                res.fail(f"g={g:.4g} b0={b0:.4g} b3={b3:.4g}: det {v.witnesses.det_tilde:.3e}")
    return res


def suite_threshold(quick=False, **_):
    """Bisection of the determinant sign in temperature lands on the threshold."""
    res = SuiteResult("temperature threshold")
    points = ((0.5, 0.1), (0.3, 0.5), (0.7, 0.2)) if quick else \
        ((0.5, 0.1), (0.3, 0.5), (0.7, 0.2), (-0.4, 0.8), (0.6, 0.6), (0.1, 1.5))
    for k, g in points:
        found = bisect_temperature(k, g)
        want = sn.beta_tilde_threshold(k, g)
        res.checked += 1
        if abs(found - want) > 1e-3:
            res.fail(f"kappa={k} g={g}: bisection {found:.6f}, threshold {want:.6f}")
    return res


def bisect_temperature(kappa, g, low=1.0, high=4.0, tol=1e-6):
    """``beta_tilde`` at which ``det(S~_red)`` changes sign, by bisection."""
    def det_at(bt):
        p = sn.SingleNoiseParams(kappa, g, bt)
        return det_witness(partial_trace(stationary_covariance(sn.single_noise_system(p)), sn.KEEP))

    with warnings.catch_warnings():  # the bracket may start at zero temperature
        warnings.simplefilter("ignore", UserWarning)
        det_low = det_at(low)
    if not (det_low < 0 < det_at(high)):
        raise ValueError("no sign change of det(S~) in the bracket")
    while high - low > tol:
        mid = 0.5 * (low + high)
        if det_at(mid) < 0:
            low = mid
        else:
            high = mid
    return 0.5 * (low + high)


def suite_appendix_a(quick=False, seed=2, **_):
    """Linearity in the bath temperatures, and ``S1 = I`` without squeezing."""
    res = SuiteResult("temperature decomposition")
    rng = np.random.default_rng(seed)
    for _ in range(_sizes(quick, 10, 50)):
        k, g = rng.uniform(-1.3, 1.3), rng.uniform(0.3, 2.0)
        if not tn.two_noise_stability(k, g):
            continue
        b0, b3 = rng.uniform(1.01, 3), rng.uniform(1.01, 3)
        S1, Sd = tn.appendix_a_decomposition(k, g)
        S = stationary_covariance(tn.two_noise_system(tn.TwoNoiseParams(k, g, b0, b3))).S
        err = float(np.abs((b0 + b3) / 2 * S1 + (b0 - b3) / 2 * Sd - S).max())
        res.checked += 1
        if err > 1e-10:
            res.fail(f"kappa={k:.4g} g={g:.4g}: reconstruction error {err:.2e}")
    S1, _ = tn.appendix_a_decomposition(0.0, 0.7)
    res.checked += 1
    if float(np.abs(S1 - np.eye(8)).max()) > 1e-10:
        res.fail("kappa=0: S1 is not the identity")
    return res


def suite_appendix_b(quick=False, seed=3, **_):
    """Monte-Carlo check of the three coefficient inequalities."""
    res = SuiteResult("coefficient inequalities")
    rng = np.random.default_rng(seed)
    target = _sizes(quick, 1000, 10000)
    while res.checked < target:
        k = rng.uniform(-1, 1)
        if k == 0 or abs(k) >= 1:
            continue
        g2 = rng.uniform(0, sn.stability_bound_g2(k))
        bt = rng.uniform(1, 5)
        if g2 == 0 or bt == 1:
            continue
        flags = sn.appendix_b_inequalities(k, math.sqrt(g2), bt)
        res.checked += 1
        if not all(flags) and len(res.failures) < MAX_REPORTED:
            res.fail(f"kappa={k:.6g} g^2={g2:.6g} bt={bt:.6g}: {flags}")
    return res


def suite_weyl(quick=False, seed=4, **_):
    """Long-time Weyl decay exponent against the stationary covariance."""
    res = SuiteResult("Weyl decay vs stationary")
    rng = np.random.default_rng(seed)
    for _ in range(_sizes(quick, 5, 20)):
        p, dd = _random_stable_system(rng, False, min_decay=0.08)
        S = stationary_covariance(dd).S
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        a, _, _ = weyl_evolution_factor(z, 100.0, dd)
        zr = np.concatenate([z.real, z.imag])
        want = -0.5 * float(zr @ S @ zr)
        res.checked += 1
        if abs(a - want) > 1e-6:
            res.fail(f"{p}: exponent {a:.10g} vs {want:.10g}")
    return res


SUITES = (
    suite_closed_form,
    suite_reduced_forms,
    suite_quadrature,
    suite_stability,
    suite_single_theorem,
    suite_equal_temp_theorem,
    suite_k0_separable,
    suite_threshold,
    suite_appendix_a,
    suite_appendix_b,
    suite_weyl,
)


def run_selftest(quick=False, fault=None, suites=SUITES):
    """Run every suite; exceptions become failures of that suite."""
    results = []
    for suite in suites:
        t0 = time.perf_counter()
        try:
            r = suite(quick=quick, fault=fault)
        except Exception as exc:  # report, don't abort the table
            r = SuiteResult(suite.__name__.replace("suite_", ""))
            r.fail(f"raised {type(exc).__name__}: {exc}")
        r.seconds = time.perf_counter() - t0
        results.append(r)
    return results


def format_table(results):
    width = max(len(r.name) for r in results)
    lines = [f"{'suite':<{width}}  result  checks   time"]
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {mark:<6}  {r.checked:>6}  {r.seconds:5.1f}s")
        for f in r.failures:
            lines.append(f"    {f}")
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} suites passed")
    return "\n".join(lines)
