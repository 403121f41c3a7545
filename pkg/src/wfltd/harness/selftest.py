"""Fast built-in oracle checks, runnable without the test suite."""
from __future__ import annotations

import math

import numpy as np

from ..agent import BOUNDS
from ..core import LowerBound, UpperBound, WflParams, delta_ln, fisher_information, taylor_delta_ln, update_weight
from ..nn import GaussianPolicyHead, ValueHead


def _check_td_recovery():
    rng = np.random.default_rng(0)
    v = -rng.uniform(0.0, 5.0, 10_000)
    q = -rng.uniform(0.0, 5.0, 10_000)
    err = np.max(np.abs(update_weight(v, q, WflParams(math.inf), UpperBound(0.0)) - (q - v)))
    return err <= 1e-12, f"max |w - (q - v)| = {err:.2e}"


def _check_mirror():
    rng = np.random.default_rng(1)
    v, q = -rng.uniform(1e-3, 3, 1000), -rng.uniform(1e-3, 3, 1000)
    worst = 0.0
    for beta in (0.1, 1.0, 10.0):
        p = WflParams(beta)
        worst = max(worst, np.max(np.abs(update_weight(v, q, p, UpperBound(0.0))
                                         + update_weight(-v, -q, p, LowerBound(0.0)))))
    return worst <= 1e-12, f"max mirror residual = {worst:.2e}"


def _check_taylor():
    worst = 0.0
    for beta in (0.1, 1.0, 10.0):
        d = np.linspace(1e-5, 0.01, 25) / beta
        V, Q = np.meshgrid(-d, -d, indexing="ij")
        off = V != Q
        exact = delta_ln(V[off], Q[off], WflParams(beta), UpperBound(0.0))
        approx = taylor_delta_ln(V[off], Q[off], UpperBound(0.0))
        worst = max(worst, float(np.max(np.abs(exact - approx) / np.abs(approx))))
    return worst <= 0.01, f"max relative error = {worst:.2e}"


def _check_fisher():
    h = 1e-6
    worst = 0.0
    for beta in (0.3, 1.0, 3.0):
        for v in np.linspace(-3.0, -0.05, 12):
            def log_probs(x):
                p = math.exp(beta * x)
                return math.log(p), math.log1p(-p)
            p = math.exp(beta * v)
            up, dn = log_probs(v + h), log_probs(v - h)
            s1, s0 = (up[0] - dn[0]) / (2 * h), (up[1] - dn[1]) / (2 * h)
            numeric = p * s1 ** 2 + (1 - p) * s0 ** 2
            closed = fisher_information(v, WflParams(beta), UpperBound(0.0))
            worst = max(worst, abs(numeric - closed) / closed)
    return worst <= 1e-6, f"max relative error = {worst:.2e}"


def _check_gradients():
    rng = np.random.default_rng(2)
    worst = 0.0
    for trial in range(5):
        head = ValueHead(3, (8, 8), sign=-1 if trial % 2 else 1, rng=rng)
        head.net.params[...] = rng.normal(0, 0.5, head.net.n_params)
        s = rng.normal(size=(4, 3))
        c = rng.normal(size=4)
        _, g = head.value_and_grad(s, c)
        worst = max(worst, _fd_error(head.net.params, lambda: float(c @ head.value(s)), g))
        pol = GaussianPolicyHead(3, [-2.0], [2.0], (8, 8), rng=rng)
        pol.net.params[...] = rng.normal(0, 0.5, pol.net.n_params)
        a = rng.uniform(-1.9, 1.9, size=(4, 1))
        _, g = pol.log_prob_and_grad(s, a, c)
        worst = max(worst, _fd_error(pol.net.params, lambda: float(c @ pol.log_prob(s, a)), g))
    return worst < 1e-4, f"max relative error = {worst:.2e}"


def _fd_error(params, f, grad, h=1e-5):
    fd = np.empty_like(params)
    for i in range(params.size):
        old = params[i]
        params[i] = old + h
        up = f()
        params[i] = old - h
        dn = f()
        params[i] = old
        fd[i] = (up - dn) / (2 * h)
    return float(np.linalg.norm(fd - grad) / max(np.linalg.norm(fd), 1e-12))


def _check_branch_bounds():
    ok = isinstance(BOUNDS["plus"], LowerBound) and isinstance(BOUNDS["minus"], UpperBound)
    return ok, "plus -> lower bound 0, minus -> upper bound 0"


CHECKS = {
    "conventional TD recovery": _check_td_recovery,
    "mirror symmetry": _check_mirror,
    "Taylor agreement near the bound": _check_taylor,
    "Fisher information vs binary expectation": _check_fisher,
    "network gradients vs finite differences": _check_gradients,
    "branch bound conventions": _check_branch_bounds,
}


def run_selftest(echo=print) -> bool:
    all_ok = True
    for name, check in CHECKS.items():
        ok, detail = check()
        all_ok &= bool(ok)
        echo(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
