"""Independent numerical oracles: finite differences, spectral norms, reference solves.

These routines deliberately avoid the analytic code paths they are meant to
check: gradients are validated by central differences of the loss, smoothness
constants by power iteration on finite-difference Hessian-vector products,
and optima by direct linear solves (quadratic bases) or an external
quasi-Newton solver with Newton polishing (logistic bases).
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from .model import PartitionedModel, flatten, unflatten
from .objectives import ObjectiveSpec, eval_loss, grad_full, grad_sample

__all__ = ["fd_gradient", "hessian_block_norm", "reference_solve", "verify_suite"]


def _loss_fn(spec: ObjectiveSpec, sample_index=None):
    if sample_index is None:
        return lambda model: eval_loss(spec, model)
    return lambda model: float(
        spec.client_losses(model.w, model.beta_stack(), sample_index).mean()
    )


def fd_gradient(spec: ObjectiveSpec, model: PartitionedModel, h: float = 1e-5,
                sample_index=None) -> np.ndarray:
    """Central-difference gradient of F (or of F_j) over the flattened model."""
    if h <= 0:
        raise ValueError("finite-difference step h must be positive")
    loss = _loss_fn(spec, sample_index)
    x = flatten(model)
    d0, dms = model.d0, model.dms
    grad = np.empty_like(x)
    for i in range(x.shape[0]):
        step = np.zeros_like(x)
        step[i] = h
        hi = loss(unflatten(x + step, d0, dms))
        lo = loss(unflatten(x - step, d0, dms))
        if not (np.isfinite(hi) and np.isfinite(lo)):
            raise FloatingPointError(f"non-finite probe evaluation at coordinate {i}")
        grad[i] = (hi - lo) / (2 * h)
    return grad


def _block_gradient(spec: ObjectiveSpec, model: PartitionedModel, block, sample_index):
    """Gradient of F (or F_j) restricted to a block; block is "w" or ("beta", m)."""
    if block == "w":
        if sample_index is None:
            return grad_full(spec, model, "w")
        return grad_sample(spec, model, sample_index, "w")
    kind, m = block
    if kind != "beta":
        raise ValueError(f"unknown block {block!r}")
    if sample_index is None:
        return grad_full(spec, model, "beta")[m]
    return grad_sample(spec, model, sample_index, "beta")[m]


def hessian_block_norm(
    spec: ObjectiveSpec,
    model: PartitionedModel,
    block,
    sample_index=None,
    tol: float = 1e-6,
    max_iters: int = 1000,
) -> float:
    """Largest eigenvalue of a Hessian block of F (or F_j) by power iteration.

    ``block`` is ``"w"`` or ``("beta", m)``.  Hessian-vector products use
    central differences of the analytic block gradient with step
    ``h = 1e-5 * (1 + ||x||)``.  The result bounds check the lemma constants:
    the w-block of F is l_w-smooth and each beta_m-block is l_beta-smooth
    (ll_w / ll_beta for the per-sample objective).
    """
    if block == "w":
        dim = spec.d0
        perturb = lambda v, s: PartitionedModel(model.w + s * v, model.betas)
    else:
        _, m = block
        dim = spec.dm

        def perturb(v, s, m=m):
            betas = [b.copy() for b in model.betas]
            betas[m] = betas[m] + s * v
            return PartitionedModel(model.w, betas)

    if dim == 0:
        return 0.0
    h = 1e-5 * (1.0 + np.linalg.norm(flatten(model)))
    # Fixed seeded start direction; only the top eigenvalue is needed.
    v = np.cos(1.0 + np.arange(dim))
    v /= np.linalg.norm(v)
    rayleigh = 0.0
    for _ in range(max_iters):
        g_plus = _block_gradient(spec, perturb(v, h), block, sample_index)
        g_minus = _block_gradient(spec, perturb(v, -h), block, sample_index)
        hv = (g_plus - g_minus) / (2 * h)
        new_rayleigh = float(v @ hv)
        norm = np.linalg.norm(hv)
        if norm == 0:
            return 0.0
        v = hv / norm
        if abs(new_rayleigh - rayleigh) <= tol * max(1.0, abs(new_rayleigh)):
            return new_rayleigh
        rayleigh = new_rayleigh
    raise RuntimeError(
        f"hessian_block_norm power iteration did not converge within {max_iters} "
        f"iterations; last Rayleigh quotient {rayleigh}"
    )


def _solve_quadratic(spec: ObjectiveSpec) -> PartitionedModel:
    """Exact minimizer of a quadratic-base objective via gradient probing.

    For quadratic bases the gradient of F is affine, so probing unit vectors
    assembles the exact Hessian: H e_i = grad(e_i) - grad(0).
    """
    zero = spec.zero_model()
    d0, dms = zero.d0, zero.dms
    dim = d0 + sum(dms)

    def full_grad(vec: np.ndarray) -> np.ndarray:
        m = unflatten(vec, d0, dms)
        gw = grad_full(spec, m, "w")
        gb = grad_full(spec, m, "beta")
        return np.concatenate([gw, gb.ravel()])

    g0 = full_grad(np.zeros(dim))
    H = np.empty((dim, dim))
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        H[:, i] = full_grad(e) - g0
    solution = np.linalg.solve(H, -g0)
    return unflatten(solution, d0, dms)


def reference_solve(spec: ObjectiveSpec, tol: float = 1e-10,
                    max_newton: int = 100) -> PartitionedModel:
    """High-accuracy minimizer of F with ``||grad F|| <= tol`` at the result.

    Quadratic bases use a direct linear solve; logistic bases run L-BFGS-B
    with the analytic gradient and polish with damped Newton steps on a
    finite-difference Hessian until the gradient norm meets ``tol``.
    """
    if spec.base.kind == "quadratic":
        model = _solve_quadratic(spec)
        grad_norm = _full_grad_norm(spec, model)
        if grad_norm > tol:
            raise RuntimeError(f"quadratic solve left gradient norm {grad_norm} > tol {tol}")
        return model

    zero = spec.zero_model()
    d0, dms = zero.d0, zero.dms
    dim = d0 + sum(dms)

    def objective(vec):
        m = unflatten(vec, d0, dms)
        gw = grad_full(spec, m, "w")
        gb = grad_full(spec, m, "beta")
        return eval_loss(spec, m), np.concatenate([gw, gb.ravel()])

    result = minimize(
        objective, np.zeros(dim), jac=True, method="L-BFGS-B",
        options={"maxiter": 20_000, "ftol": 1e-18, "gtol": min(tol, 1e-9) / 10},
    )
    x = result.x
    for _ in range(max_newton):
        _, g = objective(x)
        if np.linalg.norm(g) <= tol:
            return unflatten(x, d0, dms)
        # Finite-difference Hessian of the (analytic) gradient.
        h = 1e-4 * (1.0 + np.linalg.norm(x))
        H = np.empty((dim, dim))
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = h
            H[:, i] = (objective(x + e)[1] - objective(x - e)[1]) / (2 * h)
        H = 0.5 * (H + H.T)
        try:
            step = np.linalg.solve(H + 1e-12 * np.eye(dim), -g)
        except np.linalg.LinAlgError:
            step = -g
        # Damped acceptance on the gradient norm.
        t = 1.0
        base_norm = np.linalg.norm(g)
        while t > 1e-8:
            if np.linalg.norm(objective(x + t * step)[1]) < base_norm:
                x = x + t * step
                break
            t /= 2
        else:
            break
    _, g = objective(x)
    if np.linalg.norm(g) > tol:
        raise RuntimeError(
            f"reference_solve iteration cap exceeded; gradient norm {np.linalg.norm(g)} > {tol}"
        )
    return unflatten(x, d0, dms)


def _full_grad_norm(spec: ObjectiveSpec, model: PartitionedModel) -> float:
    gw = grad_full(spec, model, "w")
    gb = grad_full(spec, model, "beta")
    return float(np.sqrt((gw**2).sum() + (gb**2).sum()))


def verify_suite(verbose: bool = True) -> bool:
    """A quick self-check battery used by the CLI's ``verify`` subcommand.

    Returns True when every check passes; prints one line per check when
    verbose.
    """
    from . import datagen
    from .objectives import (LogisticBase, QuadraticBase, estimate_mu_prime,
                             smoothness_profile)
    from .rng import RngStream

    checks: list[tuple[str, bool, str]] = []

    def record(name, ok, detail=""):
        checks.append((name, ok, detail))
        if verbose:
            print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else ""))

    stream = RngStream(20260823, "verify")
    dataset = datagen.gen_mixture(datagen.SynthConfig(kind="mixture", d=4, n=6, M=3,
                                                      sigma_h=0.5, seed=7))
    base = LogisticBase(dataset)
    M, d = base.M, base.dim
    quad_raw = stream.normal(size=(M, d, d))
    quad = np.einsum("mde,mfe->mdf", quad_raw, quad_raw) + 0.1 * np.eye(d)
    qbase = QuadraticBase(quad, stream.normal(size=(M, d)))

    specs = {
        "TRAD": ObjectiveSpec("TRAD", base),
        "FULL": ObjectiveSpec("FULL", base),
        "MT2": ObjectiveSpec("MT2", base, lam=0.05, Lam=1.0),
        "MX2": ObjectiveSpec("MX2", base, lam=0.05),
        "APFL2": ObjectiveSpec("APFL2", base, Lam=1.0,
                               alphas=stream.uniform(size=M, low=0.2, high=0.8)),
        "WS2": ObjectiveSpec("WS2", base, d_g=2, d_l=2),
    }

    for name, spec in specs.items():
        model = unflatten(stream.normal(size=spec.d0 + spec.dm * spec.M),
                          spec.d0, [spec.dm] * spec.M)
        analytic = np.concatenate([
            grad_full(spec, model, "w"), grad_full(spec, model, "beta").ravel()
        ])
        numeric = fd_gradient(spec, model)
        rel = np.linalg.norm(analytic - numeric) / max(1e-12, np.linalg.norm(numeric))
        record(f"gradient check {name} (logistic)", rel <= 1e-6, f"rel err {rel:.2e}")

    mx2_quad = ObjectiveSpec("MX2", qbase, lam=0.05)
    opt = reference_solve(mx2_quad, tol=1e-10)
    closed_form = np.sqrt(M) * np.mean(opt.beta_stack(), axis=0)
    gap = np.linalg.norm(opt.w - closed_form)
    record("MX2 partial minimization w* = sqrt(M) * mean(beta)", gap <= 1e-10,
           f"gap {gap:.2e}")

    mu_est = estimate_mu_prime(base, dataset.truth.beta_stars)
    record("mu' estimate nonnegative", mu_est >= 0, f"mu'={mu_est:.3e}")

    spec = specs["MX2"]
    profile = smoothness_profile(spec, mu_est, base.l_prime(), base.ll_prime())
    model = spec.zero_model()
    norm_w = hessian_block_norm(spec, model, "w")
    record("MX2 w-block Hessian within lemma constant",
           norm_w <= profile.l_w * (1 + 1e-3), f"{norm_w:.3e} <= {profile.l_w:.3e}")

    return all(ok for _, ok, _ in checks)
