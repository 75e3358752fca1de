"""Dev scratch: sanity-check solver math against brute-force oracles."""
import time

import numpy as np

from passreg import (
    Dataset, PenaltySpec, FitOptions, fit_penalized, fit_path, center_data,
    scad_univariate, soft_threshold, kkt_violation, active_set, adaptive_weights,
)
from passreg._solver import scad_penalty_value

rng = np.random.default_rng(0)

# --- scad_univariate vs dense grid, all pieces
print("== scad univariate vs grid ==")
worst = 0.0
for lam in (0.3, 1.0, 2.5):
    for a in (2.5, 3.7, 5.0):
        for z in np.concatenate([np.linspace(-12, 12, 241), [lam/2, 3*lam/2, a*lam, -lam/2, -3*lam/2, -a*lam]]):
            got = scad_univariate(z, lam, a)
            grid = np.linspace(-15, 15, 300001)
            f = (grid - z) ** 2 + np.array([scad_penalty_value(abs(g), lam, a) for g in [0]])[0]  # placeholder
            pen = np.where(np.abs(grid) <= lam, lam*np.abs(grid),
                   np.where(np.abs(grid) <= a*lam,
                            (2*a*lam*np.abs(grid) - grid**2 - lam**2) / (2*(a-1)),
                            0.5*lam**2*(a+1)))
            f = (grid - z) ** 2 + pen
            fbest = f.min()
            fgot = (got - z) ** 2 + (lam*abs(got) if abs(got) <= lam else
                    ((2*a*lam*abs(got) - got**2 - lam**2)/(2*(a-1)) if abs(got) <= a*lam else 0.5*lam**2*(a+1)))
            worst = max(worst, fgot - fbest)
print("   worst objective excess vs grid:", worst)
assert worst < 1e-7

# identity region exactness
for lam in (0.5, 1.0):
    for z in (3.71 * lam, 10 * lam, -5 * lam):
        assert scad_univariate(z, lam, 3.7) == z, (z, lam)
print("   identity region exact: ok")

# --- fit_penalized closed-form example
x = np.array([[1.0], [-1.0]])
y = np.array([1.0, -1.0])
data = Dataset(x, y)
coef = fit_penalized(data, PenaltySpec.lasso(), 1.0)
print("== single covariate lasso beta:", coef.beta, "expected 0.5")
assert abs(coef.beta[0] - 0.5) < 1e-10

# --- lambda=0 == OLS
n, p = 30, 5
X = rng.standard_normal((n, p))
beta_true = np.array([2.0, 0.0, -1.0, 0.0, 0.5])
yv = X @ beta_true + 0.1 * rng.standard_normal(n)
data, _ = center_data(Dataset(X, yv))
coef0 = fit_penalized(data, PenaltySpec.lasso(), 0.0)
ols = np.linalg.lstsq(data.x, data.y, rcond=None)[0]
print("== lam=0 vs OLS max diff:", np.max(np.abs(coef0.beta - ols)))
assert np.max(np.abs(coef0.beta - ols)) < 1e-7

# --- KKT on random instances
t0 = time.time()
worst_kkt = 0.0
for it in range(200):
    n = int(rng.integers(10, 40)); p = int(rng.integers(2, 9))
    X = rng.standard_normal((n, p)) @ np.diag(rng.uniform(0.5, 2.0, p))
    yv = rng.standard_normal(n) * 2
    data, _ = center_data(Dataset(X, yv))
    lam = float(10 ** rng.uniform(-2, 1))
    c = fit_penalized(data, PenaltySpec.lasso(), lam)
    v = kkt_violation(data, c, PenaltySpec.lasso(), lam)
    worst_kkt = max(worst_kkt, v)
print(f"== worst KKT violation over 200 instances: {worst_kkt:.2e} ({time.time()-t0:.2f}s)")
assert worst_kkt <= 1e-6

# --- grid oracle for fit_penalized, p=2, all three penalties
def objective(data, beta, penalty, lam):
    resid = data.y - data.x @ beta
    loss = float(np.mean(resid ** 2))
    ab = np.abs(beta)
    if penalty.kind == "lasso":
        pen = lam * ab.sum()
    elif penalty.kind == "alasso":
        w = penalty.weights if penalty.weights is not None else adaptive_weights(data)
        pen = lam * float(np.sum(np.where(ab > 0, w * ab, 0.0)))
    else:
        pen = float(np.sum(np.where(ab <= lam, lam*ab,
                    np.where(ab <= penalty.a*lam, (2*penalty.a*lam*ab - ab**2 - lam**2)/(2*(penalty.a-1)),
                             0.5*lam**2*(penalty.a+1)))))
    return loss + pen

def grid_min(data, penalty, lam, lo=-10.0, hi=10.0):
    # zoomed multi-start grid search to effective step <= 1e-3
    pts = np.linspace(lo, hi, 101)
    mesh = np.stack(np.meshgrid(pts, pts), -1).reshape(-1, 2)
    def ev(B):
        resid = data.y[None, :] - B @ data.x.T
        loss = np.mean(resid**2, axis=1)
        ab = np.abs(B)
        if penalty.kind == "lasso":
            pen = lam * ab.sum(1)
        elif penalty.kind == "alasso":
            w = penalty.weights if penalty.weights is not None else adaptive_weights(data)
            pen = lam * (ab * w).sum(1)
        else:
            a = penalty.a
            pv = np.where(ab <= lam, lam*ab, np.where(ab <= a*lam, (2*a*lam*ab - ab**2 - lam**2)/(2*(a-1)), 0.5*lam**2*(a+1)))
            pen = pv.sum(1)
        return loss + pen
    vals = ev(mesh)
    step = pts[1] - pts[0]
    top = mesh[np.argsort(vals)[:20]]
    best = vals.min()
    while step > 1e-3 / 1.5:
        news = []
        for cpt in top:
            loc = [np.linspace(c - 1.5*step, c + 1.5*step, 31) for c in cpt]
            m = np.stack(np.meshgrid(*loc), -1).reshape(-1, 2)
            news.append(m)
        mesh = np.concatenate(news)
        vals = ev(mesh)
        best = min(best, vals.min())
        top = mesh[np.argsort(vals)[:20]]
        step = step * 3 / 30
    return best

t0 = time.time()
for kind in ("lasso", "alasso", "scad"):
    for trial in range(3):
        n = 15; p = 2
        X = rng.standard_normal((n, p))
        yv = rng.standard_normal(n) * 3
        data, _ = center_data(Dataset(X, yv))
        # pre-standardize so the solver's internal penalty == original-scale penalty
        data = Dataset(data.x / np.sqrt(np.mean(data.x**2, axis=0)), data.y)
        lam = float(10 ** rng.uniform(-1, 0.5))
        pen = PenaltySpec(kind=kind) if kind != "alasso" else PenaltySpec.adaptive_lasso(adaptive_weights(data))
        coef = fit_penalized(data, pen, lam)
        ours = objective(data, coef.beta, pen, lam)
        oracle = grid_min(data, pen, lam)
        print(f"   {kind} trial {trial}: ours={ours:.8f} oracle={oracle:.8f} gap={ours-oracle:+.2e}")
        assert ours <= oracle + 1e-4
print(f"== grid oracle ok ({time.time()-t0:.1f}s)")

# --- path timing with numba
t0 = time.time()
grid = 10 ** np.linspace(2, -2, 100)
for _ in range(50):
    path = fit_path(data, PenaltySpec.scad(), np.sort(grid), FitOptions())
print(f"== 50 scad paths (p=2): {time.time()-t0:.2f}s")
print("ALL SANITY CHECKS PASSED")
