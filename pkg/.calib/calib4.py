import time
import numpy as np
from freeconv.ncpoly import CoefficientPencil, parse
from freeconv.ensembles import GAUSSIAN, UNIFORM, WishartSpec
from freeconv.freeprob import SEMICIRCULAR, marchenko_pastur, density, norm_prediction
from freeconv.montecarlo import (WignerEnsemble, WishartEnsemble, estimate_Gn,
                                 norm_convergence, spectrum_containment, variance_checks,
                                 wishart_ibp_check, IbpPhi, TraceWordTarget,
                                 ResolventEntryTarget)

sc1 = CoefficientPencil.scalar(0.0, [1.0])

t0 = time.time()
grid = np.arange(-3.0, 3.0001, 0.02)
est = density(sc1, SEMICIRCULAR, grid)
i0 = np.argmin(np.abs(grid))
print(f"[density sc] rho(0)={est.density[i0]:.6f} (1/pi={1/np.pi:.6f}) "
      f"support={est.support} integral={est.integral:.4f} preclamp={est.preclamp_min:.2e} "
      f"({time.time()-t0:.1f}s)", flush=True)

t0 = time.time()
grid = np.arange(-1.0, 6.0001, 0.02)
est = density(sc1, marchenko_pastur(1.0), grid)
i2 = np.argmin(np.abs(grid - 2.0))
print(f"[density mp] rho(2)={est.density[i2]:.6f} (1/2pi={1/(2*np.pi):.6f}) "
      f"support={est.support} integral={est.integral:.4f} ({time.time()-t0:.1f}s)", flush=True)

t0 = time.time()
for text, r, model, expect in [("x1", 1, SEMICIRCULAR, 2.0), ("x1^2", 1, SEMICIRCULAR, 4.0),
                               ("x1 + x2", 2, SEMICIRCULAR, 2*np.sqrt(2)),
                               ("x1", 1, marchenko_pastur(1.0), 4.0)]:
    p = parse(text, r)
    t1 = time.time()
    v = norm_prediction(p, model, tol=1e-3)
    print(f"[norm] {text:10s} -> {v:.6f} expect {expect:.6f} err {abs(v-expect):.2e} "
          f"({time.time()-t1:.1f}s)", flush=True)

t0 = time.time()
rep = norm_convergence(parse("x1", 1), WignerEnsemble(GAUSSIAN), [100, 200, 400, 800],
                       seeds=20, seed=42, workers=2, prediction=2.0)
print(f"[conv x1] medians {[f'{p.median_abs_dev:.4f}' for p in rep.points]} "
      f"non-incr={rep.medians_non_increasing} ({time.time()-t0:.1f}s)", flush=True)

t0 = time.time()
rep = norm_convergence(parse("x1", 1), WishartEnsemble(1.0), [800], seeds=20, seed=43,
                       workers=2, prediction=4.0)
print(f"[conv wishart] median {rep.points[0].median_abs_dev:.4f} ({time.time()-t0:.1f}s)", flush=True)

t0 = time.time()
r1 = variance_checks(TraceWordTarget((1, 1)), WignerEnsemble(GAUSSIAN),
                     [100, 200, 400, 800], 400, seed=5, workers=2)
print(f"[var trX^2] slope {r1.slope:.3f}+-{r1.slope_stderr:.3f} gated={r1.all_gated} "
      f"({time.time()-t0:.1f}s)", flush=True)
t0 = time.time()
r2 = variance_checks(ResolventEntryTarget(sc1, 2j * np.eye(1)), WignerEnsemble(UNIFORM),
                     [100, 200, 400, 800], 400, seed=6, workers=2)
print(f"[var H11] slope {r2.slope:.3f}+-{r2.slope_stderr:.3f} gated={r2.all_gated} "
      f"({time.time()-t0:.1f}s)", flush=True)

t0 = time.time()
for (n, p_), phi, h in [((30, 60), IbpPhi("trace_linear", (0, 0)), (0, 0)),
                        ((30, 45), IbpPhi("resolvent_entry", (0, 0), 3j), (0, 1))]:
    spec = WishartSpec(n=n, alpha=p_ / n)
    rep = wishart_ibp_check(spec, phi, h, replicas=100_000, seed=9, workers=2)
    print(f"[ibp n={n} p={p_} {phi.kind}] value={rep.value:.2e} stderr={rep.stderr:.2e} "
          f"|v|/se={abs(rep.value)/rep.stderr:.2f} ok={rep.within_four_stderr} "
          f"({time.time()-t0:.1f}s)", flush=True)
    t0 = time.time()

t0 = time.time()
rep = spectrum_containment(sc1, WignerEnsemble(GAUSSIAN), 400, 0.2, seeds=20, seed=12,
                           workers=2, support=((-2.0, 2.0),))
print(f"[contain sc] rate {rep.pass_rate} ({time.time()-t0:.1f}s)", flush=True)
rep = spectrum_containment(sc1, WishartEnsemble(1.0), 400, 0.2, seeds=20, seed=13,
                           workers=2, support=((0.0, 4.0),))
print(f"[contain mp] rate {rep.pass_rate} ({time.time()-t0:.1f}s)", flush=True)

t0 = time.time()
est = estimate_Gn(sc1, WishartEnsemble(1.0), (2 + 2j) * np.eye(1), 200, 200, seed=14, workers=2)
from freeconv.freeprob import solve_G
Gref = solve_G(sc1, marchenko_pastur(1.0), (2 + 2j) * np.eye(1), tol=1e-12).G
print(f"[wishart Gn] |mean-G|={abs(est.mean[0,0]-Gref[0,0]):.2e} "
      f"3se={3*est.stderr[0,0]:.2e} ({time.time()-t0:.1f}s)", flush=True)
