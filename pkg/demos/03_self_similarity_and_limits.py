"""Scaling laws of the clocks and the long-time renewal limits.

The stable subordinator scales with index 1/beta, its inverse with index
beta, iterated inverses with the product of the orders; the rescaled
counting processes converge to scaled inverse-stable laws.  Each claim is
checked by a two-sample Kolmogorov-Smirnov test at the 1% level.
"""

from fracount import FnbpLaw, FppLaw, GammaLaw, RngStream
from fracount.stats import renewal_limit_check, self_similarity_test

rng = RngStream(314159, 0)
R = 10_000

checks = [
    ("stable clock, index 1/beta (beta=0.5, c=3)",
     self_similarity_test("stable", 0.5, 1.0, 3.0, R, rng.child(0))),
    ("inverse clock, index beta (beta=0.5, c=4)",
     self_similarity_test("inverse", 0.5, 1.0, 4.0, R, rng.child(1))),
    ("iterated clock, index b1*b2 (0.7, 0.8, c=2)",
     self_similarity_test("iterated", (0.7, 0.8), 1.0, 2.0, R, rng.child(2))),
    ("FPP renewal limit at t=1000 (beta=0.7)",
     renewal_limit_check(FppLaw(0.7, 1.0), 1000.0, R, rng.child(3))),
    ("FNBP renewal limit at t=1000 (beta=0.7)",
     renewal_limit_check(FnbpLaw(FppLaw(0.7, 1.0), GammaLaw(2.0, 1.0)), 1000.0, R, rng.child(4))),
]

for name, res in checks:
    verdict = "pass" if res.passed(0.01) else "FAIL"
    print(f"{name:<48} KS p = {res.p_value:.3f}  [{verdict}]")

# power check: the wrong scaling index must be rejected decisively
from fracount.paths import inverse_stable_marginal
from fracount.stats import ks_two_sample

x = inverse_stable_marginal(0.5, 4.0, rng.child(5), size=R)
y = 4.0 * inverse_stable_marginal(0.5, 1.0, rng.child(6), size=R)
res = ks_two_sample(x, y)
print(f"{'wrong index (c instead of c^beta)':<48} KS p = {res.p_value:.2e}  [rejected]")
