"""The exact identities behind the moment computation, on small numbers.

Everything here is rational arithmetic with zero tolerance. The centering
weight f_r(a) is completely multiplicative in r; summed over an input set
it splits into a main term H(r) * X plus measured remainders weighted by
J(r, s). Products of centered values expand over prime tuples, and the
tuples that pair up perfectly produce the normal-moment constants.
"""

from ekac.inputs import AllIntegers, unit_model
from ekac.moments import gaussian_moment_C
from ekac.oracle import (
    enumerate_two_to_one,
    f_r,
    main_term_weight,
    remainder_coeff,
    run_suite,
    verify_divisor_identities,
    verify_remainder_identity,
)

unit = unit_model()

print("== the centering weight f_r(a), h == 1 ==")
for r, a in ((2, 4), (2, 3), (6, 3), (12, 10)):
    print(f"  f_{r}({a}) = {f_r(r, a, unit)}")

print("\n== main-term weight H and remainder coefficients J ==")
for n in (2, 4, 8, 9, 36, 12):
    print(f"  H({n}) = {main_term_weight(n, unit)}")
for r, s in ((2, 2), (4, 1), (4, 2), (36, 6)):
    print(f"  J({r}, {s}) = {remainder_coeff(r, s, unit)}")

print("\n== the remainder identity on A = {1..100}, r = 6 ==")
x = 100
model = unit_model(x)
lhs = sum(f_r(6, a, model) for a in range(1, x + 1))
print(f"  sum over a of f_6(a)            = {lhs}")
print(f"  H(6) * X                        = {main_term_weight(6, model) * x}")
res = verify_remainder_identity(AllIntegers(x), 6, model)
print(f"  identity with measured E_s      : {'holds exactly' if res.passed else 'FAILS'}")

print("\n== 2-to-1 pairings count the normal moments ==")
for m in (2, 4, 6, 8):
    t = len(enumerate_two_to_one(m))
    half_fact = 1
    for i in range(1, m // 2 + 1):
        half_fact *= i
    print(f"  |T_{m}| = {t:5d}, divided by ({m // 2})! = {t // half_fact:4d}, normal moment C_{m} = {gaussian_moment_C(m)}")

print("\n== a divisor identity, spot check at r = 360 ==")
print(f"  {verify_divisor_identities(360, unit).line()}")

print("\n== full suite ==")
report = run_suite(fast=True)
print(report.to_text())
