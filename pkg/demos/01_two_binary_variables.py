"""How much of a dependent 2x2 law is secretly a product law?

A joint distribution of two binary variables can fail an independence
test while still being, almost entirely, a mixture with an independent
component.  This script quantifies that with latent weights.
"""

from fractions import Fraction

import numpy as np

from latentw import (Distribution, ProductClassSpec, SampleSpace,
                     class_weight, singleton_weight)

# The joint law of (X, Y) on {0,1}^2, outcomes ordered 00, 01, 10, 11.
# X ~ Bernoulli(3/5) and Y ~ Bernoulli(4/5), but X and Y are dependent:
# P(X=1, Y=1) = 1/2 != (3/5)*(4/5).
space = SampleSpace(k=2, d=2)
p = Distribution(space, [Fraction(1, 10), Fraction(3, 10),
                         Fraction(1, 10), Fraction(1, 2)])

# First guess: how much weight can the product of the *marginals* carry?
mu, nu = Fraction(3, 5), Fraction(4, 5)
q0 = Distribution(space, [(1 - mu) * (1 - nu), (1 - mu) * nu,
                          mu * (1 - nu), mu * nu])
w0 = singleton_weight(p, q0)
print(f"weight of Bernoulli(3/5) x Bernoulli(4/5): {w0}  (= {float(w0):.4f})")

# The marginals are not the best choice.  Optimizing over *all* product
# laws finds a component with weight 24/25: up to a hidden 4% event, the
# two variables behave independently.
res = class_weight(p.as_float(), ProductClassSpec(kind="product"))
print(f"best product-class weight: {res.lam:.6f}  (24/25 = {24 / 25})")
print(f"domination certificate margin: {res.certificate_margin:.2e}")

q = res.argmax_q
marg_x = q.p[2] + q.p[3]   # P(X=1) under the maximizer
marg_y = q.p[1] + q.p[3]   # P(Y=1)
print(f"maximizer marginals: P(X=1) = {marg_x:.4f} (5/8 = 0.625), "
      f"P(Y=1) = {marg_y:.4f} (5/6 = {5 / 6:.4f})")

# The residual of the optimal mixture is a point mass on (0, 0):
residual = (p.as_float().p - res.lam * q.p) / (1 - res.lam)
print("residual:", np.round(residual, 6))
