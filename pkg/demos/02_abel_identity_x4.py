# coding: utf-8

# # The five conic fibrations of the quartic surface and Abel's relation

# Blow up four general points of the plane.
# Each of the five conic pencils gives a map to P^1, and each carries three singular fibers.
# The built-in configuration places the singular values at 0, 1, infinity.

# In[1]:

import numpy as np

from dphlog.hlog import epsilon_sign, tau_family
from dphlog.hyperlog import abel_residual, identity_residual, model_ai, rogers_R, sample_targets
from dphlog.planegeom import builtin_x4, choose_base, config_scale

cfg, models = builtin_x4()
for m in models:
    print(m.c, m.singular_values)


# The weight-2 antisymmetrized hyperlogarithm of each fibration, along a path from the base point.

# In[2]:

rng = np.random.default_rng(7)
base = choose_base(cfg, rng)
target = sample_targets(models, base, rng, 1, 0.25 * config_scale(cfg))[0]
for m in models:
    print(m.c, model_ai(m, base, target))


# The signs come from comparing each residue wedge with the corresponding tau.

# In[3]:

T = tau_family(4)
eps = [epsilon_sign(m.c, m.fibers, T) for m in models]
print(eps)
print(identity_residual(models, eps, base, target).abs)
print(identity_residual(models, [1] * 5, base, target).abs)


# On the real interval the same cancellation is the five-term relation for the Rogers dilogarithm,
# normalized here so that R(1) = 0.

# In[4]:

x, y = 0.3, 0.45
print(abel_residual(x, y))
print(rogers_R(x) + rogers_R(1 - x), -np.pi**2 / 6)
