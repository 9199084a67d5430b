# coding: utf-8

# # Weight three on the cubic surface minus one point, and a random r = 6 plane

# The degree 4 surface has ten conic classes.
# The built-in model depends on two rational parameters (a, b).

# In[1]:

from fractions import Fraction

import numpy as np

from dphlog.hlog import epsilon_sign, tau_family
from dphlog.hyperlog import identity_residual, sample_targets
from dphlog.planegeom import (builtin_x5, choose_base, config_scale, pencil_models, random_config,
                              random_x5_parameters)

cfg, models = builtin_x5(Fraction(2), Fraction(7, 3))
print(len(models), [epsilon_sign(m.c, m.fibers, tau_family(5)) for m in models])


# With all plus signs the ten weight-3 terms cancel for any target.

# In[2]:

rng = np.random.default_rng(11)
base = choose_base(cfg, rng)
for z in sample_targets(models, base, rng, 3, 0.25 * config_scale(cfg)):
    rep = identity_residual(models, [1] * 10, base, z)
    print(z, rep.abs, rep.scale)


# Other parameters behave the same way.

# In[3]:

for _ in range(3):
    a, b = random_x5_parameters(rng)
    cfg, models = builtin_x5(a, b)
    base = choose_base(cfg, rng)
    z = sample_targets(models, base, rng, 1, 0.25 * config_scale(cfg))[0]
    print(a, b, identity_residual(models, [1] * 10, base, z).abs)


# Six random points: twenty-seven pencils, each with five singular fibers, weight four.
# Near the base point every term is tiny, so only targets with a visible largest term are kept.

# In[4]:

rng = np.random.default_rng(3)
cfg = random_config(6, rng)
models = pencil_models(cfg)
T = tau_family(6)
eps = [epsilon_sign(m.c, m.fibers, T) for m in models]
base = choose_base(cfg, rng)
shown = 0
while shown < 2:
    z = sample_targets(models, base, rng, 1, 0.25 * config_scale(cfg))[0]
    rep = identity_residual(models, eps, base, z)
    if rep.scale > 1e-4:
        print(len(models), rep.abs, rep.scale)
        shown += 1
