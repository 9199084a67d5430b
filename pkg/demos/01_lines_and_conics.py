# coding: utf-8

# # Lines, conic classes and the combinatorial identity

# The exceptional curves on a del Pezzo surface of degree 9 - r are the Weyl orbit of e_r.
# The conic classes are the orbit of h - e_1.

# In[1]:

from dphlog.curves import conic_classes, lines, type_census
from dphlog.hlog import hlog_sum, relation_space_dim, tau_c1, tau_family
from dphlog.picard import e, h

for r in range(3, 9):
    print(r, len(lines(r)), len(conic_classes(r)))


# Sorted by type (d; m_1, ..., m_r) up to permuting the m_i, the degree 1 surface has seven kinds of lines and fifteen kinds of conic classes.

# In[2]:

for kind in ("lines", "conics"):
    for t, n in type_census(kind, 8).items():
        print(kind, t, n)


# The reducible fibers of the pencil h - e_1 give a wedge of r - 2 lines per choice of components.
# For r = 4 it is a 2-vector with 3 * 2^2 = 12 terms.

# In[3]:

r = 4
L = lines(r)
tau = tau_c1(r, L)
print(len(tau))
for key, c in sorted(tau.terms.items()):
    print(c, " ^ ".join(str(L.lines[i]) for i in key))


# Pushed around the conic classes by the Weyl group, these wedges cancel in pairs.

# In[4]:

for r in range(3, 9):
    hlog_sum(r)
    print(r, "hlog = 0", len(tau_family(r)), "conic classes")


# And the cancellation is essentially unique: the space of integer relations is spanned by the all-ones vector.

# In[5]:

for r in range(3, 9):
    print(r, relation_space_dim(r))
