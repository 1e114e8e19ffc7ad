# %% [markdown]
# # Spectral building blocks
#
# A field on the periodic interval [-16*pi, 16*pi) is stored as its Fourier
# half-spectrum. This script walks through the transform convention, the
# norms used for assimilation errors, and the 2/3 truncation.

# %%
import math

import numpy as np

from ksnudge import dealias, h1_norm, initial_condition, l2_norm, make_grid, to_physical, to_spectral

g = make_grid(1024, 32 * math.pi)
print(f"N = {g.n_points}, dx = {g.dx:.5f}, k_1 = {g.wavenumber(1):.5f}, dealias cutoff = {g.dealias_cutoff}")

# %% [markdown]
# `cos(k x)` has coefficient 1/2 at its mode. On this domain k_m = m/16, so
# `cos(x/16)` sits in mode 1 and `cos(x)` in mode 16.

# %%
s = to_spectral(np.cos(g.x), g)
print("largest coefficient at mode", int(np.argmax(np.abs(s))), "value", s[16])

# %% [markdown]
# The standard initial datum `cos(x/16)(1 + sin(x/16))` has RMS norm
# sqrt(5/8) and gradient RMS 1/16.

# %%
u0 = initial_condition(g)
print(f"L2 = {l2_norm(u0):.12f} (sqrt(5/8) = {math.sqrt(5 / 8):.12f})")
print(f"H1 = {h1_norm(u0, g):.12f}")

# %% [markdown]
# Products create modes above the cutoff; `dealias` removes them. A mode-300
# wave squared lands in mode 600, which a 1024-point grid folds back to mode
# 424, above the cutoff.

# %%
w = np.cos(300 * g.x / 16)
prod = to_spectral(w * w, g)
print("energy above cutoff before/after:",
      np.abs(prod[g.dealias_cutoff + 1:]).max(), np.abs(dealias(prod, g)[g.dealias_cutoff + 1:]).max())
