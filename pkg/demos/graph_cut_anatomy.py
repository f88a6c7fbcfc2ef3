# %% [markdown]
# Inside one expansion move
#
# On a 2x2 grid we build the graph for expanding label 3, look at its
# nodes and edges, and check that the cut value plus the constant term
# equals the energy of the labeling the cut encodes.

# %%
import numpy as np

from mrfrestore import Labeling, build_model, min_cut, total_energy
from mrfrestore.image_core import ImageGrid
from mrfrestore.moves import expansion_graph

obs = ImageGrid(np.array([[1, 2], [1, 3]], np.uint8))
cur = Labeling(np.array([[1, 2], [1, 2]]))

# k = 1 is a metric, so each separated neighbour pair gets an auxiliary node
model = build_model(obs, k=1)
g = expansion_graph(model, cur, alpha=3)
print("nodes: 2 terminals +", g.n_pixels, "pixels +", g.n_aux, "auxiliary =", g.node_census)
print(g.network.to_dimacs())

cut = min_cut(g.network)
moved = Labeling(np.where(cut.side[:4].reshape(2, 2), 3, cur.assignment))
print("cut + constant =", cut.flow_value + g.constant, "; energy of moved labeling =",
      total_energy(model, moved))

# %% [markdown]
# With the default truncated quadratic (k = 2) the triple (1, 2, 3) breaks the
# triangle inequality: V(1,3) = 4 > V(1,2) + V(2,3) = 2. Such pairs get a
# direct two-variable encoding and no auxiliary node.

# %%
g2 = expansion_graph(build_model(obs), cur, alpha=3)
print("k=2 auxiliary nodes:", g2.n_aux)
