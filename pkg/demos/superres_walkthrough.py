# %% [markdown]
# Super-resolution as inpainting
#
# Decimate an image by 2, scatter the surviving pixels onto the full grid,
# and treat the other 75% as missing. The smoothness prior fills them in.

# %%
from skimage import data
from skimage.color import rgb2gray
import numpy as np

from mrfrestore import (build_model, build_superres_problem, decimate, evaluate,
                        labels_with_stride, run_expansion, initial_labeling)
from mrfrestore.image_core import ImageGrid

truth = ImageGrid(np.round(rgb2gray(data.astronaut()) * 255).astype(np.uint8)[:256, 128:384])
low = decimate(truth, 2)
hi, mask = build_superres_problem(low, 2)
print("low-res", low.shape, "-> grid", hi.shape, f"missing {mask.density():.0%}")

# %%
model = build_model(hi, mask, labels=labels_with_stride(2))
lab, trace = run_expansion(model, initial_labeling(model))
print("expansion:", evaluate(lab.to_image(), truth).cell(), "in", trace.cycles, "cycles")

# %% [markdown]
# For comparison, plain pixel replication of the low-res image:

# %%
nearest = ImageGrid(np.kron(low.pixels, np.ones((2, 2), np.uint8)))
print("replicate:", evaluate(nearest, truth).cell())
