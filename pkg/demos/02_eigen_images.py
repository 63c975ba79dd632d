"""
Eigen-image codec
=================

The PCA baseline: fit principal components on an image corpus, represent
each image by its first ``k`` coefficients, and reconstruct images from
(possibly decoded) coefficients.
"""

import numpy as np

from latent_decode import eigenimage, linmap, metrics
from latent_decode.dataio import ImageSet

rng = np.random.default_rng(0)
size = 24
yy, xx = np.mgrid[0:size, 0:size] / size

# %%
# A toy corpus: blobs at random positions and widths on a grey background.
def blobs(n):
    cx, cy = rng.uniform(0.2, 0.8, (2, n, 1, 1))
    width = rng.uniform(0.05, 0.2, (n, 1, 1))
    img = 0.2 + 0.7 * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * width ** 2))
    return img.reshape(n, -1)


corpus = ImageSet(blobs(400), size, size, 1)
model = eigenimage.fit_pca(corpus, k=40)
share = model.explained_variance.cumsum() / corpus.images.var(axis=0).sum()
print("variance captured by 5/20/40 components:", share[[4, 19, 39]].round(3))

# %%
# Reconstruction error on unseen images falls as k grows.
test = blobs(50)
for k in (1, 5, 20, 40):
    m = eigenimage.fit_pca(corpus, k)
    err = np.mean((eigenimage.reconstruct(m, eigenimage.project(m, test)) - test) ** 2)
    print(f"k={k:3d}  mean squared error={err:.5f}")

# %%
# Treat the coefficients as the latent space: simulate voxel responses,
# decode coefficients for the test images and render them back to pixels.
train = blobs(300)
z_train, z_test = eigenimage.project(model, train), eigenimage.project(model, test)
w = rng.standard_normal((41, 150)) / np.sqrt(41)
x_train = linmap.augment_bias(z_train)
y_train = x_train @ w + 3.0 * rng.standard_normal((300, 150))
y_test = linmap.augment_bias(z_test) @ w + 3.0 * rng.standard_normal((50, 150))

emap = linmap.fit_encoder(x_train, y_train)
z_pred = linmap.decode_latents(emap, y_test)
recon = eigenimage.reconstruct(model, z_pred, clamp=True)

print("latent pairwise accuracy:", metrics.pairwise_decoding_accuracy(z_test, z_pred).accuracy)
print("pix-comp:", metrics.pixcomp(ImageSet(test, size, size, 1), ImageSet(recon, size, size, 1)).accuracy)
