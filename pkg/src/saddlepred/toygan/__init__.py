from .mixture import MixtureSpec, sample_mixture
from .mlp import Mlp, StaleCacheError, discriminator_net, generator_net
from .gan import GanProblem, GanRun, MixtureGAN, ModeCoverage, gan_gradients, mode_coverage, train_gan

__all__ = [
    "MixtureSpec", "sample_mixture", "Mlp", "StaleCacheError", "discriminator_net",
    "generator_net", "GanProblem", "GanRun", "MixtureGAN", "ModeCoverage", "gan_gradients", "mode_coverage",
    "train_gan",
]
