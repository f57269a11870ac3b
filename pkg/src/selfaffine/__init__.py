"""Fourier decay of homogeneous self-affine measures with diagonal linear part."""
from .ifs import (
    HomogeneousIFS,
    ParameterBox,
    bernoulli,
    is_affinely_irreducible,
    load_ifs,
    normalize,
    power_factor_system,
    validate,
)
from .fourier import TransformQuery, mu_hat, mu_hat_batch, renormalize

__version__ = "0.1.0"
