"""Level-spacing statistics of the chiral Gaussian unitary ensemble.

Exact finite-n and hard-edge limiting spacing distributions between the k-th
and (k+1)-st smallest singular values, unfolding maps and microscopic
densities, Monte-Carlo sampling of the quenched ensemble, and bulk-spacing
references (Wigner surmise, Dietz-Haake expansion) for comparison.
"""

__version__ = "0.1.0"

from .asymptotic import (AsymptoticParams, mean_spacing, spacing_pdf_asymptotic,
                         spacing_pdf_quenched, spacing_pdf_unfolded,
                         tabulate_asymptotic)
from .ensemble import (EnsembleConfig, SpectrumSample, build_histogram,
                       kth_spacing, sample_spectrum, spacing_samples,
                       unfold_histogram)
from .finite_spacing import (SpacingParams, brute_force_spacing,
                             gap_probability_smalln, mean_spacing_finite,
                             partition_function, spacing_pdf_finite,
                             spacing_pdf_quenched_k1, tabulate_spacing_finite,
                             z2_shifted)
from .kernels import (KernelEval, airy_kernel, bessel_density, bessel_kernel,
                      ktilde, laguerre_kernel, limiting_kernel, sine_kernel)
from .quadrature import QuadratureSpec, integrate_1d, integrate_nested
from .refstats import (Curve, Histogram, TabulatedDistribution, bulk_spacing_dh,
                       cdf, chi2_distance, delta_curve, wigner_surmise)
from .specfun import airy, bessel_i, bessel_i_log, bessel_j, laguerre, log_factorial
from .unfold import (UnfoldMap, finite_n_density, unfolded_airy_density,
                     unfolded_bessel_density)

__all__ = [
    "AsymptoticParams", "Curve", "EnsembleConfig", "Histogram", "KernelEval",
    "QuadratureSpec", "SpacingParams", "SpectrumSample", "TabulatedDistribution",
    "UnfoldMap", "airy", "airy_kernel", "bessel_density", "bessel_i",
    "bessel_i_log", "bessel_j", "brute_force_spacing", "build_histogram",
    "bulk_spacing_dh", "cdf", "chi2_distance", "delta_curve",
    "finite_n_density", "gap_probability_smalln", "integrate_1d",
    "integrate_nested", "kth_spacing", "ktilde", "laguerre", "laguerre_kernel",
    "limiting_kernel", "log_factorial", "mean_spacing", "mean_spacing_finite",
    "partition_function", "sample_spectrum", "sine_kernel",
    "spacing_pdf_asymptotic", "spacing_pdf_finite", "spacing_pdf_quenched",
    "spacing_pdf_quenched_k1", "spacing_pdf_unfolded", "spacing_samples",
    "tabulate_asymptotic", "tabulate_spacing_finite", "unfold_histogram",
    "unfolded_airy_density", "unfolded_bessel_density", "wigner_surmise",
    "z2_shifted",
]
