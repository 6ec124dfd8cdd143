"""Kernel polynomial and diagrammatic tools for random band matrices.

Subpackages by theme:

* band_model, backend: the sign ensemble on the integer lattice and the
  numba/numpy kernel pair behind it;
* chebyshev: polynomial families of the operator and their Monte Carlo
  moments at the origin;
* path_oracle: exact counts of closed non-backtracking lattice paths with
  even edge multiplicities, and the moment identities they certify;
* diagrams: pairings of such paths, surface contraction, genus census;
* regularizer: the super-exponential kernel, its Fourier transform, the
  step generating function and divided differences;
* fourier_emb: embedding integrals of small multigraphs over Kirchhoff
  subtori, with lattice-sum oracles;
* spectral_estimator: resolvent Monte Carlo, semicircle reference, moment
  reconstruction, and the width-ladder error functional;
* cli: scripted front end over all of the above.
"""

__version__ = "0.1.0"

from . import backend
from .band_model import BandMatrixSpec, SampledBandMatrix, sample_matrix
from .chebyshev import MomentSeries, estimate_moments
from .diagrams import CensusRecord, Diagram, census, contract
from .fourier_emb import EmbQuery, emb_sharp, w_eval
from .path_oracle import PathCountTable, build_table, count_paths
from .regularizer import DeltaKernel, KernelParams, TheoremRegimeWarning
from .spectral_estimator import ResolventQuery, avg_resolvent_im, theorem_error

__all__ = [
    "BandMatrixSpec",
    "CensusRecord",
    "Diagram",
    "DeltaKernel",
    "EmbQuery",
    "KernelParams",
    "MomentSeries",
    "PathCountTable",
    "ResolventQuery",
    "SampledBandMatrix",
    "TheoremRegimeWarning",
    "avg_resolvent_im",
    "backend",
    "build_table",
    "census",
    "contract",
    "count_paths",
    "emb_sharp",
    "estimate_moments",
    "sample_matrix",
    "theorem_error",
    "w_eval",
    "__version__",
]
