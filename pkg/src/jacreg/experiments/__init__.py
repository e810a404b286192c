from .denoise import ManifoldSpec, default_denoise_config, run_synthetic_denoise
from .matrix_equiv import run_matrix_equiv
from .report import ExperimentReport, LabeledArray
from .rof import RofProblem, default_rof_config, rof_exact_solution, run_rof
from .shrinkage import make_low_rank_data, run_shrinkage
from .spectrum import SpectrumResult, spectrum_analysis

__all__ = [
    "ManifoldSpec", "default_denoise_config", "run_synthetic_denoise",
    "run_matrix_equiv", "ExperimentReport", "LabeledArray",
    "RofProblem", "default_rof_config", "rof_exact_solution", "run_rof",
    "make_low_rank_data", "run_shrinkage",
    "SpectrumResult", "spectrum_analysis",
]
