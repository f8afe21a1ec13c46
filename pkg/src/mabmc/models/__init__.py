from .gaussian import GaussianModel
from .ising import IsingModel, generate_dataset, ising_energy, load_dataset, mple, save_dataset, wolff_update
from .toy import build_toy_1, build_toy_2

__all__ = [
    "GaussianModel",
    "IsingModel",
    "build_toy_1",
    "build_toy_2",
    "generate_dataset",
    "ising_energy",
    "load_dataset",
    "mple",
    "save_dataset",
    "wolff_update",
]
