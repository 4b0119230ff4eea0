"""Clustering with noisy pairwise side information: TVClust Gibbs sampling and RDP-means."""
from .core import (MAY, MAY_NOT, CredibilityParams, DataMatrix, Kind, Partition, RdpHyperParams,
                   SideInfo, friend_stranger_counts)
from .bregman import DivergenceModel, PriorParams

__version__ = "0.1.0"
