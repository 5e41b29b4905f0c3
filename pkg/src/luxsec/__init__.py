"""Secrecy-capacity simulator for IRS-assisted NOMA visible light links.

The pipeline runs from room geometry (``geom``) through optical channel gains
(``channel``) and NOMA rate expressions (``noma``) to the two optimisation
steps: reflecting-element allocation (``irs_alloc``) and the power-split
genetic algorithm (``power_ga``). ``altopt`` alternates the two, ``sim`` runs
Monte Carlo campaigns and ``cli`` wraps everything for the command line.
"""
from .altopt import AltOptConfig, SecrecyReport, optimize
from .channel import ChannelState, LinkMode, OpticalParams, channel_state
from .geom import IrsGrid, RoomConfig, Vec3, place_irs_grid
from .noma import NoiseModel, PowerSplit, RateRequirements, secrecy_capacity
from .sim import CampaignResult, Scenario, brute_force_oracle, run_campaign, run_trial

__version__ = "0.1.0"

__all__ = [
    "AltOptConfig", "CampaignResult", "ChannelState", "IrsGrid", "LinkMode", "NoiseModel",
    "OpticalParams", "PowerSplit", "RateRequirements", "RoomConfig", "Scenario", "SecrecyReport",
    "Vec3", "brute_force_oracle", "channel_state", "optimize", "place_irs_grid", "run_campaign",
    "run_trial", "secrecy_capacity",
]
