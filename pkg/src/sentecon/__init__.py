"""sentecon: an agent-based macroeconomic simulator whose household agents
decide monthly work and consumption through pluggable backends, modulated by
a per-agent memory bank and economic sentiment index."""

__version__ = "0.1.0"

from .backends import (BackendConfig, DecisionRequest, DecisionResponse,
                       make_backend)
from .cognition import MemoryBank, Persona, SentimentState
from .config import RunConfig, from_dict, load_config
from .engine import AblationFlags, HouseholdState, ScenarioEvent, inject_scenario, run
from .market import MarketState

__all__ = [
    "AblationFlags", "BackendConfig", "DecisionRequest", "DecisionResponse",
    "HouseholdState", "MarketState", "MemoryBank", "Persona", "RunConfig",
    "ScenarioEvent", "SentimentState", "from_dict", "inject_scenario",
    "load_config", "make_backend", "run", "__version__",
]
